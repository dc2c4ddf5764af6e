#pragma once

#include <stdexcept>
#include <string>

namespace mfcrit {

/// Raised when a factorization, quadrature or optimizer cannot deliver a
/// result for inputs that passed validation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The restricted likelihood has no interior maximizer in the search range.
class BracketError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace mfcrit
