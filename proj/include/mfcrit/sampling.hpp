// Exact Gaussian simulation of fGn, mfBm increments and stationary mfOU paths.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

#include "mfcrit/covariance.hpp"

namespace mfcrit {

using Rng = std::mt19937_64;

/// Deterministic 64-bit sub-seed for replication `rep` of stream `stream`.
std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t rep);

enum class SamplerBackend { direct, circulant_embedding, cholesky };

std::string_view backend_name(SamplerBackend backend);

/// Unit-variance fGn of length n. The circulant embedding of size 2(n-1) is
/// used whenever its eigenvalues are nonnegative; otherwise the Toeplitz
/// covariance is factorized.
class FgnSampler {
public:
    FgnSampler(std::size_t n, double hurst);

    SamplerBackend backend() const { return backend_; }
    std::size_t size() const { return n_; }
    Eigen::VectorXd draw(Rng& rng) const;

private:
    std::size_t n_;
    SamplerBackend backend_ = SamplerBackend::direct;
    Eigen::VectorXd amplitude_; // sqrt(lambda_k / m)
    Eigen::MatrixXd cholesky_;
};

/// Forces the Cholesky backend; used to compare the two routes.
Eigen::VectorXd sample_fgn_cholesky(std::size_t n, double hurst, Rng& rng);

struct FgnSample {
    Eigen::VectorXd values;
    SamplerBackend backend = SamplerBackend::direct;
};

FgnSample sample_fgn(std::size_t n, double hurst, std::uint64_t seed);

/// sigma Delta^H fGn + sqrt(Delta) N(0, I), the two parts drawn from
/// separate engines.
class MfbmSampler {
public:
    MfbmSampler(const MfbmParams& params, const SamplingDesign& design);

    Eigen::VectorXd draw(std::uint64_t seed) const;
    SamplerBackend backend() const { return fgn_.backend(); }

private:
    MfbmParams params_;
    SamplingDesign design_;
    FgnSampler fgn_;
};

Eigen::VectorXd sample_mfbm_increments(const MfbmParams& params, const SamplingDesign& design,
                                       std::uint64_t seed);

/// Stationary mfOU levels via the Cholesky factor of the sampled covariance.
class MfouSampler {
public:
    MfouSampler(const MfouParams& params, const SamplingDesign& design);

    Eigen::VectorXd draw(std::uint64_t seed) const;

private:
    Eigen::MatrixXd lower_;
};

Eigen::VectorXd sample_mfou_path(const MfouParams& params, const SamplingDesign& design,
                                 std::uint64_t seed);

struct SimulationSpec {
    ModelParams params;
    SamplingDesign design;
    std::uint64_t seed = 0;
    std::uint64_t replication = 0;

    Eigen::VectorXd simulate() const;
};

} // namespace mfcrit
