#include "mfcrit/covariance.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mfcrit/error.hpp"

namespace mfcrit {

namespace {

constexpr double kRelativeGoal = 1e-12;
constexpr double kAbsoluteTolerance = 1e-10;

// The Ooura integrator caches its node tables and mutates them lazily, so
// every worker thread gets its own instance.
boost::math::quadrature::ooura_fourier_cos<double>& fourier_cos() {
    thread_local boost::math::quadrature::ooura_fourier_cos<double> integrator(kRelativeGoal, 8);
    return integrator;
}

boost::math::quadrature::tanh_sinh<double>& tanh_sinh_rule() {
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    return rule;
}

boost::math::quadrature::exp_sinh<double>& exp_sinh_rule() {
    thread_local boost::math::quadrature::exp_sinh<double> rule;
    return rule;
}

// int_0^inf g(l) dl split at alpha: tanh-sinh absorbs the |l|^{1-2H} kink at
// the origin, exp-sinh the algebraic tail.
template <class F>
std::pair<double, double> half_line(F const& g, double alpha) {
    double err_a = 0.0;
    double err_b = 0.0;
    double l1 = 0.0;
    const double a = tanh_sinh_rule().integrate(g, 0.0, alpha, kRelativeGoal, &err_a, &l1);
    const double b = exp_sinh_rule().integrate(g, alpha, std::numeric_limits<double>::infinity(),
                                               kRelativeGoal, &err_b, &l1);
    return {a + b, err_a + err_b};
}

template <class F>
std::pair<double, double> cosine_transform(F const& g, double tau, double alpha) {
    if (tau == 0.0) {
        return half_line(g, alpha);
    }
    auto [value, rel] = fourier_cos().integrate(g, tau);
    return {value, rel * std::abs(value)};
}

void check_error(double error, double value, const char* what, double tau) {
    const double tol = kAbsoluteTolerance * std::max(1.0, std::abs(value));
    if (!(error <= tol) || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << "mfOU quadrature for " << what << " did not converge at tau = " << tau
            << " (estimate " << value << ", achieved error " << error << ")";
        throw NumericalError(msg.str());
    }
}

} // namespace

FractionalTransforms fractional_transforms(double tau, double hurst, double alpha,
                                           bool with_derivatives) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw std::domain_error("time lag must be non-negative");
    }
    if (!(alpha > 0.0)) {
        throw std::domain_error("alpha must be positive");
    }
    if (!(hurst > 0.0 && hurst < 1.0)) {
        throw std::domain_error("Hurst index must lie in (0, 1)");
    }
    constexpr double inv_pi = std::numbers::inv_pi;
    const double exponent = 1.0 - 2.0 * hurst;
    const double a2 = alpha * alpha;

    FractionalTransforms out;
    auto base = [=](double l) { return std::pow(l, exponent) / (a2 + l * l); };
    auto [i0, e0] = cosine_transform(base, tau, alpha);
    check_error(e0, i0, "value", tau);
    out.i0 = inv_pi * i0;
    out.abs_error = inv_pi * e0;

    if (with_derivatives) {
        auto logged = [=](double l) { return std::pow(l, exponent) * std::log(l) / (a2 + l * l); };
        auto squared = [=](double l) {
            const double d = a2 + l * l;
            return std::pow(l, exponent) / (d * d);
        };
        auto [il, el] = cosine_transform(logged, tau, alpha);
        check_error(el, il, "H-derivative", tau);
        auto [ia, ea] = cosine_transform(squared, tau, alpha);
        check_error(ea, ia, "alpha-derivative", tau);
        out.ilog = inv_pi * il;
        out.ia = inv_pi * ia;
    }
    return out;
}

} // namespace mfcrit
