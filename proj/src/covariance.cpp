#include "mfcrit/covariance.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mfcrit/spectral.hpp"

namespace mfcrit {

namespace {

void check_hurst(double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) {
        throw std::domain_error("Hurst index must lie in (0, 1), got " + std::to_string(hurst));
    }
}

// |m|^{2H} log |m| with the continuous extension at m = 0.
double power_log(double m, double two_h) {
    if (m == 0.0) return 0.0;
    return std::pow(m, two_h) * std::log(m);
}

} // namespace

void MfbmParams::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::domain_error("sigma must be non-negative and finite");
    }
    check_hurst(hurst);
}

void MfouParams::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::domain_error("sigma must be non-negative and finite");
    }
    check_hurst(hurst);
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::domain_error("alpha must be positive and finite");
    }
}

SamplingDesign::SamplingDesign(std::size_t n, double delta) : n_(n), delta_(delta) {
    if (n == 0) {
        throw std::domain_error("design needs at least one observation");
    }
    if (!(delta > 0.0 && delta <= 1.0)) {
        throw std::domain_error("step delta must lie in (0, 1], got " + std::to_string(delta));
    }
    log_inv_delta_ = -std::log(delta);
}

SamplingDesign SamplingDesign::sqrt_design(std::size_t n) {
    return SamplingDesign(n, 1.0 / std::sqrt(static_cast<double>(n)));
}

const Eigen::MatrixXd& CovarianceBundle::derivative(int index) const {
    switch (index) {
    case 0:
        return d_sigma;
    case 1:
        return d_hurst;
    case 2:
        if (d_alpha) return *d_alpha;
        break;
    default:
        break;
    }
    throw std::out_of_range("no derivative matrix for parameter index " + std::to_string(index));
}

double fgn_autocovariance(std::size_t lag, double hurst) {
    check_hurst(hurst);
    const double k = static_cast<double>(lag);
    const double two_h = 2.0 * hurst;
    if (lag == 0) return 1.0;
    return 0.5 * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(k - 1.0, two_h));
}

double fgn_autocovariance_dH(std::size_t lag, double hurst) {
    check_hurst(hurst);
    if (lag == 0) return 0.0;
    const double k = static_cast<double>(lag);
    const double two_h = 2.0 * hurst;
    return power_log(k + 1.0, two_h) - 2.0 * power_log(k, two_h) + power_log(k - 1.0, two_h);
}

Eigen::MatrixXd toeplitz(const Eigen::VectorXd& column) {
    const Eigen::Index n = column.size();
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            out(i, j) = column(std::abs(i - j));
        }
    }
    return out;
}

CovarianceBundle mfbm_bundle(const MfbmParams& params, const SamplingDesign& design) {
    params.validate();
    const std::size_t n = design.n();
    const double delta = design.delta();
    const double h = params.hurst;
    const double s = params.sigma;

    Eigen::VectorXd gamma(static_cast<Eigen::Index>(n));
    Eigen::VectorXd d_gamma(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        gamma(static_cast<Eigen::Index>(k)) = fgn_autocovariance(k, h);
        d_gamma(static_cast<Eigen::Index>(k)) = fgn_autocovariance_dH(k, h);
    }
    const double scale = std::pow(delta, 2.0 * h); // Delta^{2H}
    const double log_delta = std::log(delta);

    Eigen::VectorXd col_sigma = s * s * scale * gamma;
    col_sigma(0) += delta;
    Eigen::VectorXd col_ds = 2.0 * s * scale * gamma;
    Eigen::VectorXd col_dh = s * s * scale * (2.0 * log_delta * gamma + d_gamma);

    CovarianceBundle out;
    out.sigma_matrix = toeplitz(col_sigma);
    out.d_sigma = toeplitz(col_ds);
    out.d_hurst = toeplitz(col_dh);
    return out;
}

MfouAutocovariance mfou_autocovariance(double tau, const MfouParams& params) {
    params.validate();
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw std::domain_error("time lag must be non-negative");
    }
    const double a = params.alpha;
    const double s = params.sigma;
    const double decay = std::exp(-a * tau);

    // The Brownian part of the spectrum is rational and transforms in closed
    // form.
    MfouAutocovariance out;
    out.value = decay / (2.0 * a);
    out.d_alpha = -decay * (tau / (2.0 * a) + 1.0 / (2.0 * a * a));
    if (s == 0.0) return out;

    const double c = spectral::c_coefficient(params.hurst);
    const double dlogc = spectral::c_log_derivative(params.hurst);
    const FractionalTransforms ft = fractional_transforms(tau, params.hurst, a, true);
    out.value += s * s * c * ft.i0;
    out.d_sigma = 2.0 * s * c * ft.i0;
    out.d_hurst = s * s * c * (dlogc * ft.i0 - 2.0 * ft.ilog);
    out.d_alpha += -2.0 * a * s * s * c * ft.ia;
    out.abs_error = s * s * c * ft.abs_error;
    return out;
}

double mfou_autocovariance_value(double tau, const MfouParams& params) {
    params.validate();
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw std::domain_error("time lag must be non-negative");
    }
    const double a = params.alpha;
    double value = std::exp(-a * tau) / (2.0 * a);
    if (params.sigma == 0.0) return value;
    const FractionalTransforms ft = fractional_transforms(tau, params.hurst, a, false);
    return value + params.sigma * params.sigma * spectral::c_coefficient(params.hurst) * ft.i0;
}

CovarianceBundle mfou_bundle(const MfouParams& params, const SamplingDesign& design) {
    params.validate();
    const auto n = static_cast<Eigen::Index>(design.n());
    Eigen::VectorXd v(n), ds(n), dh(n), da(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const MfouAutocovariance r = mfou_autocovariance(static_cast<double>(k) * design.delta(), params);
        v(k) = r.value;
        ds(k) = r.d_sigma;
        dh(k) = r.d_hurst;
        da(k) = r.d_alpha;
    }
    CovarianceBundle out;
    out.sigma_matrix = toeplitz(v);
    out.d_sigma = toeplitz(ds);
    out.d_hurst = toeplitz(dh);
    out.d_alpha = toeplitz(da);
    return out;
}

Eigen::MatrixXd mfou_covariance(const MfouParams& params, const SamplingDesign& design) {
    params.validate();
    const auto n = static_cast<Eigen::Index>(design.n());
    Eigen::VectorXd v(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        v(k) = mfou_autocovariance_value(static_cast<double>(k) * design.delta(), params);
    }
    return toeplitz(v);
}

CovarianceBundle build_bundle(const ModelParams& params, const SamplingDesign& design) {
    if (const auto* m = std::get_if<MfbmParams>(&params)) return mfbm_bundle(*m, design);
    return mfou_bundle(std::get<MfouParams>(params), design);
}

} // namespace mfcrit
