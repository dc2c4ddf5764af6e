// Covariance matrices and exact parameter derivatives for the two observation
// schemes: mfBm increments on a regular grid and stationary mfOU samples.
#pragma once

#include <cstddef>
#include <optional>
#include <variant>

#include <Eigen/Dense>

namespace mfcrit {

/// Y_t = sigma B^H_t + W_t, observed through its increments.
struct MfbmParams {
    double sigma = 1.0;
    double hurst = 0.75;

    /// sigma >= 0 (sigma = 0 is the pure Brownian limit), 0 < hurst < 1.
    void validate() const;
};

/// Stationary solution of dX = -alpha X dt + d(sigma B^H + W).
struct MfouParams {
    double sigma = 1.0;
    double hurst = 0.75;
    double alpha = 1.0;

    void validate() const;
};

using ModelParams = std::variant<MfbmParams, MfouParams>;

/// Regular observation grid of n points with step delta, L = log(1/delta).
class SamplingDesign {
public:
    /// n >= 1 and 0 < delta <= 1. delta = 1 gives L = 0, which is only
    /// meaningful for the closed-form one-point checks.
    SamplingDesign(std::size_t n, double delta);

    /// delta = n^{-1/2}, the asymptotic ladder used throughout.
    static SamplingDesign sqrt_design(std::size_t n);

    std::size_t n() const { return n_; }
    double delta() const { return delta_; }
    double log_inv_delta() const { return log_inv_delta_; }
    /// n * delta, the time span.
    double span() const { return static_cast<double>(n_) * delta_; }

private:
    std::size_t n_;
    double delta_;
    double log_inv_delta_;
};

struct CovarianceBundle {
    Eigen::MatrixXd sigma_matrix;
    Eigen::MatrixXd d_sigma;
    Eigen::MatrixXd d_hurst;
    std::optional<Eigen::MatrixXd> d_alpha;

    Eigen::Index dim() const { return sigma_matrix.rows(); }
    /// Number of parameters with a derivative matrix (2 or 3).
    int parameter_count() const { return d_alpha ? 3 : 2; }
    const Eigen::MatrixXd& derivative(int index) const;
};

/// Unit-variance fGn autocovariance 0.5 (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}).
double fgn_autocovariance(std::size_t lag, double hurst);

/// d/dH of fgn_autocovariance with the convention 0 log 0 = 0.
double fgn_autocovariance_dH(std::size_t lag, double hurst);

/// Symmetric Toeplitz matrix with first column `column`.
Eigen::MatrixXd toeplitz(const Eigen::VectorXd& column);

/// Sigma = Delta (I + sigma^2 Delta^{2H-1} T(gamma_H)) with exact sigma and H
/// derivatives.
CovarianceBundle mfbm_bundle(const MfbmParams& params, const SamplingDesign& design);

/// Autocovariance of the stationary mfOU process at time lag tau together
/// with its parameter derivatives. The spectral density on the real line is
/// (1 + sigma^2 c_H |l|^{1-2H}) / (2 pi (alpha^2 + l^2)).
struct MfouAutocovariance {
    double value = 0.0;
    double d_sigma = 0.0;
    double d_hurst = 0.0;
    double d_alpha = 0.0;
    double abs_error = 0.0; ///< quadrature error estimate on the value
};

MfouAutocovariance mfou_autocovariance(double tau, const MfouParams& params);

/// Same, without the H and alpha derivative quadratures.
double mfou_autocovariance_value(double tau, const MfouParams& params);

/// Toeplitz covariance of (X_Delta, ..., X_{n Delta}) and its derivatives.
CovarianceBundle mfou_bundle(const MfouParams& params, const SamplingDesign& design);

/// Covariance matrix only (used inside optimizers).
Eigen::MatrixXd mfou_covariance(const MfouParams& params, const SamplingDesign& design);

CovarianceBundle build_bundle(const ModelParams& params, const SamplingDesign& design);

/// Fractional part of the mfOU covariance: the three cosine transforms
///   I0   = (1/pi) int_0^inf cos(tau l) l^{1-2H} / (alpha^2 + l^2) dl
///   Ilog = (1/pi) int_0^inf cos(tau l) l^{1-2H} log(l) / (alpha^2 + l^2) dl
///   Ia   = (1/pi) int_0^inf cos(tau l) l^{1-2H} / (alpha^2 + l^2)^2 dl
struct FractionalTransforms {
    double i0 = 0.0;
    double ilog = 0.0;
    double ia = 0.0;
    double abs_error = 0.0;
};

FractionalTransforms fractional_transforms(double tau, double hurst, double alpha,
                                           bool with_derivatives = true);

} // namespace mfcrit
