// Spectral kernels and closed-form critical constants at the H = 3/4 boundary.
#pragma once

#include <optional>

#include <Eigen/Dense>

namespace mfcrit::spectral {

inline constexpr double kCriticalHurst = 0.75;

/// Number of aliasing terms on each side of k = 0 kept explicitly in the
/// fGn spectral series; the remainder is replaced by its integral.
inline constexpr int kAliasingTerms = 200;

/// c_H = Gamma(2H+1) sin(pi H), the low-frequency coefficient of the fGn
/// spectral density. Throws std::domain_error unless 0 < H < 1.
double c_coefficient(double hurst);

/// d/dH log c_H = 2 psi(2H+1) + pi cot(pi H).
double c_log_derivative(double hurst);

/// K = c_{3/4} = 3 sqrt(2 pi) / 8.
double critical_k();

/// beta = d/dH log c_H at 3/4, digamma form 2 psi(5/2) - pi.
double critical_beta();

/// The same constant written with elementary constants,
/// 16/3 - 2 gamma_E - 4 log 2 - pi. Kept separate so the two routes can be
/// compared.
double critical_beta_elementary();

/// fGn spectral density
///   f_H(l) = 2 c_H (1 - cos l) sum_k |l + 2 pi k|^{-(2H+1)}
/// on [-pi, pi] \ {0}, normalised so that (1/2pi) int f_H = 1.
double fgn_spectral_density(double lambda, double hurst);

/// Exact H-derivative of the truncated series used by fgn_spectral_density.
double fgn_spectral_density_dH(double lambda, double hurst);

/// w(u) = eta |u|^{-1/2} / (1 + eta |u|^{-1/2}); strictly inside (0, 1).
double weight_profile(double u, double eta);

struct Profiles {
    double g_sigma = 0.0;
    double g_hurst = 0.0;
    std::optional<double> g_alpha;
};

/// Critical score profiles on the scaled frequency axis u = lambda / Delta:
///   g_sigma = (2/sigma) w(u)
///   g_H     = w(u) (2L + beta - 2 log|u|)
///   g_alpha = -2 alpha / (alpha^2 + u^2)          (only when alpha is given)
Profiles profiles(double u, double eta, double L, double beta, double sigma,
                  std::optional<double> alpha = std::nullopt);

struct JIntegrals {
    double j0 = 0.0;
    double j1 = 0.0;
    double j2 = 0.0;
};

/// J_k = 2 int_1^{e^L} u^{-1} (2L + beta - 2 log u)^k du in closed form.
JIntegrals j_integrals(double beta, double L);

struct CriticalConstants {
    double c_hurst = 0.0; ///< c_H at the requested Hurst index
    double k = 0.0;       ///< c_{3/4}
    double beta = 0.0;    ///< log-derivative of c_H at 3/4
    double eta = 0.0;     ///< sigma^2 K
    double i_eff = 0.0;   ///< efficient information 3 sigma^4 / 64
};

CriticalConstants critical_constants(double sigma, double hurst = kCriticalHurst);

/// 3 sigma^4 / 64.
double efficient_information(double sigma);

/// Leading-order covariance of the normalised transformed score vector.
/// 2x2 (sigma, H) for mfBm, 3x3 (sigma, H, alpha) when alpha is given.
class GammaCrit {
public:
    GammaCrit(double sigma, std::optional<double> alpha = std::nullopt);

    const Eigen::MatrixXd& matrix() const { return entries_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
    Eigen::Index size() const { return entries_.rows(); }
    bool has_alpha() const { return entries_.rows() == 3; }

    /// Gamma_{sigma H} / sqrt(Gamma_{sigma sigma} Gamma_{HH}).
    double sigma_hurst_correlation() const;
    /// Schur complement of the H entry on the nuisance block.
    double efficient_information() const;
    bool positive_definite() const;

private:
    Eigen::MatrixXd entries_;
};

/// Xi = 2 Gamma: the trace constants tr(C^2) ~ Xi_ss n Delta L etc.
struct XiConstants {
    double sigma_sigma = 0.0;
    double sigma_hurst = 0.0;
    double hurst_hurst = 0.0;
    std::optional<double> alpha_alpha;
};

XiConstants xi_constants(double sigma, std::optional<double> alpha = std::nullopt);

GammaCrit gamma_crit(double sigma, std::optional<double> alpha = std::nullopt);

} // namespace mfcrit::spectral
