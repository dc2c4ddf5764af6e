#include "mfcrit/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

namespace mfcrit::spectral {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_hurst(double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) {
        throw std::domain_error("Hurst index must lie in (0, 1), got " + std::to_string(hurst));
    }
}

void check_frequency(double lambda) {
    if (lambda == 0.0 || !std::isfinite(lambda)) {
        throw std::domain_error("spectral density is singular at lambda = 0");
    }
    if (std::abs(lambda) > kPi) {
        throw std::domain_error("frequency must lie in [-pi, pi], got " + std::to_string(lambda));
    }
}

// sum_{k != 0} |lambda + 2 pi k|^{-p} and its p-derivative. Terms with
// 0 < |k| <= K are summed; each one-sided tail is replaced by the midpoint
// integral int_{K+1/2}^inf (2 pi x +- lambda)^{-p} dx = A^{1-p} / (2 pi (p - 1)).
struct AliasingSum {
    double value = 0.0;
    double d_p = 0.0;
};

AliasingSum aliasing_sum(double lambda, double p) {
    AliasingSum out;
    for (int k = -kAliasingTerms; k <= kAliasingTerms; ++k) {
        if (k == 0) continue;
        const double a = std::abs(lambda + kTwoPi * k);
        const double term = std::pow(a, -p);
        out.value += term;
        out.d_p -= term * std::log(a);
    }
    const double edge = kTwoPi * (kAliasingTerms + 0.5);
    for (const double a : {edge + lambda, edge - lambda}) {
        const double q = p - 1.0;
        const double base = std::pow(a, -q) / kTwoPi;
        out.value += base / q;
        out.d_p += base * (-std::log(a) / q - 1.0 / (q * q));
    }
    return out;
}

double one_minus_cos(double lambda) {
    const double s = std::sin(0.5 * lambda);
    return 2.0 * s * s;
}

// (1 - cos lambda) / lambda^2, finite as lambda -> 0.
double one_minus_cos_ratio(double lambda) {
    const double s = std::sin(0.5 * lambda) / (0.5 * lambda);
    return 0.5 * s * s;
}

} // namespace

double c_coefficient(double hurst) {
    check_hurst(hurst);
    return std::tgamma(2.0 * hurst + 1.0) * std::sin(kPi * hurst);
}

double c_log_derivative(double hurst) {
    check_hurst(hurst);
    return 2.0 * boost::math::digamma(2.0 * hurst + 1.0) + kPi / std::tan(kPi * hurst);
}

double critical_k() { return c_coefficient(kCriticalHurst); }

double critical_beta() { return 2.0 * boost::math::digamma(2.5) - kPi; }

double critical_beta_elementary() {
    return 16.0 / 3.0 - 2.0 * std::numbers::egamma - 4.0 * std::numbers::ln2 - kPi;
}

double fgn_spectral_density(double lambda, double hurst) {
    check_hurst(hurst);
    check_frequency(lambda);
    const double l = std::abs(lambda);
    const double p = 2.0 * hurst + 1.0;
    const AliasingSum s = aliasing_sum(l, p);
    // The k = 0 term is written as ((1 - cos) / l^2) l^{2-p} so it stays finite near 0.
    const double central = one_minus_cos_ratio(l) * std::pow(l, 2.0 - p);
    return 2.0 * c_coefficient(hurst) * (one_minus_cos(l) * s.value + central);
}

double fgn_spectral_density_dH(double lambda, double hurst) {
    check_hurst(hurst);
    check_frequency(lambda);
    const double l = std::abs(lambda);
    const double p = 2.0 * hurst + 1.0;
    const AliasingSum s = aliasing_sum(l, p);
    const double central = one_minus_cos_ratio(l) * std::pow(l, 2.0 - p);
    const double omc = one_minus_cos(l);
    const double c = c_coefficient(hurst);
    const double dc = c * c_log_derivative(hurst);
    // dp/dH = 2
    return 2.0 * (dc * (omc * s.value + central) + c * 2.0 * (omc * s.d_p - central * std::log(l)));
}

double weight_profile(double u, double eta) {
    if (u == 0.0) {
        throw std::domain_error("weight profile is undefined at u = 0");
    }
    if (!(eta > 0.0)) {
        throw std::domain_error("eta must be positive");
    }
    const double root = std::sqrt(std::abs(u));
    return eta / (root + eta);
}

Profiles profiles(double u, double eta, double L, double beta, double sigma,
                  std::optional<double> alpha) {
    if (!(sigma > 0.0)) {
        throw std::domain_error("sigma must be positive");
    }
    const double w = weight_profile(u, eta);
    Profiles out;
    out.g_sigma = 2.0 * w / sigma;
    out.g_hurst = w * (2.0 * L + beta - 2.0 * std::log(std::abs(u)));
    if (alpha) {
        if (!(*alpha > 0.0)) {
            throw std::domain_error("alpha must be positive");
        }
        out.g_alpha = -2.0 * *alpha / (*alpha * *alpha + u * u);
    }
    return out;
}

JIntegrals j_integrals(double beta, double L) {
    if (!(L > 0.0)) {
        throw std::domain_error("L must be positive");
    }
    return {2.0 * L, 2.0 * L * L + 2.0 * beta * L,
            8.0 / 3.0 * L * L * L + 4.0 * beta * L * L + 2.0 * beta * beta * L};
}

double efficient_information(double sigma) {
    const double s2 = sigma * sigma;
    return 3.0 * s2 * s2 / 64.0;
}

CriticalConstants critical_constants(double sigma, double hurst) {
    if (!(sigma > 0.0)) {
        throw std::domain_error("sigma must be positive");
    }
    CriticalConstants out;
    out.c_hurst = c_coefficient(hurst);
    out.k = critical_k();
    out.beta = critical_beta();
    out.eta = sigma * sigma * out.k;
    out.i_eff = efficient_information(sigma);
    return out;
}

XiConstants xi_constants(double sigma, std::optional<double> alpha) {
    if (!(sigma > 0.0)) {
        throw std::domain_error("sigma must be positive");
    }
    const double k2 = critical_k() * critical_k();
    XiConstants xi;
    xi.sigma_sigma = 4.0 * sigma * sigma * k2 / kPi;
    xi.sigma_hurst = 2.0 * sigma * sigma * sigma * k2 / kPi;
    xi.hurst_hurst = 4.0 * std::pow(sigma, 4) * k2 / (3.0 * kPi);
    if (alpha) {
        if (!(*alpha > 0.0)) {
            throw std::domain_error("alpha must be positive");
        }
        xi.alpha_alpha = 1.0 / *alpha;
    }
    return xi;
}

GammaCrit::GammaCrit(double sigma, std::optional<double> alpha) {
    const XiConstants xi = xi_constants(sigma, alpha);
    const Eigen::Index dim = alpha ? 3 : 2;
    entries_ = Eigen::MatrixXd::Zero(dim, dim);
    entries_(0, 0) = 0.5 * xi.sigma_sigma;
    entries_(0, 1) = entries_(1, 0) = 0.5 * xi.sigma_hurst;
    entries_(1, 1) = 0.5 * xi.hurst_hurst;
    if (alpha) {
        entries_(2, 2) = 0.5 * *xi.alpha_alpha;
    }
}

double GammaCrit::sigma_hurst_correlation() const {
    return entries_(0, 1) / std::sqrt(entries_(0, 0) * entries_(1, 1));
}

double GammaCrit::efficient_information() const {
    // Nuisance block is everything except index 1.
    const Eigen::Index dim = entries_.rows();
    std::vector<Eigen::Index> nuisance;
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (i != 1) nuisance.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(nuisance.size());
    Eigen::MatrixXd block(m, m);
    Eigen::VectorXd cross(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        cross(a) = entries_(1, nuisance[a]);
        for (Eigen::Index b = 0; b < m; ++b) {
            block(a, b) = entries_(nuisance[a], nuisance[b]);
        }
    }
    return entries_(1, 1) - cross.dot(block.ldlt().solve(cross));
}

bool GammaCrit::positive_definite() const {
    Eigen::LLT<Eigen::MatrixXd> llt(entries_);
    return llt.info() == Eigen::Success;
}

GammaCrit gamma_crit(double sigma, std::optional<double> alpha) { return GammaCrit(sigma, alpha); }

} // namespace mfcrit::spectral
