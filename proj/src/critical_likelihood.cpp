#include "mfcrit/critical_likelihood.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mfcrit/error.hpp"
#include "mfcrit/spectral.hpp"

namespace mfcrit {

CriticalMfbm::CriticalMfbm(const SamplingDesign& design) : design_(design) {
    const auto n = static_cast<Eigen::Index>(design.n());
    const double h = spectral::kCriticalHurst;
    Eigen::VectorXd gamma(n), d_gamma(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        gamma(k) = fgn_autocovariance(static_cast<std::size_t>(k), h);
        d_gamma(k) = fgn_autocovariance_dH(static_cast<std::size_t>(k), h);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(toeplitz(gamma));
    if (eig.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition of the fGn Toeplitz matrix failed");
    }
    eigenvalues_ = eig.eigenvalues();
    basis_ = eig.eigenvectors();
    d_hurst_projected_ = basis_.transpose() * toeplitz(d_gamma) * basis_;
}

Eigen::VectorXd CriticalMfbm::project(const Eigen::VectorXd& x) const {
    if (x.size() != basis_.rows()) {
        throw std::invalid_argument("observation vector has length " + std::to_string(x.size()) +
                                    ", design has n = " + std::to_string(basis_.rows()));
    }
    return basis_.transpose() * x;
}

double CriticalMfbm::log_likelihood(const Eigen::VectorXd& y, double sigma) const {
    const double delta = design_.delta();
    const double scale = sigma * sigma * std::pow(delta, 1.5);
    const Eigen::ArrayXd d = delta + scale * eigenvalues_.array();
    const double n = static_cast<double>(y.size());
    return -0.5 * (n * std::log(2.0 * std::numbers::pi) + d.log().sum() + (y.array().square() / d).sum());
}

double CriticalMfbm::sigma_score(const Eigen::VectorXd& y, double sigma) const {
    const double delta = design_.delta();
    const double d15 = std::pow(delta, 1.5);
    const Eigen::ArrayXd lam = eigenvalues_.array();
    const Eigen::ArrayXd d = delta + sigma * sigma * d15 * lam;
    const Eigen::ArrayXd inv = d.inverse();
    return sigma * d15 * (lam * (y.array().square() * inv.square() - inv)).sum();
}

ScoreVector CriticalMfbm::scores(const Eigen::VectorXd& y, double sigma) const {
    const double delta = design_.delta();
    const double d15 = std::pow(delta, 1.5);
    const double s2 = sigma * sigma;
    const Eigen::ArrayXd lam = eigenvalues_.array();
    const Eigen::ArrayXd d = delta + s2 * d15 * lam;
    const Eigen::ArrayXd inv = d.inverse();
    const Eigen::VectorXd z = (y.array() * inv).matrix();

    ScoreVector sv;
    sv.s_sigma = sigma * d15 * (lam * (z.array().square() - inv)).sum();

    // dSigma/dH in the eigenbasis: sigma^2 Delta^{3/2} (2 log Delta diag(lambda) + P).
    const double two_log_delta = 2.0 * std::log(delta);
    const double quad = two_log_delta * (lam * z.array().square()).sum() +
                        z.dot(d_hurst_projected_.selfadjointView<Eigen::Lower>() * z);
    const double trace = two_log_delta * (lam * inv).sum() +
                         (d_hurst_projected_.diagonal().array() * inv).sum();
    sv.s_hurst = 0.5 * s2 * d15 * (quad - trace);

    sv.n = design_.n();
    sv.delta = delta;
    sv.log_inv_delta = design_.log_inv_delta();
    return with_transform(sv, sigma);
}

} // namespace mfcrit
