#include "mfcrit/gaussian_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfcrit/error.hpp"

namespace mfcrit {

GaussianModel::GaussianModel(CovarianceBundle bundle) : bundle_(std::move(bundle)) {
    llt_.compute(bundle_.sigma_matrix);
    if (llt_.info() != Eigen::Success) {
        throw NumericalError("covariance matrix is not positive definite (Cholesky failed)");
    }
    const auto& l = llt_.matrixLLT();
    log_det_ = 2.0 * l.diagonal().array().log().sum();

    const int p = bundle_.parameter_count();
    traces_.resize(p);
    for (int i = 0; i < p; ++i) {
        traces_(i) = llt_.solve(bundle_.derivative(i)).trace();
    }
}

void GaussianModel::check_dim(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) {
        throw std::invalid_argument("observation vector has length " + std::to_string(x.size()) +
                                    ", covariance has dimension " + std::to_string(dim()));
    }
}

double GaussianModel::log_likelihood(const Eigen::VectorXd& x) const {
    check_dim(x);
    const Eigen::VectorXd z = llt_.matrixL().solve(x);
    const double n = static_cast<double>(x.size());
    return -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det_ + z.squaredNorm());
}

Eigen::VectorXd GaussianModel::raw_scores(const Eigen::VectorXd& x) const {
    check_dim(x);
    const Eigen::VectorXd u = llt_.solve(x);
    const int p = bundle_.parameter_count();
    Eigen::VectorXd s(p);
    for (int i = 0; i < p; ++i) {
        s(i) = 0.5 * (u.dot(bundle_.derivative(i).selfadjointView<Eigen::Lower>() * u) - traces_(i));
    }
    return s;
}

ScoreVector GaussianModel::scores(const Eigen::VectorXd& x, double sigma,
                                  const SamplingDesign& design) const {
    const Eigen::VectorXd s = raw_scores(x);
    ScoreVector sv;
    sv.s_sigma = s(0);
    sv.s_hurst = s(1);
    if (s.size() > 2) sv.s_alpha = s(2);
    sv.n = design.n();
    sv.delta = design.delta();
    sv.log_inv_delta = design.log_inv_delta();
    return with_transform(sv, sigma);
}

double log_likelihood(const CovarianceBundle& bundle, const Eigen::VectorXd& x) {
    return GaussianModel(bundle).log_likelihood(x);
}

ScoreVector score_vector(const CovarianceBundle& bundle, const Eigen::VectorXd& x, double sigma,
                         const SamplingDesign& design) {
    return GaussianModel(bundle).scores(x, sigma, design);
}

ScoreVector with_transform(ScoreVector sv, double sigma) {
    sv.transform_sigma = sigma;
    sv.r_hurst = sv.s_hurst + sigma * sv.log_inv_delta * sv.s_sigma;
    return sv;
}

NormalizedScores normalized_scores(const ScoreVector& sv) {
    if (!(sv.log_inv_delta > 0.0)) {
        throw std::domain_error("normalization needs L = log(1/delta) > 0");
    }
    const double span = static_cast<double>(sv.n) * sv.delta;
    const double l = sv.log_inv_delta;
    NormalizedScores out;
    out.xi_sigma = sv.s_sigma / std::sqrt(span * l);
    out.xi_hurst = sv.r_hurst / (std::sqrt(span) * l * std::sqrt(l));
    if (sv.s_alpha) out.xi_alpha = *sv.s_alpha / std::sqrt(span);
    return out;
}

Eigen::MatrixXd triangular_transform(double sigma, double log_inv_delta, int parameter_count) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(parameter_count, parameter_count);
    m(1, 0) = sigma * log_inv_delta;
    return m;
}

Eigen::VectorXd critical_rates(const SamplingDesign& design, int parameter_count) {
    const double span = design.span();
    const double l = design.log_inv_delta();
    Eigen::VectorXd r(parameter_count);
    r(0) = std::sqrt(span * l);
    r(1) = std::sqrt(span) * l * std::sqrt(l);
    if (parameter_count > 2) r(2) = std::sqrt(span);
    return r;
}

namespace {

double frobenius_dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.cwiseProduct(b).sum();
}

// L^{-1} m L^{-T}, written into m.
void sandwich(const Eigen::MatrixXd& l, Eigen::MatrixXd& m) {
    const auto tri = l.triangularView<Eigen::Lower>();
    tri.solveInPlace(m);
    m.transposeInPlace();
    tri.solveInPlace(m);
}

} // namespace

TraceMoments score_trace_moments(const CovarianceBundle& bundle, double sigma,
                                 const SamplingDesign& design) {
    Eigen::LLT<Eigen::MatrixXd> llt(bundle.sigma_matrix);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("covariance matrix is not positive definite (Cholesky failed)");
    }
    const Eigen::MatrixXd& l = llt.matrixLLT();
    const int p = bundle.parameter_count();

    std::vector<Eigen::MatrixXd> m(p);
    for (int i = 0; i < p; ++i) {
        m[i] = bundle.derivative(i);
        sandwich(l, m[i]);
    }

    TraceMoments out;
    out.raw.resize(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j <= i; ++j) {
            out.raw(i, j) = out.raw(j, i) = frobenius_dot(m[i], m[j]);
        }
    }
    out.cc = out.raw(0, 0);
    out.c_mh = out.raw(0, 1);

    // D overwrites M_H.
    Eigen::MatrixXd& d = m[1];
    d += sigma * design.log_inv_delta() * m[0];
    out.cd = frobenius_dot(m[0], d);
    out.dd = d.squaredNorm();
    if (p > 2) {
        out.aa = out.raw(2, 2);
        out.ca = out.raw(0, 2);
        out.da = frobenius_dot(d, m[2]);
    }
    return out;
}

double operator_norm_d(const CovarianceBundle& bundle, double sigma, const SamplingDesign& design,
                       int iterations) {
    Eigen::LLT<Eigen::MatrixXd> llt(bundle.sigma_matrix);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("covariance matrix is not positive definite (Cholesky failed)");
    }
    const Eigen::MatrixXd& l = llt.matrixLLT();
    Eigen::MatrixXd d = bundle.d_hurst + sigma * design.log_inv_delta() * bundle.d_sigma;
    sandwich(l, d);

    Eigen::VectorXd v = Eigen::VectorXd::Ones(d.rows()).normalized();
    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd w = d * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        estimate = norm;
        v = w / norm;
    }
    return estimate;
}

} // namespace mfcrit
