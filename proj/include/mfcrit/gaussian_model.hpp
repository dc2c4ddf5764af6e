// Exact zero-mean Gaussian likelihood, scores and score-matrix traces.
#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "mfcrit/covariance.hpp"

namespace mfcrit {

struct ScoreVector {
    double s_sigma = 0.0;
    double s_hurst = 0.0;
    std::optional<double> s_alpha;
    /// s_hurst + sigma L s_sigma, with sigma the transform argument.
    double r_hurst = 0.0;
    double transform_sigma = 0.0;

    std::size_t n = 0;
    double delta = 0.0;
    double log_inv_delta = 0.0;
};

struct NormalizedScores {
    double xi_sigma = 0.0;
    double xi_hurst = 0.0;
    std::optional<double> xi_alpha;
};

/// Cholesky of Sigma plus the deterministic trace terms tr(Sigma^{-1} dSigma_i),
/// so that each extra observation vector costs O(n^2).
class GaussianModel {
public:
    explicit GaussianModel(CovarianceBundle bundle);

    const CovarianceBundle& bundle() const { return bundle_; }
    Eigen::Index dim() const { return bundle_.dim(); }
    double log_determinant() const { return log_det_; }

    double log_likelihood(const Eigen::VectorXd& x) const;

    /// Raw scores 0.5 (u' dSigma_i u - tr(Sigma^{-1} dSigma_i)) with u = Sigma^{-1} x.
    /// `sigma` is the value used in the triangular transform.
    ScoreVector scores(const Eigen::VectorXd& x, double sigma, const SamplingDesign& design) const;

    /// Scores without the design echo or transform; index order sigma, H, alpha.
    Eigen::VectorXd raw_scores(const Eigen::VectorXd& x) const;

private:
    void check_dim(const Eigen::VectorXd& x) const;

    CovarianceBundle bundle_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double log_det_ = 0.0;
    Eigen::VectorXd traces_;
};

double log_likelihood(const CovarianceBundle& bundle, const Eigen::VectorXd& x);

ScoreVector score_vector(const CovarianceBundle& bundle, const Eigen::VectorXd& x, double sigma,
                         const SamplingDesign& design);

/// r_hurst recomputed from raw scores; used by callers that change sigma after
/// the fact (oracle vs plug-in).
ScoreVector with_transform(ScoreVector sv, double sigma);

/// Division by the critical rates sqrt(n Delta L), sqrt(n Delta) L^{3/2},
/// sqrt(n Delta). Throws std::domain_error when L <= 0.
NormalizedScores normalized_scores(const ScoreVector& sv);

/// Lower-triangular map (s_sigma, s_H, s_alpha) -> (s_sigma, r_H, s_alpha).
Eigen::MatrixXd triangular_transform(double sigma, double log_inv_delta, int parameter_count);

/// diag(sqrt(n Delta L), sqrt(n Delta) L^{3/2}, sqrt(n Delta)) for the given count.
Eigen::VectorXd critical_rates(const SamplingDesign& design, int parameter_count);

/// Exact traces of the normalized score matrices. With M_i the sandwiched
/// derivative L^{-1} dSigma_i L^{-T}: C = M_sigma, D = M_H + sigma L M_sigma,
/// A = M_alpha.
struct TraceMoments {
    /// tr(M_i M_j) in parameter order (sigma, H, alpha).
    Eigen::MatrixXd raw;
    double cc = 0.0;
    double cd = 0.0;
    double dd = 0.0;
    std::optional<double> aa;
    std::optional<double> ca;
    std::optional<double> da;
    /// tr(C M_H), kept for the expansion identity tr(CD) = tr(C M_H) + sigma L tr(C^2).
    double c_mh = 0.0;
};

TraceMoments score_trace_moments(const CovarianceBundle& bundle, double sigma,
                                 const SamplingDesign& design);

/// Largest |eigenvalue| of the symmetric operator D by power iteration.
/// Diagnostic only.
double operator_norm_d(const CovarianceBundle& bundle, double sigma, const SamplingDesign& design,
                       int iterations = 200);

} // namespace mfcrit
