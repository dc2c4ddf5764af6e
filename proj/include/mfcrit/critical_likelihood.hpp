// The boundary-restricted mfBm likelihood in the eigenbasis of T(gamma_{3/4}).
//
// With T = Q diag(lambda) Q' the covariance at H = 3/4 is
// Q diag(Delta + sigma^2 Delta^{3/2} lambda) Q', so after projecting the data
// once the likelihood in sigma costs O(n) and the H-score O(n^2).
#pragma once

#include <Eigen/Dense>

#include "mfcrit/covariance.hpp"
#include "mfcrit/gaussian_model.hpp"

namespace mfcrit {

class CriticalMfbm {
public:
    explicit CriticalMfbm(const SamplingDesign& design);

    const SamplingDesign& design() const { return design_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

    /// Q' x.
    Eigen::VectorXd project(const Eigen::VectorXd& x) const;

    double log_likelihood(const Eigen::VectorXd& y, double sigma) const;
    /// d/dsigma of log_likelihood.
    double sigma_score(const Eigen::VectorXd& y, double sigma) const;
    /// Both raw scores at (sigma, 3/4); r_hurst uses the same sigma.
    ScoreVector scores(const Eigen::VectorXd& y, double sigma) const;

private:
    SamplingDesign design_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd basis_;
    // Q' T(d gamma / dH) Q
    Eigen::MatrixXd d_hurst_projected_;
};

} // namespace mfcrit
