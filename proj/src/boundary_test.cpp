#include "mfcrit/boundary_test.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/toms748_solve.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "mfcrit/error.hpp"
#include "mfcrit/normal.hpp"
#include "mfcrit/spectral.hpp"

namespace mfcrit {

namespace {

constexpr double kHurst = spectral::kCriticalHurst;
constexpr double kLogSigmaTolerance = 1e-10;
constexpr int kMaxBracketSteps = 200;

void require_level(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::domain_error("test level must lie in (0, 1)");
    }
}

TestResult finish(TestResult r) {
    r.p_value = normal_upper_tail(r.statistic);
    r.reject10 = decide(r.statistic, 0.10).reject;
    r.reject5 = decide(r.statistic, 0.05).reject;
    return r;
}

double prefactor(double sigma) { return 8.0 / (std::sqrt(3.0) * sigma * sigma); }

void check_forms(const TestResult& r) {
    const double gap = std::abs(r.statistic - r.statistic_reduced);
    if (!(gap <= kFormAgreement)) {
        std::ostringstream msg;
        msg << "restricted optimizer did not reach a stationary point: full and reduced statistic "
               "differ by "
            << gap << " (sigma_hat = " << r.sigma_hat << ")";
        throw NumericalError(msg.str());
    }
}

} // namespace

std::string to_string(TestMode mode) { return mode == TestMode::oracle ? "oracle" : "feasible"; }

Decision decide(double statistic, double level, Sidedness sidedness) {
    require_level(level);
    Decision d;
    if (sidedness == Sidedness::one_sided) {
        d.critical_value = normal_quantile(1.0 - level);
        d.reject = statistic > d.critical_value;
        d.p_value = normal_upper_tail(statistic);
    } else {
        d.critical_value = normal_quantile(1.0 - 0.5 * level);
        d.reject = std::abs(statistic) > d.critical_value;
        d.p_value = std::min(1.0, 2.0 * normal_upper_tail(std::abs(statistic)));
    }
    return d;
}

double efficient_statistic(const NormalizedScores& xi, double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("sigma must be positive");
    return prefactor(sigma) * (xi.xi_hurst - 0.5 * sigma * xi.xi_sigma);
}

double sigma_lower_bound(const CriticalMfbm& model) {
    const double delta = model.design().delta();
    return std::sqrt(kLowerBoundShare / (std::sqrt(delta) * model.eigenvalues().maxCoeff()));
}

SigmaEstimate restricted_mle_sigma(const CriticalMfbm& model, const Eigen::VectorXd& y) {
    const SamplingDesign& design = model.design();
    if (design.n() < 2) throw std::domain_error("restricted MLE needs n >= 2");
    const double delta = design.delta();
    const double d15 = std::pow(delta, 1.5);

    // Q is orthogonal, so y carries the same second moment as the raw data.
    const double mean_square = y.squaredNorm() / static_cast<double>(y.size());
    if (!(mean_square > 0.0)) throw BracketError("data have zero second moment");
    const double guess2 = std::max((mean_square - delta) / d15, 1e-6);

    SigmaEstimate est;
    est.initial_guess = std::sqrt(guess2);

    // Derivative of the likelihood in t = log sigma.
    int evaluations = 0;
    auto g = [&](double t) {
        ++evaluations;
        const double s = std::exp(t);
        return s * model.sigma_score(y, s);
    };
    const double lower = sigma_lower_bound(model);
    const double t_min = std::log(lower);

    double a = std::max(std::log(est.initial_guess), t_min);
    double fa = g(a);
    if (fa == 0.0) {
        est.sigma = std::exp(a);
        est.iterations = evaluations;
        return est;
    }
    double b = a;
    double fb = fa;
    const double step = std::log(2.0);
    for (int i = 0;; ++i) {
        if (i == kMaxBracketSteps) {
            throw BracketError("no sign change of the sigma-score in the geometric search");
        }
        if (fa > 0.0) {
            b = a + step;
        } else {
            if (a <= t_min) {
                est.sigma = lower;
                est.at_lower_bound = true;
                est.iterations = evaluations;
                return est;
            }
            b = std::max(a - step, t_min);
        }
        fb = g(b);
        if ((fa > 0.0) != (fb > 0.0) || fb == 0.0) break;
        a = b;
        fa = fb;
    }
    if (fb == 0.0) {
        est.sigma = std::exp(b);
        est.iterations = evaluations;
        return est;
    }
    if (a > b) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    std::uintmax_t max_iter = 200;
    auto tol = [](double lo, double hi) { return std::abs(hi - lo) <= kLogSigmaTolerance; };
    const auto root = boost::math::tools::toms748_solve(g, a, b, fa, fb, tol, max_iter);
    est.sigma = std::exp(0.5 * (root.first + root.second));
    est.iterations = evaluations;
    return est;
}

double restricted_mle_sigma(const Eigen::VectorXd& x, const SamplingDesign& design) {
    const CriticalMfbm model(design);
    return restricted_mle_sigma(model, model.project(x)).sigma;
}

TestResult feasible_statistic_mfbm(const CriticalMfbm& model, const Eigen::VectorXd& x) {
    const Eigen::VectorXd y = model.project(x);
    const SigmaEstimate est = restricted_mle_sigma(model, y);
    TestResult r;
    r.mode = TestMode::feasible;
    r.sigma_hat = est.sigma;
    r.iterations = est.iterations;
    r.at_lower_bound = est.at_lower_bound;
    r.scores = model.scores(y, est.sigma);
    r.xi = normalized_scores(r.scores);
    r.statistic = efficient_statistic(r.xi, est.sigma);
    const SamplingDesign& design = model.design();
    r.statistic_reduced = prefactor(est.sigma) * r.scores.s_hurst /
                          (std::sqrt(design.span()) * std::pow(design.log_inv_delta(), 1.5));
    if (!r.at_lower_bound) check_forms(r);
    return finish(r);
}

TestResult feasible_statistic_mfbm(const Eigen::VectorXd& x, const SamplingDesign& design) {
    return feasible_statistic_mfbm(CriticalMfbm(design), x);
}

TestResult oracle_statistic_mfbm(const CriticalMfbm& model, const Eigen::VectorXd& x, double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("sigma must be positive");
    TestResult r;
    r.mode = TestMode::oracle;
    r.sigma_hat = sigma;
    r.scores = model.scores(model.project(x), sigma);
    r.xi = normalized_scores(r.scores);
    r.statistic = efficient_statistic(r.xi, sigma);
    r.statistic_reduced = r.statistic;
    return finish(r);
}

double statistic_sigma_derivative(const CriticalMfbm& model, const Eigen::VectorXd& x, double sigma) {
    const Eigen::VectorXd y = model.project(x);
    auto t_at = [&](double s) { return efficient_statistic(normalized_scores(model.scores(y, s)), s); };
    const double h = 1e-5 * sigma;
    return (t_at(sigma + h) - t_at(sigma - h)) / (2.0 * h);
}

namespace {

struct MfouObjective {
    const Eigen::VectorXd* x;
    const SamplingDesign* design;
};

double mfou_negative_loglik(const gsl_vector* v, void* params) {
    const auto* obj = static_cast<const MfouObjective*>(params);
    const double ls = gsl_vector_get(v, 0);
    const double la = gsl_vector_get(v, 1);
    if (std::abs(ls) > 30.0 || std::abs(la) > 30.0) return 1e300;
    const MfouParams p{std::exp(ls), kHurst, std::exp(la)};
    Eigen::LLT<Eigen::MatrixXd> llt(mfou_covariance(p, *obj->design));
    if (llt.info() != Eigen::Success) return 1e300;
    const Eigen::VectorXd z = llt.matrixL().solve(*obj->x);
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double n = static_cast<double>(z.size());
    return 0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det + z.squaredNorm());
}

} // namespace

MfouEstimate restricted_mle_mfou(const Eigen::VectorXd& x, const SamplingDesign& design) {
    const auto n = design.n();
    if (n < 3) throw std::domain_error("mfOU restricted MLE needs n >= 3");
    if (static_cast<std::size_t>(x.size()) != n) {
        throw std::invalid_argument("observation vector length does not match the design");
    }
    const double delta = design.delta();

    // Start from the OU moment fit: lag-1 autocorrelation for alpha and the
    // stationary variance 1 / (2 alpha) + sigma^2 Gamma(5/2) alpha^{-3/2} / 2.
    const double var = x.squaredNorm() / static_cast<double>(n);
    const double lag1 = x.head(n - 1).dot(x.tail(n - 1)) / static_cast<double>(n - 1);
    const double rho = std::clamp(lag1 / var, 1e-3, 1.0 - 1e-6);
    const double alpha0 = std::max(-std::log(rho) / delta, 1e-3);
    const double excess = var - 0.5 / alpha0;
    const double sigma0 =
        excess > 0.0 ? std::sqrt(2.0 * excess * std::pow(alpha0, 1.5) / std::tgamma(2.5)) : 0.5;

    MfouObjective obj{&x, &design};
    gsl_multimin_function f;
    f.n = 2;
    f.f = &mfou_negative_loglik;
    f.params = &obj;

    gsl_vector* start = gsl_vector_alloc(2);
    gsl_vector* steps = gsl_vector_alloc(2);
    gsl_vector_set(start, 0, std::log(sigma0));
    gsl_vector_set(start, 1, std::log(alpha0));
    gsl_vector_set_all(steps, 0.5);
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
    gsl_multimin_fminimizer_set(s, &f, start, steps);

    int status = GSL_CONTINUE;
    int iter = 0;
    constexpr int kMaxIter = 2000;
    while (status == GSL_CONTINUE && iter < kMaxIter) {
        ++iter;
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-6);
    }
    const double ls = gsl_vector_get(s->x, 0);
    const double la = gsl_vector_get(s->x, 1);
    const double best = s->fval;
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(start);
    gsl_vector_free(steps);

    MfouEstimate est;
    est.sigma = std::exp(ls);
    est.alpha = std::exp(la);
    est.log_likelihood = -best;
    est.simplex_iterations = iter;
    if (status != GSL_SUCCESS) {
        std::ostringstream msg;
        msg << "mfOU simplex search did not converge after " << iter
            << " iterations; best iterate sigma = " << est.sigma << ", alpha = " << est.alpha;
        throw NumericalError(msg.str());
    }

    // Fisher scoring on (sigma, alpha) with H held at 3/4.
    for (int k = 0; k < 20; ++k) {
        const MfouParams p{est.sigma, kHurst, est.alpha};
        const CovarianceBundle bundle = mfou_bundle(p, design);
        const GaussianModel model(bundle);
        const Eigen::VectorXd s_all = model.raw_scores(x);
        const Eigen::Vector2d score(s_all(0), s_all(2));
        const TraceMoments tm = score_trace_moments(bundle, est.sigma, design);
        Eigen::Matrix2d info;
        info << tm.raw(0, 0), tm.raw(0, 2), tm.raw(2, 0), tm.raw(2, 2);
        info *= 0.5;
        const Eigen::Vector2d step = info.ldlt().solve(score);
        est.scoring_iterations = k + 1;
        double shrink = 1.0;
        while (est.sigma + shrink * step(0) <= 0.0 || est.alpha + shrink * step(1) <= 0.0) {
            shrink *= 0.5;
        }
        est.sigma += shrink * step(0);
        est.alpha += shrink * step(1);
        if (std::abs(step(0)) <= 1e-12 * est.sigma && std::abs(step(1)) <= 1e-12 * est.alpha) break;
    }
    est.log_likelihood = GaussianModel(mfou_bundle({est.sigma, kHurst, est.alpha}, design)).log_likelihood(x);
    return est;
}

namespace {

TestResult mfou_statistic(const Eigen::VectorXd& x, const SamplingDesign& design, double sigma,
                          double alpha, TestMode mode) {
    const MfouParams p{sigma, kHurst, alpha};
    const GaussianModel model(mfou_bundle(p, design));
    TestResult r;
    r.mode = mode;
    r.sigma_hat = sigma;
    r.alpha_hat = alpha;
    r.scores = model.scores(x, sigma, design);
    r.xi = normalized_scores(r.scores);
    r.statistic = efficient_statistic(r.xi, sigma);
    r.statistic_reduced = prefactor(sigma) * r.scores.s_hurst /
                          (std::sqrt(design.span()) * std::pow(design.log_inv_delta(), 1.5));
    return r;
}

} // namespace

TestResult feasible_statistic_mfou(const Eigen::VectorXd& x, const SamplingDesign& design) {
    const MfouEstimate est = restricted_mle_mfou(x, design);
    TestResult r = mfou_statistic(x, design, est.sigma, est.alpha, TestMode::feasible);
    r.iterations = est.simplex_iterations + est.scoring_iterations;
    check_forms(r);
    return finish(r);
}

TestResult oracle_statistic_mfou(const Eigen::VectorXd& x, const SamplingDesign& design,
                                 double sigma, double alpha) {
    if (!(sigma > 0.0)) throw std::domain_error("sigma must be positive");
    TestResult r = mfou_statistic(x, design, sigma, alpha, TestMode::oracle);
    r.statistic_reduced = r.statistic;
    return finish(r);
}

} // namespace mfcrit
