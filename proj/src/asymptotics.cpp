#include "mfcrit/asymptotics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mfcrit/gaussian_model.hpp"
#include "mfcrit/parallel.hpp"
#include "mfcrit/sampling.hpp"
#include "mfcrit/spectral.hpp"

namespace mfcrit {

std::optional<double> TraceRung::ratio_aa() const {
    if (!aa || !predicted_aa) return std::nullopt;
    return *aa / *predicted_aa;
}

std::optional<double> TraceRung::scaled_ca() const {
    if (!ca) return std::nullopt;
    return *ca / (static_cast<double>(n) * delta);
}

std::optional<double> TraceRung::scaled_da() const {
    if (!da) return std::nullopt;
    return *da / (static_cast<double>(n) * delta * log_inv_delta);
}

WhittleTraces whittle_traces(const MfbmParams& params, const SamplingDesign& design) {
    params.validate();
    const double s = params.sigma;
    const double h = params.hurst;
    const double gamma = s * s * std::pow(design.delta(), 2.0 * h - 1.0);

    // Symbols of C and D on the lambda axis; D loses the explicit log(Delta)
    // term because of the triangular transform.
    auto symbols = [&](double lambda) {
        const double f = spectral::fgn_spectral_density(lambda, h);
        const double df = spectral::fgn_spectral_density_dH(lambda, h);
        const double denom = 1.0 + gamma * f;
        return std::pair{2.0 / s * gamma * f / denom, gamma * df / denom};
    };
    boost::math::quadrature::tanh_sinh<double> rule;
    constexpr double lower = 1e-14;
    constexpr double tol = 1e-10;
    auto integral = [&](auto&& g) { return rule.integrate(g, lower, std::numbers::pi, tol); };

    // Even integrands: (n / 2 pi) int_{-pi}^{pi} = (n / pi) int_0^pi.
    const double scale = static_cast<double>(design.n()) / std::numbers::pi;
    WhittleTraces w;
    w.cc = scale * integral([&](double l) {
        const auto [c, d] = symbols(l);
        return c * c;
    });
    w.cd = scale * integral([&](double l) {
        const auto [c, d] = symbols(l);
        return c * d;
    });
    w.dd = scale * integral([&](double l) {
        const auto [c, d] = symbols(l);
        return d * d;
    });
    return w;
}

TraceReport trace_ladder(const ModelParams& params, const std::vector<SamplingDesign>& ladder,
                         const TraceOptions& options) {
    TraceReport report{params, {}};
    const bool is_mfbm = std::holds_alternative<MfbmParams>(params);
    const double sigma = is_mfbm ? std::get<MfbmParams>(params).sigma : std::get<MfouParams>(params).sigma;
    if (!(sigma > 0.0)) throw std::domain_error("trace ladder needs sigma > 0");
    const spectral::XiConstants xi = spectral::xi_constants(
        sigma, is_mfbm ? std::nullopt : std::optional<double>(std::get<MfouParams>(params).alpha));

    for (const SamplingDesign& design : ladder) {
        if (design.n() > options.max_n) {
            throw std::invalid_argument("trace ladder rung n = " + std::to_string(design.n()) +
                                        " exceeds the dense-matrix cap of " +
                                        std::to_string(options.max_n));
        }
        const double l = design.log_inv_delta();
        const double span = design.span();
        TraceRung rung;
        rung.n = design.n();
        rung.delta = design.delta();
        rung.log_inv_delta = l;
        {
            const CovarianceBundle bundle = build_bundle(params, design);
            const TraceMoments tm = score_trace_moments(bundle, sigma, design);
            rung.cc = tm.cc;
            rung.cd = tm.cd;
            rung.dd = tm.dd;
            rung.aa = tm.aa;
            rung.ca = tm.ca;
            rung.da = tm.da;
        }
        rung.predicted_cc = xi.sigma_sigma * span * l;
        rung.predicted_cd = xi.sigma_hurst * span * l * l;
        rung.predicted_dd = xi.hurst_hurst * span * l * l * l;
        if (xi.alpha_alpha) rung.predicted_aa = *xi.alpha_alpha * span;
        if (is_mfbm && options.whittle) {
            const WhittleTraces w = whittle_traces(std::get<MfbmParams>(params), design);
            rung.whittle_cc = w.cc;
            rung.whittle_cd = w.cd;
            rung.whittle_dd = w.dd;
        }
        report.rungs.push_back(rung);
    }
    return report;
}

bool monotone_toward_one(const std::vector<double>& ratios, int allowed_violations) {
    int violations = 0;
    for (std::size_t k = 1; k < ratios.size(); ++k) {
        if (!(std::abs(ratios[k] - 1.0) < std::abs(ratios[k - 1] - 1.0))) ++violations;
    }
    return violations <= allowed_violations;
}

ModelParams lan_shift(const ModelParams& params, const SamplingDesign& design, const Eigen::VectorXd& h) {
    const double span = design.span();
    const double l = design.log_inv_delta();
    if (!(l > 0.0)) throw std::domain_error("LAN shift needs L > 0");
    const double a = 1.0 / std::sqrt(span * l);
    const double b = 1.0 / (std::sqrt(span) * l * std::sqrt(l));
    auto shift = [&](double sigma, double hurst) {
        const double s = sigma + a * (h(0) + sigma * h(1));
        const double hh = hurst + b * h(1);
        if (!(s > 0.0)) throw std::domain_error("shifted sigma is not positive");
        if (!(hh > 0.0 && hh < 1.0)) throw std::domain_error("shifted Hurst index leaves (0, 1)");
        return std::pair{s, hh};
    };
    if (const auto* m = std::get_if<MfbmParams>(&params)) {
        if (h.size() != 2) throw std::invalid_argument("mfBm local parameter h must have 2 entries");
        const auto [s, hh] = shift(m->sigma, m->hurst);
        return MfbmParams{s, hh};
    }
    const auto& o = std::get<MfouParams>(params);
    if (h.size() != 3) throw std::invalid_argument("mfOU local parameter h must have 3 entries");
    const auto [s, hh] = shift(o.sigma, o.hurst);
    const double alpha = o.alpha + h(2) / std::sqrt(span);
    if (!(alpha > 0.0)) throw std::domain_error("shifted alpha is not positive");
    return MfouParams{s, hh, alpha};
}

LanSummary lan_quadratic_check(const ModelParams& params, const SamplingDesign& design,
                               const Eigen::VectorXd& h, std::size_t reps, std::uint64_t seed,
                               unsigned threads) {
    const ModelParams shifted = lan_shift(params, design, h);
    const bool is_mfbm = std::holds_alternative<MfbmParams>(params);
    const double sigma = is_mfbm ? std::get<MfbmParams>(params).sigma : std::get<MfouParams>(params).sigma;
    const spectral::GammaCrit gamma(
        sigma, is_mfbm ? std::nullopt : std::optional<double>(std::get<MfouParams>(params).alpha));

    const GaussianModel base(build_bundle(params, design));
    const GaussianModel moved(build_bundle(shifted, design));

    LanSummary out;
    out.h = h;
    out.reps = reps;
    out.quadratic_term = -0.5 * h.dot(gamma.matrix() * h);
    out.remainders.assign(reps, 0.0);

    std::optional<MfbmSampler> mfbm;
    std::optional<MfouSampler> mfou;
    if (is_mfbm) {
        mfbm.emplace(std::get<MfbmParams>(params), design);
    } else {
        mfou.emplace(std::get<MfouParams>(params), design);
    }

    parallel_for(reps, threads, [&](std::size_t r) {
        const std::uint64_t sub = replication_seed(seed, 3, r);
        const Eigen::VectorXd x = mfbm ? mfbm->draw(sub) : mfou->draw(sub);
        const NormalizedScores xi = normalized_scores(base.scores(x, sigma, design));
        Eigen::VectorXd central(h.size());
        central(0) = xi.xi_sigma;
        central(1) = xi.xi_hurst;
        if (h.size() > 2) central(2) = *xi.xi_alpha;
        const double ratio = moved.log_likelihood(x) - base.log_likelihood(x);
        out.remainders[r] = ratio - h.dot(central) - out.quadratic_term;
    });

    if (reps > 0) {
        double sum = 0.0, sum_abs = 0.0;
        for (double v : out.remainders) {
            sum += v;
            sum_abs += std::abs(v);
        }
        out.mean_remainder = sum / static_cast<double>(reps);
        out.mean_abs_remainder = sum_abs / static_cast<double>(reps);
        if (reps > 1) {
            double ss = 0.0;
            for (double v : out.remainders) ss += (v - out.mean_remainder) * (v - out.mean_remainder);
            out.sd_remainder = std::sqrt(ss / static_cast<double>(reps - 1));
        }
    }
    return out;
}

} // namespace mfcrit
