// Dense trace ladders against the critical leading terms, and a simulation
// check of the LAN quadratic expansion.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mfcrit/covariance.hpp"

namespace mfcrit {

struct TraceRung {
    std::size_t n = 0;
    double delta = 0.0;
    double log_inv_delta = 0.0;

    double cc = 0.0;
    double cd = 0.0;
    double dd = 0.0;
    std::optional<double> aa;
    std::optional<double> ca;
    std::optional<double> da;

    /// Xi n Delta L^k leading terms.
    double predicted_cc = 0.0;
    double predicted_cd = 0.0;
    double predicted_dd = 0.0;
    std::optional<double> predicted_aa;

    double ratio_cc() const { return cc / predicted_cc; }
    double ratio_cd() const { return cd / predicted_cd; }
    double ratio_dd() const { return dd / predicted_dd; }
    std::optional<double> ratio_aa() const;

    /// tr(CA) / (n Delta) and tr(DA) / (n Delta L).
    std::optional<double> scaled_ca() const;
    std::optional<double> scaled_da() const;

    /// Frequency-domain value (n Delta / 2 pi) int psi_i psi_j du with the
    /// exact fGn symbol (mfBm only).
    std::optional<double> whittle_cc;
    std::optional<double> whittle_cd;
    std::optional<double> whittle_dd;
};

struct TraceReport {
    ModelParams params;
    std::vector<TraceRung> rungs;
};

struct TraceOptions {
    /// Dense n x n work beyond this size is refused.
    std::size_t max_n = 4096;
    bool whittle = true;
};

/// Largest n the trace routines accept by default.
inline constexpr std::size_t kDefaultTraceCap = 4096;

TraceReport trace_ladder(const ModelParams& params, const std::vector<SamplingDesign>& ladder,
                         const TraceOptions& options = {});

/// Whittle approximations of tr(C^2), tr(CD), tr(D^2) for mfBm.
struct WhittleTraces {
    double cc = 0.0;
    double cd = 0.0;
    double dd = 0.0;
};
WhittleTraces whittle_traces(const MfbmParams& params, const SamplingDesign& design);

/// True when |r_k - 1| is strictly decreasing along the sequence, tolerating
/// `allowed_violations` non-decreasing steps.
bool monotone_toward_one(const std::vector<double>& ratios, int allowed_violations = 0);

struct LanSummary {
    Eigen::VectorXd h;
    std::size_t reps = 0;
    double mean_remainder = 0.0;
    double sd_remainder = 0.0;
    double mean_abs_remainder = 0.0;
    /// Deterministic part -h' Gamma h / 2 of the prediction.
    double quadratic_term = 0.0;
    std::vector<double> remainders;
};

/// Simulates at the given parameters and compares l(theta + phi h) - l(theta)
/// with h' Xi_n - h' Gamma h / 2. The local shift is
///   sigma += (h1 + sigma h2) / sqrt(n Delta L),
///   H     += h2 / (sqrt(n Delta) L^{3/2}),
///   alpha += h3 / sqrt(n Delta).
LanSummary lan_quadratic_check(const ModelParams& params, const SamplingDesign& design,
                               const Eigen::VectorXd& h, std::size_t reps, std::uint64_t seed,
                               unsigned threads = 0);

/// The shifted parameter used by lan_quadratic_check. Throws std::domain_error
/// when it leaves the admissible region.
ModelParams lan_shift(const ModelParams& params, const SamplingDesign& design, const Eigen::VectorXd& h);

} // namespace mfcrit
