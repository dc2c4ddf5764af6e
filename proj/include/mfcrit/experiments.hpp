// Monte Carlo harness for the power grid and the critical-null sequence.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mfcrit {

struct ReplicationRecord {
    std::size_t rep = 0;
    std::uint64_t seed = 0; ///< sample seed; MfbmSampler::draw(seed) reproduces the data
    bool ok = false;
    double statistic = 0.0;
    double sigma_hat = 0.0;
    bool reject10 = false;
    bool reject5 = false;
    std::string error;
    bool at_lower_bound = false; ///< sigma_hat is the restricted MLE's lower bound
};

struct Summary {
    std::size_t count = 0;    ///< successful replications
    std::size_t failures = 0;
    std::size_t at_lower_bound = 0; ///< successful replications with sigma_hat at the bound
    std::optional<double> mean_t;
    std::optional<double> median_t;
    std::optional<double> sd_t; ///< divisor count - 1; absent when count < 2
    std::optional<double> rej10;
    std::optional<double> rej5;
    std::optional<double> mean_sigma;
    std::optional<double> sd_sigma;
};

/// Pure function of `values`: mean, median, sd with divisor n - 1.
struct Moments {
    std::optional<double> mean;
    std::optional<double> median;
    std::optional<double> sd;
};
Moments moments(std::vector<double> values);

Summary summarize(const std::vector<ReplicationRecord>& records);

struct ExperimentResult {
    std::string key;      ///< "H" or "n"
    double grid_value = 0.0;
    std::size_t n = 0;
    double delta = 0.0;
    double sigma = 0.0;
    double hurst = 0.0;
    std::uint64_t seed = 0;   ///< base seed of the run
    std::uint64_t stream = 0; ///< grid-point stream feeding replication_seed
    std::vector<ReplicationRecord> records;
    Summary summary;
};

struct PowerGridConfig {
    std::vector<double> hurst_grid{0.75, 0.78, 0.80, 0.85, 0.90};
    std::size_t n = 160;
    double delta = 0.01;
    double sigma = 3.0;
    std::size_t reps = 1000;
    std::uint64_t seed = 20260101;
    unsigned threads = 0;
};

struct NullSequenceConfig {
    std::vector<std::size_t> n_grid{64, 128, 256, 512};
    double sigma = 3.0;
    std::size_t reps = 1000;
    std::uint64_t seed = 20260101;
    unsigned threads = 0;
};

std::vector<ExperimentResult> run_power_grid(const PowerGridConfig& config);
std::vector<ExperimentResult> run_null_sequence(const NullSequenceConfig& config);

/// Seed of replication `rep` at grid point `stream`.
std::uint64_t experiment_sample_seed(std::uint64_t seed, std::uint64_t stream, std::size_t rep);

/// Header: <key>,mean_T,sd_T,rej10,rej5,mean_sigma,sd_sigma. Missing values
/// are empty fields; numbers use 17 significant digits.
void write_summary_csv(std::ostream& out, const std::vector<ExperimentResult>& results);

struct SummaryRow {
    double grid_value = 0.0;
    Summary summary; ///< count/failures/median are not part of the CSV
};
std::vector<SummaryRow> read_summary_csv(std::istream& in);

/// Full records, summaries and seeds.
std::string to_json(const std::vector<ExperimentResult>& results);

/// Writes <stem>_summary.csv, <stem>.json and the plot-data files
/// <stem>_rejection.csv (grid, rej10, rej5) and <stem>_sd.csv (grid, sd_T).
/// Returns the paths written.
std::vector<std::filesystem::path> emit(const std::vector<ExperimentResult>& results,
                                        const std::filesystem::path& dir, const std::string& stem);

/// Plain-text key = value configuration; '#' starts a comment.
std::map<std::string, std::string> read_key_value_config(std::istream& in);
std::map<std::string, std::string> read_key_value_config(const std::filesystem::path& path);

/// Formats with 17 significant digits.
std::string format_double(double value);

} // namespace mfcrit
