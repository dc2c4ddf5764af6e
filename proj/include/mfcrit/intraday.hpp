// One-minute bar ingestion, regular-session filtering, per-day normalization
// and the daily feasible boundary statistic with rolling/subperiod summaries.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mfcrit {

struct Bar {
    std::int64_t time = 0; ///< seconds since 1970-01-01 00:00 on the file's clock
    double price = 0.0;
    std::size_t line = 0;
};

struct IngestOptions {
    std::string timestamp_column = "timestamp";
    std::string price_column = "price";
    char delimiter = ',';
};

struct IngestError {
    std::size_t line = 0;
    std::string message;
};

struct IngestResult {
    std::vector<Bar> bars; ///< file order
    std::vector<IngestError> errors;
};

/// Header row required. Timestamps are ISO-8601 (YYYY-MM-DD[T ]HH:MM[:SS[.f]][Z])
/// or integer epoch seconds, detected per field. Offsets other than Z are
/// rejected rather than silently shifted.
IngestResult ingest(std::istream& in, const IngestOptions& options = {});
IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options = {});

/// Parses one timestamp field; nullopt when neither format matches.
std::optional<std::int64_t> parse_timestamp(const std::string& field);
std::string format_date(std::int64_t time);
std::string format_timestamp(std::int64_t time);

/// Inclusive minute-of-day window; 07:30-13:59 gives 390 bars.
struct SessionWindow {
    int first_minute = 7 * 60 + 30;
    int last_minute = 13 * 60 + 59;

    std::size_t bar_count() const { return static_cast<std::size_t>(last_minute - first_minute + 1); }
};

/// Parses "HH:MM-HH:MM".
SessionWindow parse_session_window(const std::string& text);

struct SessionDay {
    std::string date;
    std::vector<double> prices;
    std::vector<double> returns;
    double scale = 1.0; ///< factor applied to the raw log returns
};

struct DiscardedDay {
    std::string date;
    std::string reason;
};

struct FilterResult {
    std::vector<SessionDay> days; ///< date order; returns are raw log returns
    std::vector<DiscardedDay> discarded;
};

/// Keeps days whose in-window bars sit exactly once on every minute of the
/// window, in strictly increasing order. Out-of-window bars are dropped.
FilterResult session_filter(const std::vector<Bar>& bars, const SessionWindow& window = {});

/// sqrt(delta / mean(r^2)); throws std::domain_error for a zero-variance day.
double normalization_factor(const std::vector<double>& returns, double delta);

/// Rescales the log returns so their second moment about zero equals
/// 1 / (number of returns).
SessionDay normalize_day(SessionDay day);

struct DailyRecord {
    std::string date;
    bool ok = false;
    double statistic = 0.0;
    double sigma_hat = 0.0;
    bool reject10 = false;
    bool reject5 = false;
    int iterations = 0;
    bool at_lower_bound = false;
    std::string note;
};

/// Feasible mfBm statistic per normalized day with n = returns, Delta = 1/n.
std::vector<DailyRecord> daily_statistics(const std::vector<SessionDay>& days, unsigned threads = 0);

struct RollingPoint {
    std::string date;
    double mean_t = 0.0;
    double rej5 = 0.0;
};

/// Trailing windows over successful records, one point per record from the
/// window-th onward.
std::vector<RollingPoint> rolling(const std::vector<DailyRecord>& records, std::size_t window);

struct Period {
    std::string label;
    int first_year = 0;
    int last_year = 0;
};

/// "2008-2009" or "2010".
Period parse_period(const std::string& text);

struct PeriodSummary {
    std::string label;
    std::size_t days = 0;
    std::optional<double> mean_t;
    std::optional<double> median_t;
    std::optional<double> sd_t;
    std::optional<double> rej10;
    std::optional<double> rej5;
    std::optional<double> median_sigma;
};

PeriodSummary summarize_days(const std::vector<DailyRecord>& records, const std::string& label);
std::vector<PeriodSummary> subperiods(const std::vector<DailyRecord>& records,
                                      const std::vector<Period>& periods);

struct PipelineConfig {
    IngestOptions ingest;
    SessionWindow window;
    std::size_t rolling_window = 60;
    std::vector<Period> periods{{"2008-2009", 2008, 2009}, {"2010-2019", 2010, 2019}, {"2020-2021", 2020, 2021}};
    unsigned threads = 0;
};

struct PipelineResult {
    std::vector<IngestError> ingest_errors;
    std::vector<DiscardedDay> discarded;
    std::vector<SessionDay> days;
    std::vector<DailyRecord> records;
    std::vector<RollingPoint> rolling;
    PeriodSummary full;
    std::vector<PeriodSummary> periods;
};

PipelineResult run_pipeline(std::istream& in, const PipelineConfig& config = {});
PipelineResult run_pipeline(const std::filesystem::path& path, const PipelineConfig& config = {});

/// daily.csv, rolling.csv, subperiods.csv, summary.csv, days_log.csv and
/// metadata.json in `dir`. Returns the paths written.
std::vector<std::filesystem::path> write_pipeline_outputs(const PipelineResult& result,
                                                          const PipelineConfig& config,
                                                          const std::filesystem::path& dir);

/// RFC-4180 field quoting.
std::string csv_quote(const std::string& field, char delimiter = ',');

struct PanelSpec {
    std::string first_date = "2008-01-22";
    std::size_t days = 250; ///< weekdays generated
    double sigma = 0.0002;
    double daily_volatility = 0.01;
    double start_price = 100.0;
    std::uint64_t seed = 1;
    SessionWindow window;
    bool epoch_timestamps = false;
    /// Adds pre-market bars to every day.
    bool pre_market = false;
};

/// Synthetic one-minute bars: on each weekday the log returns are
/// daily_volatility times an mfBm increment vector at (sigma, 3/4) with
/// n = 389 and Delta = 1/389.
void write_synthetic_panel(std::ostream& out, const PanelSpec& spec);

} // namespace mfcrit
