#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mfcrit/asymptotics.hpp"
#include "mfcrit/boundary_test.hpp"
#include "mfcrit/covariance.hpp"
#include "mfcrit/experiments.hpp"
#include "mfcrit/gaussian_model.hpp"
#include "mfcrit/intraday.hpp"
#include "mfcrit/parallel.hpp"
#include "mfcrit/sampling.hpp"
#include "mfcrit/spectral.hpp"

namespace mfcrit::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::uint64_t seed = 20260101;
    unsigned threads = 0;
    std::string config;
};

struct ModelOptions {
    std::string model = "mfbm";
    double sigma = 1.0;
    double hurst = 0.75;
    double alpha = 1.0;
};

struct DesignOptions {
    std::size_t n = 0;
    std::optional<double> delta;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Base random seed")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads, 0 uses every core")->capture_default_str();
    sub->add_option("--config", c.config, "Plain-text key = value file; keys are flag names, flags override it");
}

void add_model(CLI::App* sub, ModelOptions& m, bool with_hurst = true) {
    sub->add_option("--model", m.model, "mfbm or mfou")
        ->check(CLI::IsMember({"mfbm", "mfou"}))
        ->capture_default_str();
    sub->add_option("--sigma", m.sigma, "Fractional volatility sigma")->capture_default_str();
    if (with_hurst) sub->add_option("--hurst", m.hurst, "Hurst index H")->capture_default_str();
    sub->add_option("--alpha", m.alpha, "mfOU mean-reversion rate alpha")->capture_default_str();
}

void add_delta(CLI::App* sub, DesignOptions& d) {
    sub->add_option("--delta", d.delta, "Sampling step; default n^{-1/2}");
}

SamplingDesign make_design(std::size_t n, const std::optional<double>& delta) {
    if (n == 0) throw UsageError("--n must be at least 1");
    return delta ? SamplingDesign(n, *delta) : SamplingDesign::sqrt_design(n);
}

ModelParams make_params(const ModelOptions& m) {
    if (m.model == "mfbm") return MfbmParams{m.sigma, m.hurst};
    return MfouParams{m.sigma, m.hurst, m.alpha};
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    for (const auto& s : split_list(text)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(s, &used));
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw UsageError(flag + ": '" + s + "' is not a number");
        }
    }
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text, const std::string& flag) {
    std::vector<std::size_t> out;
    for (double v : parse_doubles(text, flag)) {
        if (!(v >= 1.0) || v != std::floor(v)) throw UsageError(flag + ": sizes must be positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

Eigen::VectorXd read_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file " + path);
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string field = line.substr(0, line.find(','));
        const auto b = field.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const std::string token = field.substr(b, field.find_last_not_of(" \t\r") - b + 1);
        try {
            std::size_t used = 0;
            const double v = std::stod(token, &used);
            if (used != token.size()) throw std::invalid_argument(token);
            values.push_back(v);
        } catch (const std::exception&) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": '" + token + "' is not a number");
        }
        header_allowed = false;
    }
    if (values.empty()) throw std::runtime_error(path + " contains no observations");
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string fmt(double v) { return format_double(v); }

std::string output_dir_default() {
    if (const char* env = std::getenv("MFCRIT_OUTPUT_DIR"); env && *env) return env;
    return "mfcrit_output";
}

// Config entries become "--key=value" tokens placed before the user's flags,
// so the last occurrence (the flag) wins.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    if (args.size() < 2) return args;
    std::string path;
    for (std::size_t i = 2; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::map<std::string, std::string> kv;
    try {
        kv = read_key_value_config(std::filesystem::path(path));
    } catch (const std::invalid_argument& e) {
        throw UsageError(path + ": " + e.what());
    }
    std::vector<std::string> out{args[0], args[1]};
    for (const auto& [k, v] : kv) {
        if (k == "config") continue;
        out.push_back("--" + k + "=" + v);
    }
    out.insert(out.end(), args.begin() + 2, args.end());
    return out;
}

void print_constants(std::ostream& out, double sigma, std::optional<double> alpha, double hurst) {
    const spectral::CriticalConstants c = spectral::critical_constants(sigma, hurst);
    const spectral::GammaCrit g(sigma, alpha);
    out << "c_H = " << fmt(c.c_hurst) << "\n";
    out << "K = " << fmt(c.k) << "\n";
    out << "beta = " << fmt(c.beta) << "\n";
    out << "beta_elementary = " << fmt(spectral::critical_beta_elementary()) << "\n";
    out << "eta = " << fmt(c.eta) << "\n";
    out << "Gamma_sigma_sigma = " << fmt(g(0, 0)) << "\n";
    out << "Gamma_sigma_H = " << fmt(g(0, 1)) << "\n";
    out << "Gamma_H_H = " << fmt(g(1, 1)) << "\n";
    if (alpha) out << "Gamma_alpha_alpha = " << fmt(g(2, 2)) << "\n";
    out << "correlation_sigma_H = " << fmt(g.sigma_hurst_correlation()) << "\n";
    out << "I_eff = " << fmt(c.i_eff) << "\n";
}

void print_result(std::ostream& out, const TestResult& r, double level, Sidedness side) {
    const Decision d = decide(r.statistic, level, side);
    out << "mode = " << to_string(r.mode) << "\n";
    out << "T = " << fmt(r.statistic) << "\n";
    out << "T_reduced = " << fmt(r.statistic_reduced) << "\n";
    out << "sigma_hat = " << fmt(r.sigma_hat) << "\n";
    if (r.mode == TestMode::feasible) out << "sigma_at_lower_bound = " << (r.at_lower_bound ? "true" : "false") << "\n";
    if (r.alpha_hat) out << "alpha_hat = " << fmt(*r.alpha_hat) << "\n";
    out << "xi_sigma = " << fmt(r.xi.xi_sigma) << "\n";
    out << "xi_hurst = " << fmt(r.xi.xi_hurst) << "\n";
    if (r.xi.xi_alpha) out << "xi_alpha = " << fmt(*r.xi.xi_alpha) << "\n";
    out << "p_value = " << fmt(d.p_value) << "\n";
    out << "critical_value = " << fmt(d.critical_value) << "\n";
    out << "reject = " << (d.reject ? "true" : "false") << "\n";
    out << "reject10 = " << (r.reject10 ? "true" : "false") << "\n";
    out << "reject5 = " << (r.reject5 ? "true" : "false") << "\n";
}

void write_trace_csv(std::ostream& out, const TraceReport& rep) {
    auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
    out << "n,delta,L,tr_CC,tr_CD,tr_DD,ratio_CC,ratio_CD,ratio_DD,whittle_CC,whittle_CD,whittle_DD,"
           "tr_AA,ratio_AA,tr_CA_over_nDelta,tr_DA_over_nDeltaL\n";
    for (const auto& r : rep.rungs) {
        out << r.n << ',' << fmt(r.delta) << ',' << fmt(r.log_inv_delta) << ',' << fmt(r.cc) << ',' << fmt(r.cd)
            << ',' << fmt(r.dd) << ',' << fmt(r.ratio_cc()) << ',' << fmt(r.ratio_cd()) << ',' << fmt(r.ratio_dd())
            << ',' << opt(r.whittle_cc) << ',' << opt(r.whittle_cd) << ',' << opt(r.whittle_dd) << ','
            << opt(r.aa) << ',' << opt(r.ratio_aa()) << ',' << opt(r.scaled_ca()) << ',' << opt(r.scaled_da())
            << '\n';
    }
}

} // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Boundary inference at H = 3/4 for mixed fractional models", "mfcrit"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    Common common;
    ModelOptions model;
    DesignOptions design;

    // constants
    auto* constants = app.add_subcommand("constants", "Print K, beta, Gamma and I_eff");
    std::optional<double> c_alpha;
    double c_sigma = 1.0;
    double c_hurst = 0.75;
    constants->add_option("--sigma", c_sigma, "Fractional volatility sigma")->capture_default_str();
    constants->add_option("--alpha", c_alpha, "Adds the mfOU alpha entry");
    constants->add_option("--hurst", c_hurst, "Hurst index for c_H")->capture_default_str();
    add_common(constants, common);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Draw one sample path");
    std::string sim_format = "increments";
    std::string sim_output;
    PanelSpec panel;
    simulate->add_option("--format", sim_format, "increments (one value per line) or intraday (bar CSV)")
        ->check(CLI::IsMember({"increments", "intraday"}))
        ->capture_default_str();
    add_model(simulate, model);
    simulate->add_option("--n", design.n, "Number of observations")->capture_default_str();
    add_delta(simulate, design);
    simulate->add_option("--output", sim_output, "Output file; stdout when omitted");
    simulate->add_option("--days", panel.days, "intraday: weekdays to generate")->capture_default_str();
    simulate->add_option("--first-date", panel.first_date, "intraday: first calendar date")->capture_default_str();
    simulate->add_option("--daily-vol", panel.daily_volatility, "intraday: scale of the daily log return")
        ->capture_default_str();
    simulate->add_flag("--epoch", panel.epoch_timestamps, "intraday: write epoch-second timestamps");
    simulate->add_flag("--pre-market", panel.pre_market, "intraday: add five pre-market bars per day");
    add_common(simulate, common);

    // score
    auto* score = app.add_subcommand("score", "Exact scores of a data file at given parameters");
    std::string input;
    std::optional<double> transform_sigma;
    score->add_option("--input", input, "One observation per line (first column of a CSV)")->required();
    add_model(score, model);
    add_delta(score, design);
    score->add_option("--transform-sigma", transform_sigma, "sigma in the triangular transform; default --sigma");
    add_common(score, common);

    // test
    auto* test = app.add_subcommand("test", "Feasible boundary score test for a data file");
    double level = 0.05;
    bool two_sided = false;
    std::optional<double> oracle_sigma;
    test->add_option("--input", input, "One observation per line (first column of a CSV)")->required();
    test->add_option("--model", model.model, "mfbm or mfou")
        ->check(CLI::IsMember({"mfbm", "mfou"}))
        ->capture_default_str();
    add_delta(test, design);
    test->add_option("--level", level, "Test level")->capture_default_str();
    test->add_flag("--two-sided", two_sided, "Two-sided decision |T| > z_{1-level/2}");
    test->add_option("--oracle-sigma", oracle_sigma, "Use this sigma instead of the restricted estimate");
    test->add_option("--oracle-alpha", model.alpha, "mfOU alpha for the oracle statistic")->capture_default_str();
    add_common(test, common);

    // mc-power
    auto* power = app.add_subcommand("mc-power", "Power curve over a Hurst grid");
    PowerGridConfig pcfg;
    std::string p_grid = "0.75,0.78,0.80,0.85,0.90";
    std::string out_dir = output_dir_default();
    std::string stem;
    power->add_option("--reps", pcfg.reps, "Replications per grid point")->capture_default_str();
    power->add_option("--n", pcfg.n, "Observations")->capture_default_str();
    power->add_option("--delta", pcfg.delta, "Sampling step")->capture_default_str();
    power->add_option("--sigma", pcfg.sigma, "True sigma")->capture_default_str();
    power->add_option("--grid", p_grid, "Comma-separated Hurst indices")->capture_default_str();
    power->add_option("--output-dir", out_dir, "Directory for CSV/JSON output (env MFCRIT_OUTPUT_DIR)")
        ->capture_default_str();
    power->add_option("--stem", stem, "File name stem; default power");
    add_common(power, common);

    // mc-null
    auto* null_seq = app.add_subcommand("mc-null", "Critical-null sequence with Delta = n^{-1/2}");
    NullSequenceConfig ncfg;
    std::string n_grid = "64,128,256,512";
    null_seq->add_option("--reps", ncfg.reps, "Replications per n")->capture_default_str();
    null_seq->add_option("--n-grid", n_grid, "Comma-separated sample sizes")->capture_default_str();
    null_seq->add_option("--sigma", ncfg.sigma, "True sigma")->capture_default_str();
    null_seq->add_option("--output-dir", out_dir, "Directory for CSV/JSON output (env MFCRIT_OUTPUT_DIR)")
        ->capture_default_str();
    null_seq->add_option("--stem", stem, "File name stem; default null");
    add_common(null_seq, common);

    // traces
    auto* traces = app.add_subcommand("traces", "Dense score-matrix traces along a design ladder");
    std::string ladder = "256,1024,4096";
    std::size_t max_n = kDefaultTraceCap;
    bool no_whittle = false;
    std::string trace_output;
    add_model(traces, model);
    traces->add_option("--ladder", ladder, "Comma-separated n; Delta = n^{-1/2}")->capture_default_str();
    traces->add_option("--max-n", max_n, "Refuse dense work beyond this n")->capture_default_str();
    traces->add_flag("--no-whittle", no_whittle, "Skip the frequency-domain cross-check");
    traces->add_option("--output", trace_output, "CSV file; stdout when omitted");
    add_common(traces, common);

    // lan-check
    auto* lan = app.add_subcommand("lan-check", "Simulated LAN remainder at a local shift");
    std::string h_text = "1,0";
    std::size_t lan_reps = 500;
    std::size_t lan_n = 128;
    add_model(lan, model);
    lan->add_option("--n", lan_n, "Observations")->capture_default_str();
    add_delta(lan, design);
    lan->add_option("--local-h", h_text, "Local parameter, 2 entries (mfBm) or 3 (mfOU)")->capture_default_str();
    lan->add_option("--reps", lan_reps, "Replications")->capture_default_str();
    add_common(lan, common);

    // intraday
    auto* intraday = app.add_subcommand("intraday", "Daily boundary statistic on one-minute bars");
    PipelineConfig icfg;
    std::string window = "07:30-13:59";
    std::string periods = "2008-2009,2010-2019,2020-2021";
    char delimiter = ',';
    intraday->add_option("--input", input, "Bar CSV with a header row")->required();
    intraday->add_option("--output-dir", out_dir, "Directory for the output tables (env MFCRIT_OUTPUT_DIR)")
        ->capture_default_str();
    intraday->add_option("--timestamp-column", icfg.ingest.timestamp_column, "Timestamp column name")
        ->capture_default_str();
    intraday->add_option("--price-column", icfg.ingest.price_column, "Price column name")->capture_default_str();
    intraday->add_option("--delimiter", delimiter, "Field delimiter")->capture_default_str();
    intraday->add_option("--window", window, "Session window HH:MM-HH:MM, inclusive")->capture_default_str();
    intraday->add_option("--rolling-window", icfg.rolling_window, "Trailing window in days")->capture_default_str();
    intraday->add_option("--periods", periods, "Comma-separated YYYY or YYYY-YYYY subperiods")
        ->capture_default_str();
    add_common(intraday, common);

    std::vector<std::string> args(argv, argv + argc);
    try {
        args = expand_config(args);
        std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        app.exit(e, out, err);
        return 1;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        const unsigned threads = common.threads == 0 ? default_threads() : common.threads;

        if (constants->parsed()) {
            print_constants(out, c_sigma, c_alpha, c_hurst);
        } else if (simulate->parsed()) {
            std::ofstream file;
            std::ostream* dest = &out;
            if (!sim_output.empty()) {
                file.open(sim_output, std::ios::binary);
                if (!file) throw std::runtime_error("cannot open output file " + sim_output);
                dest = &file;
            }
            if (sim_format == "intraday") {
                panel.sigma = model.sigma;
                panel.seed = common.seed;
                write_synthetic_panel(*dest, panel);
            } else {
                const SamplingDesign d = make_design(design.n, design.delta);
                const Eigen::VectorXd x =
                    model.model == "mfbm"
                        ? sample_mfbm_increments({model.sigma, model.hurst}, d, common.seed)
                        : sample_mfou_path({model.sigma, model.hurst, model.alpha}, d, common.seed);
                *dest << "x\n";
                for (Eigen::Index i = 0; i < x.size(); ++i) *dest << fmt(x(i)) << "\n";
            }
        } else if (score->parsed()) {
            const Eigen::VectorXd x = read_series(input);
            const SamplingDesign d = make_design(static_cast<std::size_t>(x.size()), design.delta);
            const GaussianModel gm(build_bundle(make_params(model), d));
            const ScoreVector sv = gm.scores(x, transform_sigma.value_or(model.sigma), d);
            out << "n = " << sv.n << "\ndelta = " << fmt(sv.delta) << "\nL = " << fmt(sv.log_inv_delta) << "\n";
            out << "log_likelihood = " << fmt(gm.log_likelihood(x)) << "\n";
            out << "s_sigma = " << fmt(sv.s_sigma) << "\ns_hurst = " << fmt(sv.s_hurst) << "\n";
            if (sv.s_alpha) out << "s_alpha = " << fmt(*sv.s_alpha) << "\n";
            out << "r_hurst = " << fmt(sv.r_hurst) << "\n";
            if (sv.log_inv_delta > 0.0) {
                const NormalizedScores xi = normalized_scores(sv);
                out << "xi_sigma = " << fmt(xi.xi_sigma) << "\nxi_hurst = " << fmt(xi.xi_hurst) << "\n";
                if (xi.xi_alpha) out << "xi_alpha = " << fmt(*xi.xi_alpha) << "\n";
            }
        } else if (test->parsed()) {
            const Eigen::VectorXd x = read_series(input);
            const SamplingDesign d = make_design(static_cast<std::size_t>(x.size()), design.delta);
            const Sidedness side = two_sided ? Sidedness::two_sided : Sidedness::one_sided;
            TestResult r;
            if (model.model == "mfbm") {
                const CriticalMfbm cm(d);
                r = oracle_sigma ? oracle_statistic_mfbm(cm, x, *oracle_sigma) : feasible_statistic_mfbm(cm, x);
            } else {
                r = oracle_sigma ? oracle_statistic_mfou(x, d, *oracle_sigma, model.alpha)
                                 : feasible_statistic_mfou(x, d);
            }
            print_result(out, r, level, side);
        } else if (power->parsed()) {
            pcfg.hurst_grid = parse_doubles(p_grid, "--grid");
            pcfg.seed = common.seed;
            pcfg.threads = threads;
            const auto results = run_power_grid(pcfg);
            emit(results, out_dir, stem.empty() ? "power" : stem);
            write_summary_csv(out, results);
        } else if (null_seq->parsed()) {
            ncfg.n_grid = parse_sizes(n_grid, "--n-grid");
            ncfg.seed = common.seed;
            ncfg.threads = threads;
            const auto results = run_null_sequence(ncfg);
            emit(results, out_dir, stem.empty() ? "null" : stem);
            write_summary_csv(out, results);
        } else if (traces->parsed()) {
            std::vector<SamplingDesign> rungs;
            for (std::size_t n : parse_sizes(ladder, "--ladder")) rungs.push_back(SamplingDesign::sqrt_design(n));
            TraceOptions opts;
            opts.max_n = max_n;
            opts.whittle = !no_whittle;
            const TraceReport rep = trace_ladder(make_params(model), rungs, opts);
            if (trace_output.empty()) {
                write_trace_csv(out, rep);
            } else {
                std::ofstream file(trace_output, std::ios::binary);
                if (!file) throw std::runtime_error("cannot open output file " + trace_output);
                write_trace_csv(file, rep);
            }
        } else if (lan->parsed()) {
            const std::vector<double> hv = parse_doubles(h_text, "--local-h");
            const Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(hv.data(), static_cast<Eigen::Index>(hv.size()));
            const std::size_t want = model.model == "mfbm" ? 2 : 3;
            if (hv.size() != want) throw UsageError("--local-h needs " + std::to_string(want) + " entries for " + model.model);
            const SamplingDesign d = make_design(lan_n, design.delta);
            const LanSummary s = lan_quadratic_check(make_params(model), d, h, lan_reps, common.seed, threads);
            out << "n = " << d.n() << "\ndelta = " << fmt(d.delta()) << "\nreps = " << s.reps << "\n";
            out << "mean_remainder = " << fmt(s.mean_remainder) << "\n";
            out << "sd_remainder = " << fmt(s.sd_remainder) << "\n";
            out << "mean_abs_remainder = " << fmt(s.mean_abs_remainder) << "\n";
        } else if (intraday->parsed()) {
            icfg.window = parse_session_window(window);
            icfg.ingest.delimiter = delimiter;
            icfg.periods.clear();
            for (const auto& p : split_list(periods)) icfg.periods.push_back(parse_period(p));
            icfg.threads = threads;
            const PipelineResult res = run_pipeline(std::filesystem::path(input), icfg);
            write_pipeline_outputs(res, icfg, out_dir);
            for (const auto& e : res.ingest_errors) err << input << ":" << e.line << ": " << e.message << "\n";
            out << "retained_days = " << res.days.size() << "\ndiscarded_days = " << res.discarded.size() << "\n";
            const PeriodSummary& f = res.full;
            auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string("NA"); };
            out << "trading_days = " << f.days << "\nmean_T = " << opt(f.mean_t) << "\nmedian_T = " << opt(f.median_t)
                << "\nsd_T = " << opt(f.sd_t) << "\nrej10 = " << opt(f.rej10) << "\nrej5 = " << opt(f.rej5)
                << "\nmedian_sigma = " << opt(f.median_sigma) << "\n";
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace mfcrit::cli
