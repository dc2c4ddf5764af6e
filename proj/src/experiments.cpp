#include "mfcrit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "mfcrit/boundary_test.hpp"
#include "mfcrit/critical_likelihood.hpp"
#include "mfcrit/parallel.hpp"
#include "mfcrit/sampling.hpp"

namespace mfcrit {

namespace {

constexpr std::uint64_t kPowerStream = 100;
constexpr std::uint64_t kNullStream = 200;

std::vector<ReplicationRecord> replicate(const MfbmParams& params, const CriticalMfbm& model,
                                         std::size_t reps, std::uint64_t seed, std::uint64_t stream,
                                         unsigned threads) {
    const MfbmSampler sampler(params, model.design());
    std::vector<ReplicationRecord> records(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
        ReplicationRecord& rec = records[r];
        rec.rep = r;
        rec.seed = experiment_sample_seed(seed, stream, r);
        try {
            const TestResult t = feasible_statistic_mfbm(model, sampler.draw(rec.seed));
            rec.ok = true;
            rec.statistic = t.statistic;
            rec.sigma_hat = t.sigma_hat;
            rec.reject10 = t.reject10;
            rec.reject5 = t.reject5;
            rec.at_lower_bound = t.at_lower_bound;
        } catch (const std::exception& e) {
            rec.ok = false;
            rec.error = e.what();
        }
    });
    return records;
}

std::string csv_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::optional<double> parse_field(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad numeric field '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
    return out;
}

} // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::uint64_t experiment_sample_seed(std::uint64_t seed, std::uint64_t stream, std::size_t rep) {
    return replication_seed(seed, stream, rep);
}

Moments moments(std::vector<double> values) {
    Moments m;
    const std::size_t n = values.size();
    if (n == 0) return m;
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(n);
    m.mean = mean;
    if (n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        m.sd = std::sqrt(ss / static_cast<double>(n - 1));
    }
    std::sort(values.begin(), values.end());
    m.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    return m;
}

Summary summarize(const std::vector<ReplicationRecord>& records) {
    Summary s;
    std::vector<double> t, sig;
    std::size_t r10 = 0, r5 = 0;
    for (const auto& r : records) {
        if (!r.ok) {
            ++s.failures;
            continue;
        }
        t.push_back(r.statistic);
        sig.push_back(r.sigma_hat);
        r10 += r.reject10 ? 1 : 0;
        r5 += r.reject5 ? 1 : 0;
        s.at_lower_bound += r.at_lower_bound ? 1 : 0;
    }
    s.count = t.size();
    if (s.count == 0) return s;
    const Moments mt = moments(t);
    const Moments ms = moments(sig);
    s.mean_t = mt.mean;
    s.median_t = mt.median;
    s.sd_t = mt.sd;
    s.mean_sigma = ms.mean;
    s.sd_sigma = ms.sd;
    s.rej10 = static_cast<double>(r10) / static_cast<double>(s.count);
    s.rej5 = static_cast<double>(r5) / static_cast<double>(s.count);
    return s;
}

std::vector<ExperimentResult> run_power_grid(const PowerGridConfig& config) {
    const SamplingDesign design(config.n, config.delta);
    const CriticalMfbm model(design);
    std::vector<ExperimentResult> results;
    for (std::size_t i = 0; i < config.hurst_grid.size(); ++i) {
        ExperimentResult res;
        res.key = "H";
        res.grid_value = config.hurst_grid[i];
        res.n = config.n;
        res.delta = config.delta;
        res.sigma = config.sigma;
        res.hurst = config.hurst_grid[i];
        res.seed = config.seed;
        res.stream = kPowerStream + i;
        res.records = replicate({config.sigma, res.hurst}, model, config.reps, config.seed, res.stream,
                                config.threads);
        res.summary = summarize(res.records);
        results.push_back(std::move(res));
    }
    return results;
}

std::vector<ExperimentResult> run_null_sequence(const NullSequenceConfig& config) {
    std::vector<ExperimentResult> results;
    for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
        const SamplingDesign design = SamplingDesign::sqrt_design(config.n_grid[i]);
        const CriticalMfbm model(design);
        ExperimentResult res;
        res.key = "n";
        res.grid_value = static_cast<double>(config.n_grid[i]);
        res.n = design.n();
        res.delta = design.delta();
        res.sigma = config.sigma;
        res.hurst = 0.75;
        res.seed = config.seed;
        res.stream = kNullStream + i;
        res.records = replicate({config.sigma, 0.75}, model, config.reps, config.seed, res.stream,
                                config.threads);
        res.summary = summarize(res.records);
        results.push_back(std::move(res));
    }
    return results;
}

void write_summary_csv(std::ostream& out, const std::vector<ExperimentResult>& results) {
    const std::string key = results.empty() ? "grid" : results.front().key;
    out << key << ",mean_T,sd_T,rej10,rej5,mean_sigma,sd_sigma\n";
    for (const auto& r : results) {
        const Summary& s = r.summary;
        out << format_double(r.grid_value) << ',' << csv_field(s.mean_t) << ',' << csv_field(s.sd_t) << ','
            << csv_field(s.rej10) << ',' << csv_field(s.rej5) << ',' << csv_field(s.mean_sigma) << ','
            << csv_field(s.sd_sigma) << '\n';
    }
}

std::vector<SummaryRow> read_summary_csv(std::istream& in) {
    std::vector<SummaryRow> rows;
    std::string line;
    if (!std::getline(in, line)) return rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 7) {
            throw std::invalid_argument("summary CSV line " + std::to_string(line_no) + " has " +
                                        std::to_string(f.size()) + " fields, expected 7");
        }
        SummaryRow row;
        row.grid_value = parse_field(f[0]).value_or(0.0);
        row.summary.mean_t = parse_field(f[1]);
        row.summary.sd_t = parse_field(f[2]);
        row.summary.rej10 = parse_field(f[3]);
        row.summary.rej5 = parse_field(f[4]);
        row.summary.mean_sigma = parse_field(f[5]);
        row.summary.sd_sigma = parse_field(f[6]);
        rows.push_back(row);
    }
    return rows;
}

std::string to_json(const std::vector<ExperimentResult>& results) {
    nlohmann::ordered_json root;
    root["results"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        nlohmann::ordered_json j;
        j["key"] = r.key;
        j["grid_value"] = r.grid_value;
        j["n"] = r.n;
        j["delta"] = r.delta;
        j["sigma"] = r.sigma;
        j["hurst"] = r.hurst;
        j["seed"] = r.seed;
        j["stream"] = r.stream;
        const Summary& s = r.summary;
        j["summary"] = {{"count", s.count},
                        {"failures", s.failures},
                        {"at_lower_bound", s.at_lower_bound},
                        {"mean_T", optional_json(s.mean_t)},
                        {"median_T", optional_json(s.median_t)},
                        {"sd_T", optional_json(s.sd_t)},
                        {"rej10", optional_json(s.rej10)},
                        {"rej5", optional_json(s.rej5)},
                        {"mean_sigma", optional_json(s.mean_sigma)},
                        {"sd_sigma", optional_json(s.sd_sigma)}};
        nlohmann::ordered_json recs = nlohmann::ordered_json::array();
        for (const auto& rec : r.records) {
            nlohmann::ordered_json jr;
            jr["rep"] = rec.rep;
            jr["seed"] = rec.seed;
            jr["ok"] = rec.ok;
            if (rec.ok) {
                jr["T"] = rec.statistic;
                jr["sigma_hat"] = rec.sigma_hat;
                jr["reject10"] = rec.reject10;
                jr["reject5"] = rec.reject5;
                jr["at_lower_bound"] = rec.at_lower_bound;
            } else {
                jr["error"] = rec.error;
            }
            recs.push_back(std::move(jr));
        }
        j["records"] = std::move(recs);
        root["results"].push_back(std::move(j));
    }
    return root.dump(2) + "\n";
}

std::vector<std::filesystem::path> emit(const std::vector<ExperimentResult>& results,
                                        const std::filesystem::path& dir, const std::string& stem) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

    const std::string key = results.empty() ? "grid" : results.front().key;
    std::vector<std::filesystem::path> written;

    const auto summary_path = dir / (stem + "_summary.csv");
    {
        auto out = open_output(summary_path);
        write_summary_csv(out, results);
    }
    written.push_back(summary_path);

    const auto json_path = dir / (stem + ".json");
    {
        auto out = open_output(json_path);
        out << to_json(results);
    }
    written.push_back(json_path);

    const auto rej_path = dir / (stem + "_rejection.csv");
    {
        auto out = open_output(rej_path);
        out << key << ",rej10,rej5\n";
        for (const auto& r : results) {
            out << format_double(r.grid_value) << ',' << csv_field(r.summary.rej10) << ','
                << csv_field(r.summary.rej5) << '\n';
        }
    }
    written.push_back(rej_path);

    const auto sd_path = dir / (stem + "_sd.csv");
    {
        auto out = open_output(sd_path);
        out << key << ",sd_T\n";
        for (const auto& r : results) out << format_double(r.grid_value) << ',' << csv_field(r.summary.sd_t) << '\n';
    }
    written.push_back(sd_path);

    for (const auto& p : written) {
        if (!std::filesystem::exists(p)) throw std::runtime_error("failed to write " + p.string());
    }
    return written;
}

std::map<std::string, std::string> read_key_value_config(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

std::map<std::string, std::string> read_key_value_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    return read_key_value_config(in);
}

} // namespace mfcrit
