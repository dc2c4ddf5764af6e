#include "mfcrit/intraday.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <Eigen/Dense>

#include "json.hpp"

#include "mfcrit/boundary_test.hpp"
#include "mfcrit/critical_likelihood.hpp"
#include "mfcrit/experiments.hpp"
#include "mfcrit/parallel.hpp"
#include "mfcrit/sampling.hpp"

namespace mfcrit {

namespace {

using namespace std::chrono;

constexpr std::int64_t kDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t day_of(std::int64_t t) { return floor_div(t, kDay); }

year_month_day civil(std::int64_t day) { return year_month_day{sys_days{days{day}}}; }

// Splits one CSV record; double quotes group fields and "" escapes a quote.
std::vector<std::string> split_record(const std::string& line, char delim, bool& ok) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    ok = true;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) ok = false;
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool read_int(const std::string& s, std::size_t pos, std::size_t len, int& value) {
    if (pos + len > s.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    const auto r = std::from_chars(s.data() + pos, s.data() + pos + len, value);
    return r.ec == std::errc();
}

std::optional<double> parse_price(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string two_digits(int v) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d", v);
    return buf;
}

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
    return out;
}

constexpr const char* kEol = "\r\n";

} // namespace

std::optional<std::int64_t> parse_timestamp(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) return std::nullopt;

    // Epoch seconds: optional sign and digits only.
    {
        std::size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (start < s.size() &&
            std::all_of(s.begin() + static_cast<std::ptrdiff_t>(start), s.end(),
                        [](char c) { return c >= '0' && c <= '9'; })) {
            std::int64_t v = 0;
            const char* first = s.data() + (s[0] == '+' ? 1 : 0);
            const auto r = std::from_chars(first, s.data() + s.size(), v);
            if (r.ec == std::errc() && r.ptr == s.data() + s.size()) return v;
            return std::nullopt;
        }
    }

    int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
    if (!read_int(s, 0, 4, y) || s.size() < 16 || s[4] != '-' || !read_int(s, 5, 2, mo) || s[7] != '-' ||
        !read_int(s, 8, 2, d) || (s[10] != 'T' && s[10] != ' ') || !read_int(s, 11, 2, hh) || s[13] != ':' ||
        !read_int(s, 14, 2, mm)) {
        return std::nullopt;
    }
    std::size_t pos = 16;
    if (pos < s.size() && s[pos] == ':') {
        if (!read_int(s, pos + 1, 2, ss)) return std::nullopt;
        pos += 3;
        if (pos < s.size() && s[pos] == '.') {
            // Fractional seconds below the minute grid carry no information here
            // but must be zero for the bar to sit on the grid.
            ++pos;
            const std::size_t begin = pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
                if (s[pos] != '0') return std::nullopt;
                ++pos;
            }
            if (pos == begin) return std::nullopt;
        }
    }
    if (pos < s.size() && s[pos] == 'Z') ++pos;
    if (pos != s.size()) return std::nullopt;
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;

    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    const std::int64_t days_since = sys_days{ymd}.time_since_epoch().count();
    return days_since * kDay + hh * 3600 + mm * 60 + ss;
}

std::string format_date(std::int64_t time) {
    const year_month_day ymd = civil(day_of(time));
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_timestamp(std::int64_t time) {
    const std::int64_t sec = time - day_of(time) * kDay;
    return format_date(time) + " " + two_digits(static_cast<int>(sec / 3600)) + ":" +
           two_digits(static_cast<int>(sec / 60 % 60)) + ":" + two_digits(static_cast<int>(sec % 60));
}

IngestResult ingest(std::istream& in, const IngestOptions& options) {
    IngestResult out;
    std::string line;
    std::size_t line_no = 0;
    int ts_col = -1, px_col = -1;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || trim(line) == "\r") continue;
        bool ok = true;
        const auto fields = split_record(line, options.delimiter, ok);
        if (ts_col < 0) {
            for (std::size_t i = 0; i < fields.size(); ++i) {
                const std::string name = trim(fields[i]);
                if (name == options.timestamp_column) ts_col = static_cast<int>(i);
                if (name == options.price_column) px_col = static_cast<int>(i);
            }
            if (ts_col < 0 || px_col < 0) {
                throw std::invalid_argument("line " + std::to_string(line_no) + ": header lacks column '" +
                                            (ts_col < 0 ? options.timestamp_column : options.price_column) +
                                            "'");
            }
            columns = fields.size();
            continue;
        }
        auto fail = [&](const std::string& msg) { out.errors.push_back({line_no, msg}); };
        if (!ok) {
            fail("unterminated quoted field");
            continue;
        }
        if (fields.size() != columns) {
            fail("expected " + std::to_string(columns) + " fields, found " + std::to_string(fields.size()));
            continue;
        }
        const auto t = parse_timestamp(fields[static_cast<std::size_t>(ts_col)]);
        if (!t) {
            fail("unparseable timestamp '" + fields[static_cast<std::size_t>(ts_col)] + "'");
            continue;
        }
        const auto p = parse_price(trim(fields[static_cast<std::size_t>(px_col)]));
        if (!p || !std::isfinite(*p) || *p <= 0.0) {
            fail("price must be a positive number, got '" + fields[static_cast<std::size_t>(px_col)] + "'");
            continue;
        }
        out.bars.push_back({*t, *p, line_no});
    }
    return out;
}

IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input file " + path.string());
    return ingest(in, options);
}

SessionWindow parse_session_window(const std::string& text) {
    int h1 = 0, m1 = 0, h2 = 0, m2 = 0;
    const std::string s = trim(text);
    if (s.size() != 11 || !read_int(s, 0, 2, h1) || s[2] != ':' || !read_int(s, 3, 2, m1) || s[5] != '-' ||
        !read_int(s, 6, 2, h2) || s[8] != ':' || !read_int(s, 9, 2, m2) || h1 > 23 || h2 > 23 || m1 > 59 ||
        m2 > 59) {
        throw std::invalid_argument("session window must look like HH:MM-HH:MM, got '" + text + "'");
    }
    SessionWindow w{h1 * 60 + m1, h2 * 60 + m2};
    if (w.last_minute <= w.first_minute) {
        throw std::invalid_argument("session window must end after it starts");
    }
    return w;
}

FilterResult session_filter(const std::vector<Bar>& bars, const SessionWindow& window) {
    std::map<std::int64_t, std::vector<const Bar*>> by_day;
    for (const Bar& b : bars) by_day[day_of(b.time)].push_back(&b);

    FilterResult out;
    const std::size_t expected = window.bar_count();
    for (const auto& [day, list] : by_day) {
        const std::string date = format_date(day * kDay);
        std::string reason;
        for (std::size_t i = 1; i < list.size() && reason.empty(); ++i) {
            if (list[i]->time == list[i - 1]->time) {
                reason = "duplicate timestamp " + format_timestamp(list[i]->time) + " (line " +
                         std::to_string(list[i]->line) + ")";
            } else if (list[i]->time < list[i - 1]->time) {
                reason = "non-monotone timestamps at line " + std::to_string(list[i]->line);
            }
        }
        std::vector<double> prices(expected, 0.0);
        std::vector<char> seen(expected, 0);
        std::size_t count = 0;
        for (const Bar* b : list) {
            if (!reason.empty()) break;
            const std::int64_t sec = b->time - day * kDay;
            const auto minute = static_cast<int>(sec / 60);
            if (minute < window.first_minute || minute > window.last_minute) continue;
            if (sec % 60 != 0) {
                reason = "timestamp " + format_timestamp(b->time) + " is off the minute grid";
                break;
            }
            const auto slot = static_cast<std::size_t>(minute - window.first_minute);
            if (seen[slot]) {
                reason = "duplicate minute " + format_timestamp(b->time);
                break;
            }
            seen[slot] = 1;
            prices[slot] = b->price;
            ++count;
        }
        if (reason.empty() && count != expected) {
            reason = "incomplete session: " + std::to_string(count) + " of " + std::to_string(expected) +
                     " minutes";
        }
        if (!reason.empty()) {
            out.discarded.push_back({date, reason});
            continue;
        }
        SessionDay d;
        d.date = date;
        d.prices = std::move(prices);
        d.returns.resize(expected - 1);
        for (std::size_t i = 0; i + 1 < expected; ++i) {
            d.returns[i] = std::log(d.prices[i + 1]) - std::log(d.prices[i]);
        }
        out.days.push_back(std::move(d));
    }
    return out;
}

double normalization_factor(const std::vector<double>& returns, double delta) {
    if (returns.empty()) throw std::domain_error("day has no returns");
    double m2 = 0.0;
    for (double r : returns) m2 += r * r;
    m2 /= static_cast<double>(returns.size());
    if (!(m2 > 0.0) || !std::isfinite(m2)) throw std::domain_error("zero-variance day");
    return std::sqrt(delta / m2);
}

SessionDay normalize_day(SessionDay day) {
    const double delta = 1.0 / static_cast<double>(day.returns.size());
    const double s = normalization_factor(day.returns, delta);
    double m2 = 0.0;
    for (double& r : day.returns) {
        r *= s;
        m2 += r * r;
    }
    m2 /= static_cast<double>(day.returns.size());
    if (std::abs(m2 - delta) > 1e-12 * delta) {
        throw std::domain_error("normalized second moment misses 1/n");
    }
    day.scale = s;
    return day;
}

std::vector<DailyRecord> daily_statistics(const std::vector<SessionDay>& days, unsigned threads) {
    std::vector<DailyRecord> records(days.size());
    if (days.empty()) return records;
    std::map<std::size_t, std::unique_ptr<CriticalMfbm>> models;
    for (const auto& d : days) {
        const std::size_t n = d.returns.size();
        if (n >= 2 && !models.count(n)) {
            models.emplace(n, std::make_unique<CriticalMfbm>(SamplingDesign(n, 1.0 / static_cast<double>(n))));
        }
    }
    parallel_for(days.size(), threads, [&](std::size_t i) {
        const SessionDay& d = days[i];
        DailyRecord& rec = records[i];
        rec.date = d.date;
        try {
            const auto it = models.find(d.returns.size());
            if (it == models.end()) throw std::domain_error("day has fewer than two returns");
            const Eigen::Map<const Eigen::VectorXd> x(d.returns.data(), static_cast<Eigen::Index>(d.returns.size()));
            const TestResult t = feasible_statistic_mfbm(*it->second, x);
            rec.ok = true;
            rec.statistic = t.statistic;
            rec.sigma_hat = t.sigma_hat;
            rec.reject10 = t.reject10;
            rec.reject5 = t.reject5;
            rec.iterations = t.iterations;
            rec.at_lower_bound = t.at_lower_bound;
        } catch (const std::exception& e) {
            rec.ok = false;
            rec.note = e.what();
        }
    });
    return records;
}

std::vector<RollingPoint> rolling(const std::vector<DailyRecord>& records, std::size_t window) {
    if (window == 0) throw std::invalid_argument("rolling window must be positive");
    std::vector<const DailyRecord*> ok;
    for (const auto& r : records) {
        if (r.ok) ok.push_back(&r);
    }
    std::vector<RollingPoint> out;
    if (ok.size() < window) return out;
    for (std::size_t end = window; end <= ok.size(); ++end) {
        double sum = 0.0;
        std::size_t rej = 0;
        for (std::size_t i = end - window; i < end; ++i) {
            sum += ok[i]->statistic;
            rej += ok[i]->reject5 ? 1 : 0;
        }
        out.push_back({ok[end - 1]->date, sum / static_cast<double>(window),
                       static_cast<double>(rej) / static_cast<double>(window)});
    }
    return out;
}

Period parse_period(const std::string& text) {
    const std::string s = trim(text);
    int a = 0, b = 0;
    if (s.size() == 4 && read_int(s, 0, 4, a)) return {s, a, a};
    if (s.size() == 9 && read_int(s, 0, 4, a) && s[4] == '-' && read_int(s, 5, 4, b) && a <= b) {
        return {s, a, b};
    }
    throw std::invalid_argument("period must look like YYYY or YYYY-YYYY, got '" + text + "'");
}

PeriodSummary summarize_days(const std::vector<DailyRecord>& records, const std::string& label) {
    PeriodSummary ps;
    ps.label = label;
    std::vector<double> t, sig;
    std::size_t r10 = 0, r5 = 0;
    for (const auto& r : records) {
        if (!r.ok) continue;
        t.push_back(r.statistic);
        sig.push_back(r.sigma_hat);
        r10 += r.reject10 ? 1 : 0;
        r5 += r.reject5 ? 1 : 0;
    }
    ps.days = t.size();
    if (t.empty()) return ps;
    const Moments mt = moments(t);
    ps.mean_t = mt.mean;
    ps.median_t = mt.median;
    ps.sd_t = mt.sd;
    ps.median_sigma = moments(sig).median;
    ps.rej10 = static_cast<double>(r10) / static_cast<double>(t.size());
    ps.rej5 = static_cast<double>(r5) / static_cast<double>(t.size());
    return ps;
}

std::vector<PeriodSummary> subperiods(const std::vector<DailyRecord>& records, const std::vector<Period>& periods) {
    std::vector<PeriodSummary> out;
    for (const Period& p : periods) {
        std::vector<DailyRecord> subset;
        for (const auto& r : records) {
            const int year = std::stoi(r.date.substr(0, 4));
            if (year >= p.first_year && year <= p.last_year) subset.push_back(r);
        }
        out.push_back(summarize_days(subset, p.label));
    }
    return out;
}

PipelineResult run_pipeline(std::istream& in, const PipelineConfig& config) {
    PipelineResult res;
    IngestResult raw = ingest(in, config.ingest);
    res.ingest_errors = std::move(raw.errors);
    FilterResult filtered = session_filter(raw.bars, config.window);
    res.discarded = std::move(filtered.discarded);
    for (auto& d : filtered.days) {
        const std::string date = d.date;
        try {
            res.days.push_back(normalize_day(std::move(d)));
        } catch (const std::domain_error& e) {
            res.discarded.push_back({date, e.what()});
        }
    }
    std::sort(res.discarded.begin(), res.discarded.end(),
              [](const DiscardedDay& a, const DiscardedDay& b) { return a.date < b.date; });
    res.records = daily_statistics(res.days, config.threads);
    res.rolling = rolling(res.records, config.rolling_window);
    res.full = summarize_days(res.records, "full");
    res.periods = subperiods(res.records, config.periods);
    return res;
}

PipelineResult run_pipeline(const std::filesystem::path& path, const PipelineConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input file " + path.string());
    return run_pipeline(in, config);
}

std::string csv_quote(const std::string& field, char delimiter) {
    if (field.find_first_of(std::string{'"', '\r', '\n', delimiter}) == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::filesystem::path> write_pipeline_outputs(const PipelineResult& result,
                                                          const PipelineConfig& config,
                                                          const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;

    {
        const auto p = dir / "daily.csv";
        auto out = open_output(p);
        out << "date,T,sigma_hat,reject10,reject5" << kEol;
        for (const auto& r : result.records) {
            if (!r.ok) continue;
            out << csv_quote(r.date) << ',' << format_double(r.statistic) << ',' << format_double(r.sigma_hat)
                << ',' << (r.reject10 ? 1 : 0) << ',' << (r.reject5 ? 1 : 0) << kEol;
        }
        written.push_back(p);
    }
    {
        const auto p = dir / "rolling.csv";
        auto out = open_output(p);
        out << "date,roll_mean_T,roll_rej5" << kEol;
        for (const auto& r : result.rolling) {
            out << csv_quote(r.date) << ',' << format_double(r.mean_t) << ',' << format_double(r.rej5) << kEol;
        }
        written.push_back(p);
    }
    auto period_row = [](std::ostream& out, const PeriodSummary& s) {
        out << csv_quote(s.label) << ',' << s.days << ',' << opt_field(s.mean_t) << ',' << opt_field(s.median_t)
            << ',' << opt_field(s.rej10) << ',' << opt_field(s.rej5) << ',' << opt_field(s.median_sigma) << kEol;
    };
    {
        const auto p = dir / "subperiods.csv";
        auto out = open_output(p);
        out << "period,days,mean_T,median_T,rej10,rej5,median_sigma" << kEol;
        for (const auto& s : result.periods) period_row(out, s);
        written.push_back(p);
    }
    {
        const auto p = dir / "summary.csv";
        auto out = open_output(p);
        const PeriodSummary& f = result.full;
        out << "statistic,value" << kEol;
        out << "trading_days," << f.days << kEol;
        out << "mean_T," << opt_field(f.mean_t) << kEol;
        out << "median_T," << opt_field(f.median_t) << kEol;
        out << "sd_T," << opt_field(f.sd_t) << kEol;
        out << "rej10," << opt_field(f.rej10) << kEol;
        out << "rej5," << opt_field(f.rej5) << kEol;
        out << "median_sigma," << opt_field(f.median_sigma) << kEol;
        written.push_back(p);
    }
    {
        const auto p = dir / "days_log.csv";
        auto out = open_output(p);
        out << "date,status,reason" << kEol;
        std::vector<std::tuple<std::string, std::string, std::string>> rows;
        for (const auto& d : result.discarded) rows.emplace_back(d.date, "discarded", d.reason);
        for (const auto& r : result.records) {
            if (!r.ok) rows.emplace_back(r.date, "failed", r.note);
        }
        std::stable_sort(rows.begin(), rows.end(),
                         [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
        for (const auto& [date, status, reason] : rows) {
            out << csv_quote(date) << ',' << status << ',' << csv_quote(reason) << kEol;
        }
        written.push_back(p);
    }
    {
        const auto p = dir / "metadata.json";
        auto out = open_output(p);
        nlohmann::ordered_json j;
        j["normalization"] = "second moment about zero of log returns scaled to 1/n";
        j["session_window"] = two_digits(config.window.first_minute / 60) + ":" +
                              two_digits(config.window.first_minute % 60) + "-" +
                              two_digits(config.window.last_minute / 60) + ":" +
                              two_digits(config.window.last_minute % 60);
        j["rolling_window"] = config.rolling_window;
        j["rolling_alignment"] = "trailing";
        j["ingest_errors"] = nlohmann::ordered_json::array();
        for (const auto& e : result.ingest_errors) {
            j["ingest_errors"].push_back({{"line", e.line}, {"message", e.message}});
        }
        std::size_t failed = 0, bound = 0;
        for (const auto& r : result.records) {
            failed += r.ok ? 0 : 1;
            bound += r.ok && r.at_lower_bound ? 1 : 0;
        }
        j["retained_days"] = result.days.size();
        j["discarded_days"] = result.discarded.size();
        j["failed_days"] = failed;
        j["sigma_lower_bound_days"] = bound;
        out << j.dump(2) << "\n";
        written.push_back(p);
    }
    return written;
}

void write_synthetic_panel(std::ostream& out, const PanelSpec& spec) {
    const auto start = parse_timestamp(spec.first_date + " 00:00");
    if (!start) throw std::invalid_argument("first_date must be YYYY-MM-DD");
    const std::size_t bars = spec.window.bar_count();
    const std::size_t n = bars - 1;
    const SamplingDesign design(n, 1.0 / static_cast<double>(n));
    const MfbmSampler sampler({spec.sigma, 0.75}, design);

    auto stamp = [&](std::int64_t t) {
        return spec.epoch_timestamps ? std::to_string(t) : format_timestamp(t);
    };
    out << "timestamp,price\n";
    double price = spec.start_price;
    std::int64_t day = day_of(*start);
    for (std::size_t generated = 0; generated < spec.days; ++day) {
        const weekday wd{sys_days{days{day}}};
        if (wd == Saturday || wd == Sunday) continue;
        const std::int64_t base = day * kDay;
        if (spec.pre_market) {
            for (int m = spec.window.first_minute - 5; m < spec.window.first_minute; ++m) {
                out << stamp(base + m * 60) << ',' << format_double(price) << '\n';
            }
        }
        const Eigen::VectorXd x = sampler.draw(replication_seed(spec.seed, 4, generated));
        out << stamp(base + spec.window.first_minute * 60) << ',' << format_double(price) << '\n';
        for (std::size_t i = 0; i < n; ++i) {
            price *= std::exp(spec.daily_volatility * x(static_cast<Eigen::Index>(i)));
            out << stamp(base + (spec.window.first_minute + static_cast<int>(i) + 1) * 60) << ','
                << format_double(price) << '\n';
        }
        ++generated;
    }
}

} // namespace mfcrit
