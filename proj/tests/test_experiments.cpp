#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include "json.hpp"

#include "mfcrit/boundary_test.hpp"
#include "mfcrit/critical_likelihood.hpp"
#include "mfcrit/experiments.hpp"
#include "mfcrit/sampling.hpp"

using namespace mfcrit;

namespace {

PowerGridConfig small_power(std::size_t reps, unsigned threads = 1) {
    PowerGridConfig c;
    c.hurst_grid = {0.75, 0.9};
    c.n = 64;
    c.reps = reps;
    c.threads = threads;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("mfcrit_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST(Moments, SmallSamples) {
    const Moments m = moments({3.0, 1.0, 2.0});
    EXPECT_DOUBLE_EQ(*m.mean, 2.0);
    EXPECT_DOUBLE_EQ(*m.sd, 1.0);
    EXPECT_DOUBLE_EQ(*m.median, 2.0);
    const Moments one = moments({4.0});
    EXPECT_DOUBLE_EQ(*one.mean, 4.0);
    EXPECT_FALSE(one.sd.has_value());
    EXPECT_DOUBLE_EQ(*moments({1.0, 2.0, 3.0, 10.0}).median, 2.5);
    EXPECT_FALSE(moments({}).mean.has_value());
}

TEST(Summarize, SharesAndFailures) {
    std::vector<ReplicationRecord> recs(4);
    recs[0] = {0, 1, true, 2.0, 1.0, true, true, ""};
    recs[1] = {1, 2, true, 1.5, 2.0, true, false, ""};
    recs[2] = {2, 3, true, -1.0, 3.0, false, false, ""};
    recs[3] = {3, 4, false, 0.0, 0.0, false, false, "bracket"};
    const Summary s = summarize(recs);
    EXPECT_EQ(s.count, 3u);
    EXPECT_EQ(s.failures, 1u);
    EXPECT_DOUBLE_EQ(*s.rej10, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(*s.rej5, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(*s.mean_sigma, 2.0);
    EXPECT_DOUBLE_EQ(*s.sd_sigma, 1.0);
    EXPECT_DOUBLE_EQ(*s.median_t, 1.5);

    const Summary single = summarize({recs[0]});
    EXPECT_EQ(single.count, 1u);
    EXPECT_FALSE(single.sd_t.has_value());
    EXPECT_DOUBLE_EQ(*single.rej5, 1.0);
}

TEST(PowerGrid, ZeroReplicationsGiveEmptySummaries) {
    const auto results = run_power_grid(small_power(0));
    ASSERT_EQ(results.size(), 2u);
    for (const auto& r : results) {
        EXPECT_EQ(r.summary.count, 0u);
        EXPECT_FALSE(r.summary.mean_t.has_value());
        EXPECT_FALSE(r.summary.rej5.has_value());
    }
    std::ostringstream csv;
    write_summary_csv(csv, results);
    EXPECT_EQ(csv.str(), "H,mean_T,sd_T,rej10,rej5,mean_sigma,sd_sigma\n0.75,,,,,,\n0.90000000000000002,,,,,,\n");
    std::istringstream in(csv.str());
    const auto rows = read_summary_csv(in);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_FALSE(rows[1].summary.sd_t.has_value());
    const auto j = nlohmann::json::parse(to_json(results));
    EXPECT_EQ(j["results"].size(), 2u);
    EXPECT_TRUE(j["results"][0]["summary"]["mean_T"].is_null());
}

TEST(PowerGrid, CsvRoundTripIsExact) {
    const auto results = run_power_grid(small_power(20));
    std::ostringstream csv;
    write_summary_csv(csv, results);
    std::istringstream in(csv.str());
    const auto rows = read_summary_csv(in);
    ASSERT_EQ(rows.size(), results.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].grid_value, results[i].grid_value);
        EXPECT_EQ(rows[i].summary.mean_t, results[i].summary.mean_t);
        EXPECT_EQ(rows[i].summary.sd_t, results[i].summary.sd_t);
        EXPECT_EQ(rows[i].summary.rej5, results[i].summary.rej5);
        EXPECT_EQ(rows[i].summary.sd_sigma, results[i].summary.sd_sigma);
    }
    std::istringstream bad("H,mean_T\n0.75,1\n");
    EXPECT_THROW(read_summary_csv(bad), std::invalid_argument);
}

TEST(PowerGrid, RecordedSeedReproducesStatistic) {
    const PowerGridConfig c = small_power(5);
    const auto results = run_power_grid(c);
    const auto j = nlohmann::json::parse(to_json(results));
    EXPECT_EQ(j["results"][1]["seed"].get<std::uint64_t>(), c.seed);
    const auto& rec = j["results"][1]["records"][3];
    const std::uint64_t seed = rec["seed"].get<std::uint64_t>();
    EXPECT_EQ(seed, experiment_sample_seed(c.seed, j["results"][1]["stream"].get<std::uint64_t>(), 3));

    const SamplingDesign d(c.n, c.delta);
    const CriticalMfbm model(d);
    const MfbmSampler sampler({c.sigma, 0.9}, d);
    const TestResult t = feasible_statistic_mfbm(model, sampler.draw(seed));
    EXPECT_EQ(t.statistic, rec["T"].get<double>());
    EXPECT_EQ(t.statistic, results[1].records[3].statistic);
}

TEST(PowerGrid, SerialEqualsParallel) {
    const auto a = run_power_grid(small_power(12, 1));
    const auto b = run_power_grid(small_power(12, 4));
    EXPECT_EQ(to_json(a), to_json(b));
}

TEST(PowerGrid, EmittedFilesAreByteIdentical) {
    const auto dir1 = scratch_dir("emit1"), dir2 = scratch_dir("emit2");
    const auto p1 = emit(run_power_grid(small_power(8)), dir1, "power");
    const auto p2 = emit(run_power_grid(small_power(8, 2)), dir2, "power");
    ASSERT_EQ(p1.size(), 4u);
    for (std::size_t i = 0; i < p1.size(); ++i) {
        EXPECT_EQ(p1[i].filename(), p2[i].filename());
        EXPECT_EQ(slurp(p1[i]), slurp(p2[i])) << p1[i];
    }
    EXPECT_EQ(slurp(dir1 / "power_sd.csv").substr(0, 7), "H,sd_T\n");
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);
}

TEST(PowerGrid, FailuresAreCounted) {
    // A grid point with sigma = 0 still runs; failures, if any, are recorded, not thrown.
    PowerGridConfig c = small_power(10);
    c.sigma = 0.0;
    const auto results = run_power_grid(c);
    for (const auto& r : results) {
        EXPECT_EQ(r.summary.count + r.summary.failures, 10u);
        for (const auto& rec : r.records) {
            if (!rec.ok) {
                EXPECT_FALSE(rec.error.empty());
            }
        }
    }
}

TEST(PowerGrid, RejectionGrowsWithHurst) {
    PowerGridConfig c;
    c.hurst_grid = {0.75, 0.85, 0.95};
    c.reps = 300;
    const auto results = run_power_grid(c);
    for (std::size_t i = 1; i < results.size(); ++i) {
        EXPECT_GE(*results[i].summary.rej5 + 0.02, *results[i - 1].summary.rej5);
        EXPECT_GE(*results[i].summary.rej10 + 0.02, *results[i - 1].summary.rej10);
    }
    EXPECT_GT(*results.back().summary.rej5, *results.front().summary.rej5);
}

TEST(NullSequence, DesignsFollowSquareRootRule) {
    NullSequenceConfig c;
    c.n_grid = {64, 256};
    c.reps = 3;
    const auto results = run_null_sequence(c);
    ASSERT_EQ(results.size(), 2u);
    EXPECT_EQ(results[0].key, "n");
    EXPECT_DOUBLE_EQ(results[0].delta, 0.125);
    EXPECT_DOUBLE_EQ(results[1].delta, 0.0625);
    EXPECT_NE(results[0].stream, results[1].stream);
}

TEST(KeyValueConfig, CommentsAndErrors) {
    std::istringstream in("# header\nreps = 10   # trailing\n\n  seed=5\nhurst_grid = 0.75,0.8\n");
    const auto m = read_key_value_config(in);
    EXPECT_EQ(m.at("reps"), "10");
    EXPECT_EQ(m.at("seed"), "5");
    EXPECT_EQ(m.at("hurst_grid"), "0.75,0.8");
    std::istringstream bad("reps 10\n");
    EXPECT_THROW(read_key_value_config(bad), std::invalid_argument);
    std::istringstream empty_key(" = 3\n");
    EXPECT_THROW(read_key_value_config(empty_key), std::invalid_argument);
    EXPECT_THROW(read_key_value_config(std::filesystem::path("/nonexistent/cfg.txt")), std::runtime_error);
}

TEST(FormatDouble, SeventeenDigits) {
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(2.0), "2");
}
