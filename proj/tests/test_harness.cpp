#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cesis/error.hpp"
#include "cesis/harness.hpp"

using namespace cesis;

namespace {

ExperimentSpec tiny_spec() {
    const auto cfg = KeyValueConfig::from_string(
        "model.name = numerical_example\n"
        "model.threshold = 3.0\n"
        "budget.n0 = 300\n"
        "budget.nt = 100\n"
        "budget.tau = 2\n"
        "sampling.variance_floor = 0.5\n"
        "sampling.defensive_weight = 0.1\n"
        "sampling.defensive_scale = 2.0\n"
        "run.seed = 2024\n"
        "run.repetitions = 3\n");
    return ExperimentSpec::from_config(cfg);
}

}  // namespace

TEST_CASE("experiment spec reads overrides and keeps defaults") {
    ExperimentSpec spec = tiny_spec();
    CHECK(spec.model_name == "numerical_example");
    CHECK(spec.threshold == doctest::Approx(3.0));
    CHECK(spec.run.n0 == 300);
    CHECK(spec.run.tau == 2);
    CHECK(spec.run.ratio == doctest::Approx(0.3));          // default
    CHECK(spec.run.grid.samples_per_param == doctest::Approx(5.0));
    CHECK(spec.run.em.restarts == 10);
    CHECK(spec.run.min_weighted_records == 5);
    CHECK(spec.run.variance_floor == doctest::Approx(0.5));
    CHECK(spec.repetitions == 3);
    CHECK_FALSE(spec.baseline_cmc);
    CHECK_FALSE(spec.reference_p.has_value());

    CHECK_THROWS_AS(ExperimentSpec::from_config(KeyValueConfig::from_string(
                        "model.name = numerical_example\n")),
                    ConfigError);  // threshold is mandatory
}

TEST_CASE("repetition seeds are deterministic and collision free") {
    std::set<std::uint64_t> seen;
    for (int r = 0; r < 200; ++r) {
        seen.insert(repetition_seed(7, "ce_sis", r));
        seen.insert(repetition_seed(7, "cmc", r));
        seen.insert(repetition_seed(7, "optimal_sis", r));
    }
    CHECK(seen.size() == 600);
    CHECK(repetition_seed(7, "ce_sis", 3) == repetition_seed(7, "ce_sis", 3));
    CHECK(repetition_seed(7, "ce_sis", 3) != repetition_seed(8, "ce_sis", 3));
}

TEST_CASE("sample statistics match closed forms") {
    CHECK(sample_mean({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(2.5));
    CHECK(sample_sd({1.0, 2.0, 3.0, 4.0}) ==
          doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-13));
    CHECK_THROWS_AS(sample_mean({}), InputError);
    CHECK_THROWS_AS(sample_sd({1.0}), InputError);
}

TEST_CASE("crude monte carlo repetitions recover a known probability") {
    DeterministicTailModel model(2.0);  // p = 2(1 - Phi(2)) = 0.0455...
    const auto reps = run_cmc_repetitions(model, 2000, 20, 99);
    REQUIRE(reps.size() == 20);
    const double mean = sample_mean(reps);
    CHECK(std::abs(mean - 0.04550026389635842) < 0.0045);
    // Independent repetitions: not all equal.
    CHECK(sample_sd(reps) > 0.0);
}

TEST_CASE("optimal sis baseline is exact on a constant-s model") {
    // s = 1 everywhere: q* = f, w = 1, every replication fails, so each
    // repetition returns exactly 1.
    class AlwaysFails final : public OracleModel {
    public:
        std::string name() const override { return "always_fails"; }
        int dim() const override { return 1; }
        const InputDensity& input_density() const override { return f_; }
        double threshold() const override { return 0.0; }
        int simulate(const Vec&, RngStream&) const override { return 1; }
        double true_s(const Vec&) const override { return 1.0; }

    private:
        StandardNormalDensity f_{1};
    };
    AlwaysFails model;
    const auto reps = run_optimal_sis_repetitions(model, 200, 0.3, 5, 42);
    for (double est : reps) CHECK(est == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("optimal sis baseline is unbiased on the benchmark") {
    NumericalExampleModel model(9.1509798001);
    const auto reps = run_optimal_sis_repetitions(model, 1000, 0.3, 8, 7);
    const double mean = sample_mean(reps);
    // True p is 0.00996; eight repetitions at per-rep sd ~5e-4 put the mean
    // within ~7e-4 at four sigmas.
    CHECK(std::abs(mean - 0.00996) < 8e-4);
}

TEST_CASE("experiments are reproducible and consistent across thread counts") {
    ExperimentSpec spec = tiny_spec();
    ExperimentResult a = run_experiment(spec, 1);
    ExperimentResult b = run_experiment(spec, 2);
    CHECK(summary_csv(a) == summary_csv(b));
    CHECK(results_csv(a) == results_csv(b));
    CHECK(a.first_report_json == b.first_report_json);
    REQUIRE(a.summary.size() == 1);
    CHECK(a.summary[0].method == "ce_sis");
    CHECK(a.summary[0].n_total == 300 + 2 * 100);
    // Reference defaults to the quadrature oracle for the benchmark model.
    CHECK(a.reference_p == doctest::Approx(0.15533984011233526).epsilon(1e-8));
}

TEST_CASE("csv outputs carry the documented schema") {
    ExperimentSpec spec = tiny_spec();
    spec.baseline_cmc = true;
    ExperimentResult result = run_experiment(spec, 1);
    const std::string summary = summary_csv(result);
    CHECK(summary.rfind("method,mean,std_error,cmc_ratio,n_total\n", 0) == 0);
    std::istringstream lines(summary);
    std::string line;
    std::getline(lines, line);
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 4);
    }
    CHECK(rows == 2);  // ce_sis + cmc
    const std::string results = results_csv(result);
    CHECK(results.rfind("method,rep,seed,estimate,total_sims\n", 0) == 0);
    CHECK(std::count(results.begin(), results.end(), '\n') == 1 + 2 * 3);
}

TEST_CASE("write_outputs produces the full artifact set") {
    namespace fs = std::filesystem;
    ExperimentSpec spec = tiny_spec();
    ExperimentResult result = run_experiment(spec, 1);
    const fs::path dir = fs::temp_directory_path() / "cesis_harness_test_outputs";
    fs::remove_all(dir);
    write_outputs(result, dir.string());
    for (const char* name : {"summary.csv", "results.csv", "run_report.json", "iterations.csv"})
        CHECK(fs::exists(dir / name));
    std::ifstream in(dir / "summary.csv");
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == summary_csv(result));
    fs::remove_all(dir);
}
