#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cesis/config.hpp"
#include "cesis/driver.hpp"

namespace cesis {

struct ExperimentSpec {
    std::string model_name = "numerical_example";
    double threshold = 0.0;
    RunConfig run;
    int repetitions = 1;
    bool baseline_cmc = false;
    bool baseline_optimal = false;
    long baseline_n = 1000;        // optimal-SIS budget per repetition
    double baseline_m_ratio = 0.3; // distinct inputs m = round(ratio * n)
    std::optional<double> reference_p;  // for cmc_ratio; default: oracle

    static ExperimentSpec from_config(const KeyValueConfig& cfg);
};

struct RepRow {
    std::string method;
    int rep = 0;
    std::uint64_t seed = 0;
    double estimate = 0.0;
    long sims = 0;
};

struct MethodSummary {
    std::string method;
    double mean = 0.0;
    double std_error = 0.0;  // sample SD of per-repetition estimates
    double ratio = 0.0;      // cmc_ratio at this method's budget
    long n_total = 0;
};

struct ExperimentResult {
    std::vector<MethodSummary> summary;
    std::vector<RepRow> reps;
    double reference_p = 0.0;
    std::string first_report_json;  // RunReport of repetition 0
    std::string first_report_csv;
};

double sample_mean(const std::vector<double>& xs);
double sample_sd(const std::vector<double>& xs);

// Derived seed for repetition r of a given method under the master seed.
std::uint64_t repetition_seed(std::uint64_t master, const std::string& method, int rep);

// CE-SIS repetitions (worker pool of `jobs` threads), then any requested
// baselines; summaries use the oracle reference p when the model has one.
ExperimentResult run_experiment(const ExperimentSpec& spec, int jobs);

// Eq.-(1) crude Monte Carlo at total budget n.
std::vector<double> run_cmc_repetitions(const SimulationModel& model, long n, int reps,
                                        std::uint64_t master_seed);

// Optimal-SIS baseline: m distinct draws from the tabulated q*, exact
// Eq.-(6) allocation (rounded by the Appendix-2 rule), Eq.-(4) estimate.
std::vector<double> run_optimal_sis_repetitions(const OracleModel& model, long n,
                                                double m_ratio, int reps,
                                                std::uint64_t master_seed);

// summary.csv / results.csv bodies (6 significant digits, '.' decimal).
std::string summary_csv(const ExperimentResult& result);
std::string results_csv(const ExperimentResult& result);

// Writes summary.csv, results.csv, run_report.json, iterations.csv.
void write_outputs(const ExperimentResult& result, const std::string& out_dir);

}  // namespace cesis
