#include "cesis/harness.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "cesis/allocation.hpp"
#include "cesis/error.hpp"
#include "cesis/quadrature.hpp"

namespace cesis {

namespace {

void format_value(std::ostringstream& out, double v) {
    out << std::setprecision(6) << v;
}

// Run body(r) for r in [0, reps) on `jobs` threads. Each index is claimed
// once; results go into index-addressed slots so no locking is needed.
template <typename Body>
void parallel_for(int reps, int jobs, Body&& body) {
    jobs = std::max(1, std::min(jobs, reps));
    if (jobs == 1) {
        for (int r = 0; r < reps; ++r) body(r);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= reps) return;
                try {
                    body(r);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

ExperimentSpec ExperimentSpec::from_config(const KeyValueConfig& cfg) {
    ExperimentSpec spec;
    spec.model_name = cfg.get_string("model.name", "numerical_example");
    spec.threshold = cfg.require_double("model.threshold");

    spec.run.n0 = cfg.get_int("budget.n0", 600);
    spec.run.nt = cfg.get_int("budget.nt", 100);
    spec.run.tau = cfg.get_int("budget.tau", 10);
    spec.run.ratio = cfg.get_double("budget.ratio", 0.3);

    spec.run.grid.k_min = cfg.get_int("grid.k_min", 1);
    spec.run.grid.k_max_cap = cfg.get_int("grid.k_max_cap", 6);
    spec.run.grid.samples_per_param = cfg.get_double("grid.samples_per_param", 5.0);

    spec.run.em.restarts = cfg.get_int("em.restarts", 10);
    spec.run.em.rel_tol = cfg.get_double("em.rel_tol", 0.01);
    spec.run.em.max_iters = cfg.get_int("em.max_iters", 200);
    spec.run.em.cond_threshold = cfg.get_double("em.cond_threshold", 1e5);

    spec.run.min_weighted_records = cfg.get_int("driver.min_weighted_records", 5);
    spec.run.variance_floor = cfg.get_double("sampling.variance_floor", 0.0);
    spec.run.defensive_weight = cfg.get_double("sampling.defensive_weight", 0.0);
    spec.run.defensive_scale = cfg.get_double("sampling.defensive_scale", 1.0);

    spec.run.seed = cfg.get_u64("run.seed", 1);
    spec.repetitions = cfg.get_int("run.repetitions", 1);
    if (spec.repetitions < 1) throw ConfigError("run.repetitions must be >= 1");
    if (cfg.has("run.reference_p")) spec.reference_p = cfg.require_double("run.reference_p");

    spec.baseline_cmc = cfg.get_bool("baseline.cmc", false);
    spec.baseline_optimal = cfg.get_bool("baseline.optimal_sis", false);
    spec.baseline_n = cfg.get_int("baseline.n", 1000);
    spec.baseline_m_ratio = cfg.get_double("baseline.m_ratio", 0.3);
    return spec;
}

double sample_mean(const std::vector<double>& xs) {
    if (xs.empty()) throw InputError("sample_mean: empty sample");
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) throw InputError("sample_sd: need at least two values");
    const double mean = sample_mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

std::uint64_t repetition_seed(std::uint64_t master, const std::string& method, int rep) {
    RngStream stream = RngStream(master).derive(method).derive(static_cast<std::uint64_t>(rep));
    return stream.next_u64();
}

std::vector<double> run_cmc_repetitions(const SimulationModel& model, long n, int reps,
                                        std::uint64_t master_seed) {
    if (n < 1) throw ConfigError("run_cmc_repetitions: n must be >= 1");
    const InputDensity& f = model.input_density();
    std::vector<double> out(reps);
    for (int r = 0; r < reps; ++r) {
        RngStream rng(repetition_seed(master_seed, "cmc", r));
        long failures = 0;
        for (long i = 0; i < n; ++i) {
            const Vec x = f.sample(rng);
            failures += model.simulate(x, rng);
        }
        out[r] = p_cmc(failures, n);
    }
    return out;
}

std::vector<double> run_optimal_sis_repetitions(const OracleModel& model, long n,
                                                double m_ratio, int reps,
                                                std::uint64_t master_seed) {
    if (n < 1) throw ConfigError("run_optimal_sis_repetitions: n must be >= 1");
    if (!(m_ratio > 0.0 && m_ratio <= 1.0))
        throw ConfigError("run_optimal_sis_repetitions: m_ratio must lie in (0, 1]");
    const InputDensity& f = model.input_density();
    const OptimalSisDensity1d qstar(model, f, n);
    const long m = std::max<long>(1, std::llround(m_ratio * static_cast<double>(n)));

    std::vector<double> out(reps);
    for (int r = 0; r < reps; ++r) {
        RngStream rng(repetition_seed(master_seed, "optimal_sis", r));
        RngStream draw_rng = rng.derive("draw");
        std::vector<double> s_true(m), w(m);
        std::vector<Vec> xs(m);
        for (long i = 0; i < m; ++i) {
            const double x = qstar.sample(draw_rng);
            Vec xv(1);
            xv[0] = x;
            xs[i] = xv;
            s_true[i] = model.true_s(xv);
            w[i] = f.pdf(xv) / qstar.pdf(x);
        }
        const std::vector<long> alloc = round_to_budget(optimal_allocation_exact(s_true, n), n);
        RngStream sim_rng = rng.derive("sim");
        double acc = 0.0;
        for (long i = 0; i < m; ++i) {
            RngStream record_rng = sim_rng.derive(static_cast<std::uint64_t>(i));
            int failures = 0;
            for (long j = 0; j < alloc[i]; ++j) {
                RngStream rep = record_rng.derive(static_cast<std::uint64_t>(j));
                failures += model.simulate(xs[i], rep);
            }
            acc += (static_cast<double>(failures) / static_cast<double>(alloc[i])) * w[i];
        }
        out[r] = acc / static_cast<double>(m);
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int jobs) {
    const auto model = make_model(spec.model_name, spec.threshold);
    ExperimentResult result;

    // CE-SIS repetitions.
    std::vector<double> estimates(spec.repetitions);
    std::vector<long> sims(spec.repetitions);
    std::vector<std::uint64_t> seeds(spec.repetitions);
    std::string report_json, report_csv;
    parallel_for(spec.repetitions, jobs, [&](int r) {
        RunConfig config = spec.run;
        config.seed = repetition_seed(spec.run.seed, "ce_sis", r);
        seeds[r] = config.seed;
        const RunReport report = run_ce_sis(*model, config);
        estimates[r] = report.p_final;
        sims[r] = report.total_sims;
        if (r == 0) {
            report_json = report.to_json();
            report_csv = report.iterations_csv();
        }
    });
    result.first_report_json = std::move(report_json);
    result.first_report_csv = std::move(report_csv);
    for (int r = 0; r < spec.repetitions; ++r)
        result.reps.push_back({"ce_sis", r, seeds[r], estimates[r], sims[r]});

    // Reference probability for CMC ratios.
    if (spec.reference_p) {
        result.reference_p = *spec.reference_p;
    } else if (const auto* oracle = dynamic_cast<const OracleModel*>(model.get())) {
        result.reference_p = oracle_p(*oracle, model->input_density());
    } else {
        result.reference_p = sample_mean(estimates);
    }

    const auto add_summary = [&](const std::string& method, const std::vector<double>& xs,
                                 long n_total) {
        MethodSummary row;
        row.method = method;
        row.mean = sample_mean(xs);
        row.std_error = xs.size() > 1 ? sample_sd(xs) : 0.0;
        row.ratio = row.std_error > 0.0
                        ? cmc_ratio(n_total, row.std_error, result.reference_p)
                        : 0.0;
        row.n_total = n_total;
        result.summary.push_back(row);
    };
    add_summary("ce_sis", estimates, spec.run.total_budget());

    if (spec.baseline_cmc) {
        const auto cmc = run_cmc_repetitions(*model, spec.run.total_budget(),
                                             spec.repetitions, spec.run.seed);
        for (int r = 0; r < spec.repetitions; ++r)
            result.reps.push_back({"cmc", r, repetition_seed(spec.run.seed, "cmc", r), cmc[r],
                                   spec.run.total_budget()});
        add_summary("cmc", cmc, spec.run.total_budget());
    }
    if (spec.baseline_optimal) {
        const auto* oracle = dynamic_cast<const OracleModel*>(model.get());
        if (oracle == nullptr)
            throw ConfigError("optimal_sis baseline requires a model with known s(x)");
        const auto opt = run_optimal_sis_repetitions(*oracle, spec.baseline_n,
                                                     spec.baseline_m_ratio, spec.repetitions,
                                                     spec.run.seed);
        for (int r = 0; r < spec.repetitions; ++r)
            result.reps.push_back({"optimal_sis", r,
                                   repetition_seed(spec.run.seed, "optimal_sis", r), opt[r],
                                   spec.baseline_n});
        add_summary("optimal_sis", opt, spec.baseline_n);
    }
    return result;
}

std::string summary_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "method,mean,std_error,cmc_ratio,n_total\n";
    for (const auto& row : result.summary) {
        out << row.method << ',';
        format_value(out, row.mean);
        out << ',';
        format_value(out, row.std_error);
        out << ',';
        format_value(out, row.ratio);
        out << ',' << row.n_total << '\n';
    }
    return out.str();
}

std::string results_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "method,rep,seed,estimate,total_sims\n";
    for (const auto& row : result.reps) {
        out << row.method << ',' << row.rep << ',' << row.seed << ',';
        format_value(out, row.estimate);
        out << ',' << row.sims << '\n';
    }
    return out.str();
}

void write_outputs(const ExperimentResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream file(fs::path(out_dir) / name, std::ios::binary);
        if (!file) throw Error("cannot write output file: " + name);
        file << body;
    };
    write("summary.csv", summary_csv(result));
    write("results.csv", results_csv(result));
    if (!result.first_report_json.empty()) write("run_report.json", result.first_report_json);
    if (!result.first_report_csv.empty()) write("iterations.csv", result.first_report_csv);
}

}  // namespace cesis
