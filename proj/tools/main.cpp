#include <CLI11.hpp>
#include <iomanip>
#include <iostream>
#include <memory>
#include <string>

#include "cesis/config.hpp"
#include "cesis/error.hpp"
#include "cesis/harness.hpp"
#include "cesis/quadrature.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonFlags {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int reps = 0;
    int jobs = 1;
};

cesis::ExperimentSpec load_spec(const CommonFlags& flags) {
    auto cfg = cesis::KeyValueConfig::from_file(flags.config_path);
    auto spec = cesis::ExperimentSpec::from_config(cfg);
    if (flags.seed_set) spec.run.seed = flags.seed;
    if (flags.reps > 0) spec.repetitions = flags.reps;
    return spec;
}

int cmd_run(const CommonFlags& flags) {
    auto spec = load_spec(flags);
    auto result = cesis::run_experiment(spec, flags.jobs);
    cesis::write_outputs(result, flags.out_dir);
    std::cout << cesis::summary_csv(result);
    return kExitOk;
}

int cmd_baselines(const CommonFlags& flags) {
    auto spec = load_spec(flags);
    spec.baseline_cmc = true;
    spec.baseline_optimal = true;
    auto result = cesis::run_experiment(spec, flags.jobs);
    cesis::write_outputs(result, flags.out_dir);
    std::cout << cesis::summary_csv(result);
    return kExitOk;
}

int cmd_oracle_p(const CommonFlags& flags) {
    const auto spec = load_spec(flags);
    const auto model = cesis::make_model(spec.model_name, spec.threshold);
    const auto* oracle = dynamic_cast<const cesis::OracleModel*>(model.get());
    if (oracle == nullptr)
        throw cesis::ConfigError("oracle-p requires a model with known s(x)");
    const double p = cesis::oracle_p(*oracle, model->input_density());
    std::cout << std::setprecision(10) << p << "\n";
    return kExitOk;
}

int cmd_calibrate_l(const CommonFlags& flags, double target_p, double lo, double hi) {
    const auto spec = load_spec(flags);
    const auto probe = cesis::make_model(spec.model_name, 0.0);
    if (dynamic_cast<const cesis::OracleModel*>(probe.get()) == nullptr)
        throw cesis::ConfigError("calibrate-l requires a model with known s(x)");
    auto model_at = [&](double l) -> std::unique_ptr<cesis::OracleModel> {
        auto m = cesis::make_model(spec.model_name, l);
        auto* oracle = dynamic_cast<cesis::OracleModel*>(m.get());
        if (oracle == nullptr)
            throw cesis::ConfigError("calibrate-l requires a model with known s(x)");
        (void)m.release();
        return std::unique_ptr<cesis::OracleModel>(oracle);
    };
    const double l = cesis::calibrate_threshold(model_at, probe->input_density(), target_p,
                                                lo, hi);
    std::cout << std::setprecision(12) << l << "\n";
    return kExitOk;
}

int cmd_kl_diag(const CommonFlags& flags) {
    const auto spec = load_spec(flags);
    const auto model = cesis::make_model(spec.model_name, spec.threshold);
    const auto* oracle = dynamic_cast<const cesis::OracleModel*>(model.get());
    if (oracle == nullptr)
        throw cesis::ConfigError("kl-diag requires a model with known s(x)");

    cesis::RunConfig config = spec.run;
    const auto report = cesis::run_ce_sis(*model, config);

    const auto& f = model->input_density();
    const long n_total = config.total_budget();
    const cesis::OptimalSisDensity1d table(*oracle, f, n_total);
    const double c_q = table.normalizing_constant();
    auto qstar = [&](double x) {
        cesis::Vec xv(1);
        xv[0] = x;
        return f.pdf(xv) * cesis::h_hat(oracle->true_s(xv), n_total) / c_q;
    };
    const auto [lo, hi] = f.support_hint();

    std::cout << "iteration,kl\n" << std::setprecision(6);
    for (const auto& iter : report.iterations) {
        const double kl = cesis::kl_divergence(qstar, iter.theta_sample, lo, hi);
        std::cout << iter.t << ',' << kl << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-entropy importance sampling for stochastic simulators"};
    app.require_subcommand(1);

    CommonFlags flags;
    double target_p = 0.01;
    double cal_lo = 0.0;
    double cal_hi = 50.0;

    const auto add_common = [&](CLI::App* cmd, bool needs_out) {
        cmd->add_option("--config", flags.config_path, "key=value config file")->required();
        cmd->add_option("--seed", flags.seed, "override run.seed")
            ->each([&](const std::string&) { flags.seed_set = true; });
        cmd->add_option("--reps", flags.reps, "override run.repetitions");
        cmd->add_option("--jobs", flags.jobs, "worker threads for repetitions");
        if (needs_out) cmd->add_option("--out", flags.out_dir, "output directory");
    };

    auto* run = app.add_subcommand("run", "repeated CE-SIS experiment");
    add_common(run, true);
    auto* baselines = app.add_subcommand("baselines", "CE-SIS plus CMC and optimal-SIS");
    add_common(baselines, true);
    auto* oraclep = app.add_subcommand("oracle-p", "quadrature failure probability");
    add_common(oraclep, false);
    auto* calibrate = app.add_subcommand("calibrate-l", "threshold matching a target p");
    add_common(calibrate, false);
    calibrate->add_option("--target-p", target_p, "target failure probability")->required();
    calibrate->add_option("--lo", cal_lo, "lower threshold bracket");
    calibrate->add_option("--hi", cal_hi, "upper threshold bracket");
    auto* kldiag = app.add_subcommand("kl-diag", "per-iteration KL(q* || sampled density)");
    add_common(kldiag, false);

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(flags);
        if (baselines->parsed()) return cmd_baselines(flags);
        if (oraclep->parsed()) return cmd_oracle_p(flags);
        if (calibrate->parsed()) return cmd_calibrate_l(flags, target_p, cal_lo, cal_hi);
        if (kldiag->parsed()) return cmd_kl_diag(flags);
        std::cerr << "no subcommand\n";
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const cesis::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
