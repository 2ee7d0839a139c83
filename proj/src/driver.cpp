#include "cesis/driver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "cesis/allocation.hpp"
#include "cesis/error.hpp"

namespace cesis {

namespace {

// Density actually sampled at iteration t: the fitted mixture, optionally
// variance-floored, optionally blended with the exploration density. Both
// transforms keep the result a plain Gaussian mixture.
GmmParams sampling_density(const GmmParams& fit, const GmmParams& theta0,
                           const RunConfig& config) {
    GmmParams out = fit.with_variance_floor(config.variance_floor);
    const double lambda = config.defensive_weight;
    if (lambda <= 0.0) return out;
    if (lambda >= 1.0) throw ConfigError("defensive_weight must lie in [0, 1)");
    if (config.defensive_scale <= 0.0) throw ConfigError("defensive_scale must be positive");
    const double var_scale = config.defensive_scale * config.defensive_scale;
    std::vector<double> alpha;
    std::vector<Vec> mu;
    std::vector<Mat> sigma;
    for (int j = 0; j < theta0.k(); ++j) {
        alpha.push_back(lambda * theta0.alpha()[j]);
        mu.push_back(theta0.mu()[j]);
        sigma.push_back(var_scale * theta0.sigma()[j]);
    }
    for (int j = 0; j < out.k(); ++j) {
        alpha.push_back((1.0 - lambda) * out.alpha()[j]);
        mu.push_back(out.mu()[j]);
        sigma.push_back(out.sigma()[j]);
    }
    return GmmParams(std::move(alpha), std::move(mu), std::move(sigma));
}

// Simulate N replications at x; replication j uses its own derived stream so
// a parallel execution would produce identical results.
int run_replications(const SimulationModel& model, const Vec& x, long n_reps,
                     RngStream& record_rng) {
    int failures = 0;
    for (long j = 0; j < n_reps; ++j) {
        RngStream rep = record_rng.derive(static_cast<std::uint64_t>(j));
        failures += model.simulate(x, rep);
    }
    return failures;
}

IterationBatch simulate_batch(const SimulationModel& model, const GmmParams& theta,
                              int t, const std::vector<Vec>& xs, const std::vector<double>& ws,
                              const std::vector<long>& alloc, long n_total,
                              RngStream& iter_rng) {
    IterationBatch batch{theta, {}};
    batch.records.reserve(xs.size());
    RngStream sim_rng = iter_rng.derive("sim");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        RngStream record_rng = sim_rng.derive(static_cast<std::uint64_t>(i));
        SimRecord rec;
        rec.x = xs[i];
        rec.iteration = t;
        rec.w = ws[i];
        rec.N = static_cast<int>(alloc[i]);
        rec.failures = run_replications(model, xs[i], alloc[i], record_rng);
        rec.v = h_hat(s_hat(rec), n_total) * rec.w;
        batch.records.push_back(std::move(rec));
    }
    return batch;
}

nlohmann::json theta_json(const GmmParams& theta) {
    return nlohmann::json::parse(theta.to_json());
}

const char* outcome_name(IterationOutcome o) {
    switch (o) {
        case IterationOutcome::Exploration: return "exploration";
        case IterationOutcome::Fitted: return "fitted";
        case IterationOutcome::ZeroFailureFallback: return "zero_failure_fallback";
        case IterationOutcome::InfeasibleFallback: return "infeasible_fallback";
    }
    return "unknown";
}

}  // namespace

long RunConfig::m_t(int t) const {
    if (t == 0) return n0;
    return std::max<long>(1, std::llround(ratio * static_cast<double>(nt)));
}

bool zero_failure_fallback(const Dataset& dataset, int min_weighted_records) {
    return dataset.positive_weight_count() < min_weighted_records;
}

RunReport run_ce_sis(const SimulationModel& model, const RunConfig& config) {
    if (config.n0 < 1 || config.nt < 1 || config.tau < 0)
        throw ConfigError("run_ce_sis: invalid budget schedule");
    if (!(config.ratio > 0.0 && config.ratio <= 1.0))
        throw ConfigError("run_ce_sis: ratio must lie in (0, 1]");

    const int p = model.dim();
    const InputDensity& f = model.input_density();
    const GmmParams theta0 = config.theta0 ? *config.theta0 : GmmParams::standard(p);
    if (theta0.dim() != p) throw ConfigError("run_ce_sis: theta0 dimension mismatch");

    const long n_total = config.total_budget();
    RngStream root(config.seed);

    RunReport report;
    report.seed = config.seed;

    GmmParams theta_sample = theta0;

    for (int t = 0; t <= config.tau; ++t) {
        RngStream iter_rng = root.derive(static_cast<std::uint64_t>(t));
        const long n_t = (t == 0) ? config.n0 : config.nt;
        const long m_t = config.m_t(t);

        IterationReport iter;
        iter.t = t;
        iter.m = m_t;

        if (t > 0) {
            if (zero_failure_fallback(report.dataset, config.min_weighted_records)) {
                iter.outcome = IterationOutcome::ZeroFailureFallback;
            } else {
                try {
                    RngStream em_rng = iter_rng.derive("em");
                    SelectResult sel = select_k(report.dataset, config.grid, config.em, em_rng);
                    iter.outcome = IterationOutcome::Fitted;
                    iter.k_star = sel.k_star;
                    iter.trace = std::move(sel.trace);
                    iter.theta_fit = sel.theta;
                    theta_sample = sampling_density(sel.theta, theta0, config);
                } catch (const FitError&) {
                    iter.outcome = IterationOutcome::InfeasibleFallback;
                }
            }
        }
        iter.theta_sample = theta_sample;

        // Draw the batch inputs and their frozen likelihood ratios.
        RngStream draw_rng = iter_rng.derive("draw");
        std::vector<Vec> xs(m_t);
        std::vector<double> ws(m_t);
        for (long i = 0; i < m_t; ++i) {
            xs[i] = gmm_sample(theta_sample, draw_rng);
            ws[i] = std::exp(f.log_pdf(xs[i]) - gmm_log_pdf(theta_sample, xs[i]));
        }

        std::vector<long> alloc;
        if (t == 0) {
            alloc.assign(m_t, 1);
            iter.frac_clamped = 0.0;
        } else {
            const double p_prev = p_bar_sis(report.dataset);
            AllocationInput ain{ws, p_prev, n_t, m_t};
            const auto scores = allocation_scores(ain);
            long clamped = 0;
            for (double s : scores)
                if (s == 0.0) ++clamped;
            iter.frac_clamped = static_cast<double>(clamped) / static_cast<double>(m_t);
            alloc = allocate(ain);
        }
        iter.min_w = *std::min_element(ws.begin(), ws.end());
        iter.max_w = *std::max_element(ws.begin(), ws.end());

        IterationBatch batch =
            simulate_batch(model, theta_sample, t, xs, ws, alloc, n_total, iter_rng);
        long sims = 0;
        for (const auto& r : batch.records) sims += r.N;
        iter.sims = sims;
        report.total_sims += sims;
        report.dataset.append(std::move(batch));

        iter.p_bar = p_bar_sis(report.dataset);
        report.iterations.push_back(std::move(iter));
    }

    report.p_final = report.iterations.back().p_bar;
    return report;
}

std::string RunReport::to_json() const {
    nlohmann::json out;
    out["p_final"] = p_final;
    out["total_sims"] = total_sims;
    out["seed"] = seed;
    out["iterations"] = nlohmann::json::array();
    for (const auto& it : iterations) {
        nlohmann::json j;
        j["t"] = it.t;
        j["outcome"] = outcome_name(it.outcome);
        j["k_star"] = it.k_star;
        j["m"] = it.m;
        j["sims"] = it.sims;
        j["p_bar"] = it.p_bar;
        j["min_w"] = it.min_w;
        j["max_w"] = it.max_w;
        j["frac_clamped"] = it.frac_clamped;
        if (it.theta_fit) j["theta_fit"] = theta_json(*it.theta_fit);
        j["theta_sample"] = theta_json(it.theta_sample);
        if (!it.trace.rows.empty()) j["cic_trace"] = it.trace.to_csv();
        out["iterations"].push_back(std::move(j));
    }
    return out.dump(2);
}

std::string RunReport::iterations_csv() const {
    std::ostringstream out;
    out.precision(10);
    out << "iteration,k_star,p_bar,sims_used\n";
    for (const auto& it : iterations)
        out << it.t << ',' << it.k_star << ',' << it.p_bar << ',' << it.sims << '\n';
    return out.str();
}

}  // namespace cesis
