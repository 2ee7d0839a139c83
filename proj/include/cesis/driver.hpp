#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cesis/cic_select.hpp"
#include "cesis/estimators.hpp"
#include "cesis/model_api.hpp"

namespace cesis {

struct RunConfig {
    long n0 = 600;        // iteration-0 exploration budget (m0 = n0)
    long nt = 100;        // per-iteration budget for t >= 1
    int tau = 10;         // number of refinement iterations
    double ratio = 0.3;   // m_t = max(1, round(ratio * nt))
    KGrid grid;
    EmSettings em;
    std::uint64_t seed = 1;
    std::optional<GmmParams> theta0;  // defaults to standard normal GMM

    // Minimum number of positive-weight records before fitting is attempted.
    int min_weighted_records = 5;

    // Sampling-side stabilizers (all off by default). The fitted mixture is
    // used verbatim for CE/CIC; only the density actually sampled from is
    // modified, and the likelihood ratios always use that sampled density,
    // so the estimator stays unbiased for any setting.
    double variance_floor = 0.0;     // eigenvalue floor (std-dev units)
    double defensive_weight = 0.0;   // mixture weight on the anchor component
    double defensive_scale = 1.0;    // anchor = theta0 with covariance * scale^2

    long total_budget() const { return n0 + static_cast<long>(tau) * nt; }
    long m_t(int t) const;
};

enum class IterationOutcome { Exploration, Fitted, ZeroFailureFallback, InfeasibleFallback };

struct IterationReport {
    int t = 0;
    IterationOutcome outcome = IterationOutcome::Exploration;
    int k_star = 0;             // 0 when no fit happened this iteration
    long m = 0;
    long sims = 0;
    double p_bar = 0.0;
    double min_w = 0.0;
    double max_w = 0.0;
    double frac_clamped = 0.0;  // fraction of allocation scores clamped to 0
    std::optional<GmmParams> theta_fit;
    GmmParams theta_sample = GmmParams::standard(1);
    CicTrace trace;
};

struct RunReport {
    double p_final = 0.0;
    long total_sims = 0;
    std::uint64_t seed = 0;
    std::vector<IterationReport> iterations;
    Dataset dataset;

    std::string to_json() const;
    // iteration,k_star,p_bar,sims_used
    std::string iterations_csv() const;
};

// Returns true when the dataset has too few weighted records to support a
// fit; the driver then reuses the previous sampling density.
bool zero_failure_fallback(const Dataset& dataset, int min_weighted_records);

// Algorithm 1 end to end on one seed.
RunReport run_ce_sis(const SimulationModel& model, const RunConfig& config);

}  // namespace cesis
