#pragma once

#include <optional>
#include <vector>

#include "cesis/densities.hpp"
#include "cesis/rng.hpp"

namespace cesis {

// One data point for the weighted cross-entropy fit. v is the point's
// contribution weight h_hat(x) * w(x), frozen at the time x was sampled.
struct WeightedSample {
    Vec x;
    double v = 0.0;
};

struct EmSettings {
    int restarts = 10;
    double rel_tol = 0.01;
    int max_iters = 200;
    double cond_threshold = 1e5;
};

// -(1/M) sum_i v_i log q(x_i; theta), M = samples.size().
double weighted_ce_objective(const GmmParams& theta, const std::vector<WeightedSample>& samples);

// Posterior component memberships gamma_j(x), computed in log space.
std::vector<double> responsibilities(const GmmParams& theta, const Vec& x);

// One EM update of all parameters. Throws FitError on a degenerate
// component (responsibility mass < 1e-12 or covariance not PD).
GmmParams em_step(const GmmParams& theta, const std::vector<WeightedSample>& samples);

struct EmResult {
    GmmParams theta;
    double objective;
};

// Best-of-`settings.restarts` weighted EM fit of a k-component mixture.
// Returns nullopt (infeasible) when fewer than k samples carry positive
// weight or more than half the restarts end ill-conditioned/degenerate.
std::optional<EmResult> em_fit(int k, const std::vector<WeightedSample>& samples,
                               const EmSettings& settings, RngStream rng);

}  // namespace cesis
