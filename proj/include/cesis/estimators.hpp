#pragma once

#include <vector>

#include "cesis/densities.hpp"
#include "cesis/model_api.hpp"
#include "cesis/weighted_em.hpp"

namespace cesis {

// One simulated input with its replication outcomes. w and v are frozen at
// sampling time: w = f(x)/q(x; theta of the batch), v = h_hat(s_hat) * w.
struct SimRecord {
    Vec x;
    int iteration = 0;
    double w = 0.0;
    int N = 1;
    int failures = 0;
    double v = 0.0;
};

double s_hat(const SimRecord& record);

// Eq.-(22) plug-in: sqrt(s(1-s)/n + s^2) with n the total run budget.
double h_hat(double s_hat_value, long n_total);

// One CE iteration's batch: the sampling parameters and its records.
struct IterationBatch {
    GmmParams theta;
    std::vector<SimRecord> records;
};

// Aggregated data across iterations 0..t (Algorithm 1's D).
class Dataset {
public:
    void append(IterationBatch batch);

    int iterations() const { return static_cast<int>(batches_.size()); }
    const std::vector<IterationBatch>& batches() const { return batches_; }
    long total_records() const;
    int positive_weight_count() const;

    // Flattened (x, v) view consumed by the weighted EM fit.
    std::vector<WeightedSample> weighted_samples() const;

private:
    std::vector<IterationBatch> batches_;
};

// Eq. (23): the aggregated SIS estimate over all batches.
double p_bar_sis(const Dataset& dataset);

double p_cmc(long failures, long n);

// n_used * se^2 / (p_ref (1 - p_ref)): fraction of the CMC budget needed
// for equal precision.
double cmc_ratio(long n_used, double se, double p_ref);

// Exact Eq.-(6) allocation (real-valued, pre-rounding). All-zero terms
// (every s_i = 1) fall back to the uniform n/m limit.
std::vector<double> optimal_allocation_exact(const std::vector<double>& s_values, long n);

// Tabulated optimal SIS density q*(x) proportional to f(x) h(x), with h
// per Eq. (5); exposes interpolated pdf and inverse-CDF sampling.
class OptimalSisDensity1d {
public:
    OptimalSisDensity1d(const OracleModel& model, const InputDensity& f, long n_total);

    double pdf(double x) const;
    double sample(RngStream& rng) const;

    // integral of the unnormalized f*h (the C_q of Eq. (5)).
    double normalizing_constant() const { return c_q_; }
    std::pair<double, double> range() const { return {grid_.front(), grid_.back()}; }

private:
    std::vector<double> grid_;
    std::vector<double> pdf_;  // normalized density at grid nodes
    std::vector<double> cdf_;  // trapezoid CDF at grid nodes
    double c_q_ = 0.0;
};

}  // namespace cesis
