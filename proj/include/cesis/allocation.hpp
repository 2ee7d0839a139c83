#pragma once

#include <vector>

namespace cesis {

struct AllocationInput {
    std::vector<double> weights;  // w_i = f(X_i)/q(X_i; theta_t)
    double p_ref = 0.0;           // previous iteration's aggregated estimate
    long n_t = 1;                 // simulation budget of this iteration
    long m_t = 1;                 // number of distinct inputs (= weights.size())
};

// Appendix-1 scores: sqrt of the positive part of (w_i - p_ref).
std::vector<double> allocation_scores(const AllocationInput& input);

// Replication counts per Algorithm 1 + the Appendix-2 rounding rule:
// N_i = max(1, round(n_t * score_i / sum)), then the rounding discrepancy
// is spread one unit at a time across the largest N_i. Sums to n_t.
std::vector<long> allocate(const AllocationInput& input);

// The Appendix-2 rounding rule alone: max(1, round(raw_i)), then spread the
// discrepancy from `budget` across the largest entries, one unit each,
// never dropping below 1. Requires budget >= raw.size().
std::vector<long> round_to_budget(const std::vector<double>& raw, long budget);

}  // namespace cesis
