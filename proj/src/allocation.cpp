#include "cesis/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cesis/error.hpp"

namespace cesis {

std::vector<double> allocation_scores(const AllocationInput& input) {
    std::vector<double> scores(input.weights.size());
    for (std::size_t i = 0; i < input.weights.size(); ++i) {
        const double w = input.weights[i];
        if (!std::isfinite(w)) throw InputError("allocation_scores: non-finite weight");
        scores[i] = std::sqrt(std::max(w - input.p_ref, 0.0));
    }
    return scores;
}

std::vector<long> allocate(const AllocationInput& input) {
    const std::size_t m = input.weights.size();
    if (m == 0) throw InputError("allocate: empty weight vector");
    if (static_cast<long>(m) != input.m_t)
        throw ConfigError("allocate: m_t must equal the number of weights");
    if (input.n_t < input.m_t)
        throw ConfigError("allocate: n_t must be at least m_t");

    const std::vector<double> scores = allocation_scores(input);
    const double total = std::accumulate(scores.begin(), scores.end(), 0.0);

    std::vector<double> raw(m, 1.0);
    if (total > 0.0) {
        for (std::size_t i = 0; i < m; ++i) raw[i] = input.n_t * scores[i] / total;
    }
    return round_to_budget(raw, input.n_t);
}

std::vector<long> round_to_budget(const std::vector<double>& raw, long budget) {
    const std::size_t m = raw.size();
    if (m == 0) throw InputError("round_to_budget: empty input");
    if (budget < static_cast<long>(m))
        throw ConfigError("round_to_budget: budget below one replication per input");

    std::vector<long> alloc(m);
    for (std::size_t i = 0; i < m; ++i) {
        // round half away from zero, platform-independent
        alloc[i] = std::max<long>(1, std::llround(raw[i]));
    }

    // Spread the rounding discrepancy across the largest N_i, one unit each,
    // cycling if a single pass is not enough; never drop any N_i below 1.
    long diff = std::accumulate(alloc.begin(), alloc.end(), 0L) - budget;
    if (diff != 0) {
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return alloc[a] > alloc[b]; });
        std::size_t cursor = 0;
        while (diff != 0) {
            const std::size_t i = order[cursor % m];
            if (diff > 0) {
                if (alloc[i] > 1) {
                    --alloc[i];
                    --diff;
                }
            } else {
                ++alloc[i];
                ++diff;
            }
            ++cursor;
        }
    }
    return alloc;
}

}  // namespace cesis
