#pragma once

#include <string>
#include <vector>

#include "cesis/estimators.hpp"
#include "cesis/weighted_em.hpp"

namespace cesis {

struct CicRow {
    int k = 0;
    int d = 0;
    double ce = 0.0;
    double penalty = 0.0;
    double cic = 0.0;
    bool infeasible = false;
};

struct CicTrace {
    std::vector<CicRow> rows;

    // CSV block: header k,d,ce,penalty,cic,infeasible then one row per k.
    std::string to_csv() const;
};

struct KGrid {
    int k_min = 1;
    int k_max_cap = 6;
    // Effective k_max caps param_dimension(k, p) at
    // positive-weight-count / samples_per_param.
    double samples_per_param = 5.0;

    int effective_k_max(int positive_count, int p) const;
};

// Eq. (25): -(1 / total record count) * sum over all records of
// v_i log q(x_i; theta). All-zero weights give 0 (empty sum).
double aggregated_ce(const GmmParams& theta, const Dataset& dataset);

// Eq. (26): the penalty scale K-hat is the current aggregated estimate.
double k_hat_sis(const Dataset& dataset);

// Eq. (24): ce + k_hat * d / total_m.
double cic_sis(double ce_value, double k_hat, int d, long total_m);

struct SelectResult {
    int k_star = 0;
    GmmParams theta;
    CicTrace trace;
};

// Grid search over k: fit each candidate with weighted EM, score by CIC,
// stop the scan at the first infeasible k, return the CIC minimizer (ties
// toward smaller k). Throws FitError when no candidate is feasible.
SelectResult select_k(const Dataset& dataset, const KGrid& grid, const EmSettings& settings,
                      RngStream& rng);

}  // namespace cesis
