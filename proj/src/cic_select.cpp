#include "cesis/cic_select.hpp"

#include <cmath>
#include <sstream>

#include "cesis/error.hpp"

namespace cesis {

std::string CicTrace::to_csv() const {
    std::ostringstream out;
    out << "k,d,ce,penalty,cic,infeasible\n";
    out.precision(10);
    for (const auto& r : rows) {
        out << r.k << ',' << r.d << ',';
        if (r.infeasible) {
            out << ",,,";
        } else {
            out << r.ce << ',' << r.penalty << ',' << r.cic << ',';
        }
        out << (r.infeasible ? 1 : 0) << '\n';
    }
    return out.str();
}

int KGrid::effective_k_max(int positive_count, int p) const {
    if (samples_per_param <= 0.0)
        throw ConfigError("KGrid: samples_per_param must be positive");
    int k = 0;
    while (k < k_max_cap &&
           param_dimension(k + 1, p) * samples_per_param <= static_cast<double>(positive_count))
        ++k;
    return k;  // 0 means no candidate is affordable
}

double aggregated_ce(const GmmParams& theta, const Dataset& dataset) {
    const long total = dataset.total_records();
    if (total == 0) throw InputError("aggregated_ce: empty dataset");
    double acc = 0.0;
    for (const auto& b : dataset.batches()) {
        for (const auto& r : b.records) {
            if (r.v <= 0.0) continue;
            const double lp = gmm_log_pdf(theta, r.x);
            if (!std::isfinite(lp))
                throw FitError("aggregated_ce: zero density at a weighted sample");
            acc += r.v * lp;
        }
    }
    return -acc / static_cast<double>(total);
}

double k_hat_sis(const Dataset& dataset) {
    return p_bar_sis(dataset);
}

double cic_sis(double ce_value, double k_hat, int d, long total_m) {
    if (total_m < 1) throw InputError("cic_sis: total_m must be >= 1");
    if (d < 1) throw InputError("cic_sis: d must be >= 1");
    if (k_hat < 0.0) throw InputError("cic_sis: k_hat must be nonnegative");
    return ce_value + k_hat * d / static_cast<double>(total_m);
}

SelectResult select_k(const Dataset& dataset, const KGrid& grid, const EmSettings& settings,
                      RngStream& rng) {
    const int mpos = dataset.positive_weight_count();
    if (mpos == 0) throw FitError("select_k: dataset carries no positive weight");

    const auto samples = dataset.weighted_samples();
    const int p = static_cast<int>(samples.front().x.size());
    const long total_m = dataset.total_records();
    const double k_hat = k_hat_sis(dataset);

    const int k_max = grid.effective_k_max(mpos, p);
    if (k_max < 1) throw FitError("select_k: sample size affords no candidate order");
    // A configured k_min above the affordable range degrades to the largest
    // order the data can support rather than an empty grid.
    const int k_min = std::min(grid.k_min, k_max);

    CicTrace trace;
    int best = -1;
    GmmParams best_theta = GmmParams::standard(p);
    for (int k = k_min; k <= k_max; ++k) {
        auto fit = em_fit(k, samples, settings, rng.derive(static_cast<std::uint64_t>(k)));
        if (!fit) {
            trace.rows.push_back({k, param_dimension(k, p), 0.0, 0.0, 0.0, true});
            break;  // larger k only gets harder to fit
        }
        const int d = param_dimension(k, p);
        const double ce = aggregated_ce(fit->theta, dataset);
        const double penalty = k_hat * d / static_cast<double>(total_m);
        const double cic = cic_sis(ce, k_hat, d, total_m);
        trace.rows.push_back({k, d, ce, penalty, cic, false});
        if (best < 0 || cic < trace.rows[best].cic) {
            best = static_cast<int>(trace.rows.size()) - 1;
            best_theta = fit->theta;
        }
    }
    if (best < 0) throw FitError("select_k: no feasible mixture order");
    return {trace.rows[best].k, std::move(best_theta), std::move(trace)};
}

}  // namespace cesis
