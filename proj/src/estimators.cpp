#include "cesis/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "cesis/error.hpp"
#include "cesis/quadrature.hpp"

namespace cesis {

double s_hat(const SimRecord& record) {
    if (record.N < 1) throw InputError("s_hat: N must be >= 1");
    if (record.failures < 0 || record.failures > record.N)
        throw InputError("s_hat: failures must lie in [0, N]");
    return static_cast<double>(record.failures) / record.N;
}

double h_hat(double s, long n_total) {
    if (!(s >= 0.0 && s <= 1.0)) throw InputError("h_hat: s_hat outside [0,1]");
    if (n_total < 1) throw InputError("h_hat: n_total must be >= 1");
    return std::sqrt(s * (1.0 - s) / static_cast<double>(n_total) + s * s);
}

void Dataset::append(IterationBatch batch) {
    if (batch.records.empty()) throw InputError("Dataset::append: empty batch");
    const int expected = static_cast<int>(batches_.size());
    for (const auto& r : batch.records) {
        if (r.iteration != expected)
            throw InputError("Dataset::append: iteration indices must be contiguous");
    }
    batches_.push_back(std::move(batch));
}

long Dataset::total_records() const {
    long n = 0;
    for (const auto& b : batches_) n += static_cast<long>(b.records.size());
    return n;
}

int Dataset::positive_weight_count() const {
    int n = 0;
    for (const auto& b : batches_)
        for (const auto& r : b.records)
            if (r.v > 0.0) ++n;
    return n;
}

std::vector<WeightedSample> Dataset::weighted_samples() const {
    std::vector<WeightedSample> out;
    out.reserve(total_records());
    for (const auto& b : batches_)
        for (const auto& r : b.records) out.push_back({r.x, r.v});
    return out;
}

double p_bar_sis(const Dataset& dataset) {
    const auto& batches = dataset.batches();
    if (batches.empty()) throw InputError("p_bar_sis: empty dataset");
    double acc = 0.0;
    for (const auto& b : batches) {
        double batch_sum = 0.0;
        for (const auto& r : b.records) batch_sum += s_hat(r) * r.w;
        acc += batch_sum / static_cast<double>(b.records.size());
    }
    return acc / static_cast<double>(batches.size());
}

double p_cmc(long failures, long n) {
    if (n < 1) throw InputError("p_cmc: n must be >= 1");
    if (failures < 0 || failures > n) throw InputError("p_cmc: failures must lie in [0, n]");
    return static_cast<double>(failures) / static_cast<double>(n);
}

double cmc_ratio(long n_used, double se, double p_ref) {
    if (n_used < 1) throw InputError("cmc_ratio: n_used must be >= 1");
    if (!(se > 0.0)) throw InputError("cmc_ratio: se must be positive");
    if (!(p_ref > 0.0 && p_ref < 1.0)) throw InputError("cmc_ratio: p_ref must lie in (0,1)");
    return static_cast<double>(n_used) * se * se / (p_ref * (1.0 - p_ref));
}

std::vector<double> optimal_allocation_exact(const std::vector<double>& s_values, long n) {
    if (s_values.empty()) throw InputError("optimal_allocation_exact: empty input");
    if (n < 1) throw InputError("optimal_allocation_exact: n must be >= 1");
    const double nn = static_cast<double>(n);
    std::vector<double> terms(s_values.size());
    double total = 0.0;
    for (std::size_t i = 0; i < s_values.size(); ++i) {
        const double s = s_values[i];
        if (!(s >= 0.0 && s <= 1.0))
            throw InputError("optimal_allocation_exact: s outside [0,1]");
        terms[i] = std::sqrt(nn * (1.0 - s) / (1.0 + (nn - 1.0) * s));
        total += terms[i];
    }
    std::vector<double> out(s_values.size());
    if (total <= 0.0) {
        // Every s_i = 1: each Eq.-(6) term is its limit 0; share uniformly.
        std::fill(out.begin(), out.end(), nn / static_cast<double>(s_values.size()));
        return out;
    }
    for (std::size_t i = 0; i < s_values.size(); ++i) out[i] = nn * terms[i] / total;
    return out;
}

OptimalSisDensity1d::OptimalSisDensity1d(const OracleModel& model, const InputDensity& f,
                                         long n_total) {
    if (model.dim() != 1 || f.dim() != 1)
        throw InputError("OptimalSisDensity1d: requires a one-dimensional model");
    const auto [lo, hi] = f.support_hint();

    auto unnormalized = [&](double t) {
        Vec xv(1);
        xv[0] = t;
        return f.pdf(xv) * h_hat(model.true_s(xv), n_total);
    };
    c_q_ = integrate(unnormalized, lo, hi, 1e-10);
    if (!(c_q_ > 0.0)) throw NumericsError("OptimalSisDensity1d: zero normalizing constant");

    // Dense uniform tabulation; fine enough that trapezoid CDF error is far
    // below the 1e-6 normalization check used in the self-test.
    const int nodes = 32769;
    grid_.resize(nodes);
    pdf_.resize(nodes);
    cdf_.resize(nodes);
    const double step = (hi - lo) / (nodes - 1);
    for (int i = 0; i < nodes; ++i) {
        grid_[i] = lo + step * i;
        pdf_[i] = unnormalized(grid_[i]) / c_q_;
    }
    cdf_[0] = 0.0;
    for (int i = 1; i < nodes; ++i)
        cdf_[i] = cdf_[i - 1] + 0.5 * step * (pdf_[i - 1] + pdf_[i]);
    // Remove the residual trapezoid error so inverse-CDF hits 1 exactly.
    const double total = cdf_.back();
    if (!(std::abs(total - 1.0) < 1e-4))
        throw NumericsError("OptimalSisDensity1d: tabulated mass far from 1");
    for (double& c : cdf_) c /= total;
}

double OptimalSisDensity1d::pdf(double x) const {
    if (x <= grid_.front() || x >= grid_.back()) return 0.0;
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - grid_.begin());
    const double t = (x - grid_[j - 1]) / (grid_[j] - grid_[j - 1]);
    return pdf_[j - 1] + t * (pdf_[j] - pdf_[j - 1]);
}

double OptimalSisDensity1d::sample(RngStream& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return grid_.front();
    if (it == cdf_.end()) return grid_.back();
    const std::size_t j = static_cast<std::size_t>(it - cdf_.begin());
    const double span = cdf_[j] - cdf_[j - 1];
    const double t = span > 0.0 ? (u - cdf_[j - 1]) / span : 0.0;
    return grid_[j - 1] + t * (grid_[j] - grid_[j - 1]);
}

}  // namespace cesis
