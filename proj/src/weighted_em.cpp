#include "cesis/weighted_em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cesis/error.hpp"

namespace cesis {

namespace {

constexpr double kMinComponentWeight = 1e-12;

// Weighted mean and (biased) weighted covariance of the whole sample.
void weighted_moments(const std::vector<WeightedSample>& samples, Vec& mean, Mat& cov) {
    const int p = static_cast<int>(samples.front().x.size());
    double total = 0.0;
    mean = Vec::Zero(p);
    for (const auto& s : samples) {
        total += s.v;
        mean += s.v * s.x;
    }
    if (total <= 0.0) throw FitError("weighted_moments: no effective samples");
    mean /= total;
    cov = Mat::Zero(p, p);
    for (const auto& s : samples) {
        const Vec d = s.x - mean;
        cov += s.v * (d * d.transpose());
    }
    cov /= total;
}

// Draw k distinct indices without replacement, probability proportional to v.
std::vector<int> weighted_draw_without_replacement(const std::vector<WeightedSample>& samples,
                                                   int k, RngStream& rng) {
    std::vector<double> weights(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) weights[i] = samples[i].v;
    std::vector<int> picked;
    picked.reserve(k);
    for (int draw = 0; draw < k; ++draw) {
        const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (total <= 0.0) throw FitError("initialization: not enough weighted samples");
        const std::size_t idx = rng.categorical(weights);
        picked.push_back(static_cast<int>(idx));
        weights[idx] = 0.0;
    }
    return picked;
}

GmmParams random_init(int k, const std::vector<WeightedSample>& samples, RngStream& rng) {
    const int p = static_cast<int>(samples.front().x.size());
    Vec gmean;
    Mat gcov;
    weighted_moments(samples, gmean, gcov);
    // Guard against a degenerate global covariance (all weighted points
    // identical). The comparison is relative to the data's own scale because
    // coinciding points still leave O(eps^2) round-off in the moments.
    const double scale = gmean.squaredNorm() + 1.0;
    if (!(gcov.trace() > 64.0 * std::numeric_limits<double>::epsilon() * scale))
        throw FitError("initialization: zero weighted covariance");

    const std::vector<int> centers = weighted_draw_without_replacement(samples, k, rng);
    std::vector<double> alpha(k, 1.0 / k);
    std::vector<Vec> mu;
    std::vector<Mat> sigma;
    mu.reserve(k);
    sigma.reserve(k);
    for (int j = 0; j < k; ++j) {
        mu.push_back(samples[centers[j]].x);
        sigma.push_back(gcov);
    }
    return GmmParams(std::move(alpha), std::move(mu), std::move(sigma));
}

int positive_weight_count(const std::vector<WeightedSample>& samples) {
    int n = 0;
    for (const auto& s : samples)
        if (s.v > 0.0) ++n;
    return n;
}

}  // namespace

double weighted_ce_objective(const GmmParams& theta, const std::vector<WeightedSample>& samples) {
    if (samples.empty()) throw InputError("weighted_ce_objective: empty sample set");
    double acc = 0.0;
    bool any = false;
    for (const auto& s : samples) {
        if (s.v <= 0.0) continue;
        any = true;
        const double lp = gmm_log_pdf(theta, s.x);
        if (!std::isfinite(lp))
            throw FitError("weighted_ce_objective: zero density at a weighted sample");
        acc += s.v * lp;
    }
    if (!any) throw FitError("weighted_ce_objective: no effective samples");
    return -acc / static_cast<double>(samples.size());
}

std::vector<double> responsibilities(const GmmParams& theta, const Vec& x) {
    const int k = theta.k();
    std::vector<double> logs(k);
    double max_term = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
        logs[j] = std::log(theta.alpha()[j]) + theta.component_log_pdf(j, x);
        max_term = std::max(max_term, logs[j]);
    }
    std::vector<double> gamma(k);
    if (max_term < -700.0) {
        // Every component underflows: this point cannot influence the fit
        // meaningfully, so give it a uniform membership instead of NaNs.
        std::fill(gamma.begin(), gamma.end(), 1.0 / k);
        return gamma;
    }
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
        gamma[j] = std::exp(logs[j] - max_term);
        total += gamma[j];
    }
    for (double& g : gamma) g /= total;
    return gamma;
}

GmmParams em_step(const GmmParams& theta, const std::vector<WeightedSample>& samples) {
    const int k = theta.k();
    const int p = theta.dim();
    const std::size_t n = samples.size();

    // E step.
    std::vector<std::vector<double>> gamma(n);
    double total_v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        gamma[i] = responsibilities(theta, samples[i].x);
        total_v += samples[i].v;
    }
    if (total_v <= 0.0) throw FitError("em_step: no effective samples");

    // M step: Eqs. (14)-(16) with v_i in place of h*w.
    std::vector<double> alpha(k);
    std::vector<Vec> mu(k, Vec::Zero(p));
    std::vector<Mat> sigma(k, Mat::Zero(p, p));
    for (int j = 0; j < k; ++j) {
        double mass = 0.0;
        Vec m = Vec::Zero(p);
        for (std::size_t i = 0; i < n; ++i) {
            const double g = samples[i].v * gamma[i][j];
            mass += g;
            m += g * samples[i].x;
        }
        if (mass < kMinComponentWeight)
            throw FitError("em_step: degenerate component (no responsibility mass)");
        alpha[j] = mass / total_v;
        mu[j] = m / mass;
        Mat s = Mat::Zero(p, p);
        for (std::size_t i = 0; i < n; ++i) {
            const double g = samples[i].v * gamma[i][j];
            if (g == 0.0) continue;
            const Vec d = samples[i].x - mu[j];
            s += g * (d * d.transpose());
        }
        sigma[j] = s / mass;
    }

    try {
        return GmmParams(std::move(alpha), std::move(mu), std::move(sigma));
    } catch (const NumericsError&) {
        throw FitError("em_step: degenerate component (covariance not PD)");
    }
}

std::optional<EmResult> em_fit(int k, const std::vector<WeightedSample>& samples,
                               const EmSettings& settings, RngStream rng) {
    if (k < 1) throw InputError("em_fit: k must be >= 1");
    if (samples.empty()) throw InputError("em_fit: empty sample set");
    if (positive_weight_count(samples) < k) return std::nullopt;

    std::optional<EmResult> best;
    int ill = 0;
    for (int r = 0; r < settings.restarts; ++r) {
        RngStream restart_rng = rng.derive(static_cast<std::uint64_t>(r));
        try {
            GmmParams theta = random_init(k, samples, restart_rng);
            double obj = weighted_ce_objective(theta, samples);
            for (int it = 0; it < settings.max_iters; ++it) {
                GmmParams next = em_step(theta, samples);
                const double next_obj = weighted_ce_objective(next, samples);
                theta = std::move(next);
                const bool converged = (obj - next_obj) < settings.rel_tol * std::abs(obj);
                obj = next_obj;
                if (converged) break;
            }
            if (max_condition_number(theta) > settings.cond_threshold) {
                ++ill;
                continue;
            }
            // Strictly-better comparison keeps the lowest restart index on ties.
            if (!best || obj < best->objective) best = EmResult{std::move(theta), obj};
        } catch (const FitError&) {
            ++ill;  // degenerate restart: discard, count as ill-conditioned
        }
    }
    if (2 * ill > settings.restarts) return std::nullopt;
    return best;
}

}  // namespace cesis
