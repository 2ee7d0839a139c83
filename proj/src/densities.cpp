#include "cesis/densities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cesis/error.hpp"

namespace cesis {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

}  // namespace

double InputDensity::pdf(const Vec& x) const {
    return std::exp(log_pdf(x));
}

StandardNormalDensity::StandardNormalDensity(int p) : p_(p) {
    if (p < 1) throw InputError("StandardNormalDensity: dimension must be >= 1");
}

double StandardNormalDensity::log_pdf(const Vec& x) const {
    if (x.size() != p_) throw InputError("StandardNormalDensity: dimension mismatch");
    return -0.5 * (p_ * kLogTwoPi + x.squaredNorm());
}

Vec StandardNormalDensity::sample(RngStream& rng) const {
    Vec x(p_);
    for (int i = 0; i < p_; ++i) x[i] = rng.normal();
    return x;
}

TruncatedRayleighDensity::TruncatedRayleighDensity(double shape, double x_in, double x_out)
    : shape_(shape), x_in_(x_in), x_out_(x_out) {
    if (shape <= 0.0) throw InputError("TruncatedRayleighDensity: shape must be positive");
    if (!(x_in >= 0.0 && x_out > x_in))
        throw InputError("TruncatedRayleighDensity: require 0 <= x_in < x_out");
    mass_ = rayleigh_cdf(x_out_) - rayleigh_cdf(x_in_);
    if (mass_ <= 0.0) throw InputError("TruncatedRayleighDensity: window carries no mass");
}

TruncatedRayleighDensity::TruncatedRayleighDensity()
    : TruncatedRayleighDensity(10.0 * std::sqrt(2.0 / M_PI), 3.0, 25.0) {}

double TruncatedRayleighDensity::rayleigh_cdf(double x) const {
    if (x <= 0.0) return 0.0;
    return 1.0 - std::exp(-x * x / (2.0 * shape_ * shape_));
}

double TruncatedRayleighDensity::log_pdf(const Vec& x) const {
    if (x.size() != 1) throw InputError("TruncatedRayleighDensity: dimension mismatch");
    const double v = x[0];
    if (v < x_in_ || v > x_out_) return -std::numeric_limits<double>::infinity();
    const double s2 = shape_ * shape_;
    return std::log(v / s2) - v * v / (2.0 * s2) - std::log(mass_);
}

Vec TruncatedRayleighDensity::sample(RngStream& rng) const {
    // Inverse CDF restricted to the window.
    const double u = rayleigh_cdf(x_in_) + rng.uniform() * mass_;
    const double q = std::sqrt(-2.0 * shape_ * shape_ * std::log1p(-u));
    Vec x(1);
    x[0] = std::clamp(q, x_in_, x_out_);
    return x;
}

DiscreteDensity::DiscreteDensity(std::vector<double> atoms, std::vector<double> probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
    if (atoms_.empty() || atoms_.size() != probs_.size())
        throw InputError("DiscreteDensity: atoms and probs must be non-empty and equal length");
    double total = 0.0;
    for (double p : probs_) {
        if (p <= 0.0) throw InputError("DiscreteDensity: probabilities must be positive");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw InputError("DiscreteDensity: probabilities must sum to 1");
    for (double& p : probs_) p /= total;
}

double DiscreteDensity::log_pdf(const Vec& x) const {
    if (x.size() != 1) throw InputError("DiscreteDensity: dimension mismatch");
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (x[0] == atoms_[i]) return std::log(probs_[i]);
    }
    return -std::numeric_limits<double>::infinity();
}

Vec DiscreteDensity::sample(RngStream& rng) const {
    Vec x(1);
    x[0] = atoms_[rng.categorical(probs_)];
    return x;
}

std::pair<double, double> DiscreteDensity::support_hint() const {
    auto [lo, hi] = std::minmax_element(atoms_.begin(), atoms_.end());
    return {*lo, *hi};
}

GmmParams::GmmParams(std::vector<double> alpha, std::vector<Vec> mu, std::vector<Mat> sigma)
    : alpha_(std::move(alpha)), mu_(std::move(mu)), sigma_(std::move(sigma)) {
    const std::size_t k = alpha_.size();
    if (k == 0 || mu_.size() != k || sigma_.size() != k)
        throw InputError("GmmParams: alpha, mu, sigma must be non-empty and equal length");

    const int p = static_cast<int>(mu_.front().size());
    if (p < 1) throw InputError("GmmParams: mean vectors must have dimension >= 1");

    double total = 0.0;
    for (double a : alpha_) {
        if (!(a > 0.0) || !std::isfinite(a))
            throw InputError("GmmParams: mixture weights must be positive and finite");
        total += a;
    }
    if (std::abs(total - 1.0) > 1e-8)
        throw InputError("GmmParams: mixture weights must sum to 1");
    for (double& a : alpha_) a /= total;

    chol_lower_.reserve(k);
    log_norm_.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        if (mu_[j].size() != p) throw InputError("GmmParams: inconsistent mean dimensions");
        if (sigma_[j].rows() != p || sigma_[j].cols() != p)
            throw InputError("GmmParams: covariance shape mismatch");
        if (!sigma_[j].isApprox(sigma_[j].transpose(), 1e-10))
            throw InputError("GmmParams: covariance must be symmetric");

        Mat s = 0.5 * (sigma_[j] + sigma_[j].transpose());
        Eigen::LLT<Mat> llt(s);
        if (llt.info() != Eigen::Success) {
            // One jitter attempt proportional to the matrix scale; a zero
            // matrix (collapsed component) gets no jitter and fails below.
            const double jitter = 1e-9 * s.trace() / p;
            s += jitter * Mat::Identity(p, p);
            llt.compute(s);
            if (llt.info() != Eigen::Success)
                throw NumericsError("GmmParams: covariance is not positive definite");
        }
        sigma_[j] = s;
        Mat L = llt.matrixL();
        double log_det_half = 0.0;
        for (int i = 0; i < p; ++i) log_det_half += std::log(L(i, i));
        chol_lower_.push_back(std::move(L));
        log_norm_.push_back(-0.5 * p * kLogTwoPi - log_det_half);
    }
}

GmmParams GmmParams::single(const Vec& mu, const Mat& sigma) {
    return GmmParams({1.0}, {mu}, {sigma});
}

GmmParams GmmParams::standard(int p) {
    return single(Vec::Zero(p), Mat::Identity(p, p));
}

double GmmParams::component_log_pdf(int j, const Vec& x) const {
    const Vec d = x - mu_[j];
    // Solve L z = d; quadratic form is |z|^2.
    const Vec z = chol_lower_[j].triangularView<Eigen::Lower>().solve(d);
    return log_norm_[j] - 0.5 * z.squaredNorm();
}

GmmParams GmmParams::with_variance_floor(double floor) const {
    if (floor <= 0.0) return *this;
    const double min_eig = floor * floor;
    std::vector<Mat> floored;
    floored.reserve(sigma_.size());
    for (const Mat& s : sigma_) {
        Eigen::SelfAdjointEigenSolver<Mat> es(s);
        if (es.info() != Eigen::Success)
            throw NumericsError("with_variance_floor: eigendecomposition failed");
        Vec lam = es.eigenvalues().cwiseMax(min_eig);
        floored.push_back(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose());
    }
    return GmmParams(alpha_, mu_, std::move(floored));
}

std::string GmmParams::to_json() const {
    nlohmann::json out;
    out["k"] = k();
    out["p"] = dim();
    out["alpha"] = alpha_;
    for (int j = 0; j < k(); ++j) {
        nlohmann::json comp;
        comp["mu"] = std::vector<double>(mu_[j].data(), mu_[j].data() + mu_[j].size());
        std::vector<std::vector<double>> rows;
        for (int r = 0; r < dim(); ++r) {
            rows.emplace_back(sigma_[j].row(r).begin(), sigma_[j].row(r).end());
        }
        comp["sigma"] = rows;
        out["components"].push_back(comp);
    }
    return out.dump();
}

double gmm_log_pdf(const GmmParams& theta, const Vec& x) {
    if (x.size() != theta.dim()) throw InputError("gmm_log_pdf: dimension mismatch");
    const int k = theta.k();
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(k);
    for (int j = 0; j < k; ++j) {
        terms[j] = std::log(theta.alpha()[j]) + theta.component_log_pdf(j, x);
        max_term = std::max(max_term, terms[j]);
    }
    if (!std::isfinite(max_term)) return -std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += std::exp(terms[j] - max_term);
    return max_term + std::log(acc);
}

double gmm_pdf(const GmmParams& theta, const Vec& x) {
    return std::exp(gmm_log_pdf(theta, x));
}

Vec gmm_sample(const GmmParams& theta, RngStream& rng) {
    const int j = static_cast<int>(rng.categorical(theta.alpha()));
    const int p = theta.dim();
    Vec z(p);
    for (int i = 0; i < p; ++i) z[i] = rng.normal();
    return theta.mu()[j] + theta.chol_lower(j) * z;
}

int param_dimension(int k, int p) {
    if (k < 1 || p < 1) throw InputError("param_dimension: k and p must be >= 1");
    return (k - 1) + k * (p + p * (p + 1) / 2);
}

double max_condition_number(const GmmParams& theta) {
    double worst = 1.0;
    for (const Mat& s : theta.sigma()) {
        Eigen::SelfAdjointEigenSolver<Mat> es(s);
        if (es.info() != Eigen::Success)
            throw NumericsError("max_condition_number: eigendecomposition failed");
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        if (lo <= 0.0) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, hi / lo);
    }
    return worst;
}

std::pair<double, double> GmmDensity::support_hint() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int j = 0; j < theta_.k(); ++j) {
        const double m = theta_.mu()[j][0];
        const double sd = std::sqrt(theta_.sigma()[j](0, 0));
        lo = std::min(lo, m - 9.0 * sd);
        hi = std::max(hi, m + 9.0 * sd);
    }
    return {lo, hi};
}

}  // namespace cesis
