#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "cesis/rng.hpp"

namespace cesis {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A known input density f(x) on R^p: evaluation plus exact sampling.
class InputDensity {
public:
    virtual ~InputDensity() = default;

    virtual int dim() const = 0;
    virtual double log_pdf(const Vec& x) const = 0;
    virtual Vec sample(RngStream& rng) const = 0;

    // Interval [lo, hi] containing all but a negligible (< 1e-12) tail of
    // the mass in each coordinate; used by 1-D tabulation and quadrature.
    virtual std::pair<double, double> support_hint() const = 0;

    double pdf(const Vec& x) const;
};

class StandardNormalDensity final : public InputDensity {
public:
    explicit StandardNormalDensity(int p = 1);

    int dim() const override { return p_; }
    double log_pdf(const Vec& x) const override;
    Vec sample(RngStream& rng) const override;
    std::pair<double, double> support_hint() const override { return {-9.0, 9.0}; }

private:
    int p_;
};

// Rayleigh density restricted to [x_in, x_out] and renormalized.
class TruncatedRayleighDensity final : public InputDensity {
public:
    TruncatedRayleighDensity(double shape, double x_in, double x_out);
    TruncatedRayleighDensity();  // shape 10*sqrt(2/pi), window [3, 25]

    int dim() const override { return 1; }
    double log_pdf(const Vec& x) const override;
    Vec sample(RngStream& rng) const override;
    std::pair<double, double> support_hint() const override { return {x_in_, x_out_}; }

    double shape() const { return shape_; }

private:
    double rayleigh_cdf(double x) const;

    double shape_;
    double x_in_;
    double x_out_;
    double mass_;  // F_R(x_out) - F_R(x_in)
};

// Finite support density (probability mass function) for toy models.
class DiscreteDensity final : public InputDensity {
public:
    DiscreteDensity(std::vector<double> atoms, std::vector<double> probs);

    int dim() const override { return 1; }
    double log_pdf(const Vec& x) const override;
    Vec sample(RngStream& rng) const override;
    std::pair<double, double> support_hint() const override;

    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& probs() const { return probs_; }

private:
    std::vector<double> atoms_;
    std::vector<double> probs_;
};

// Gaussian mixture parameters theta = (alpha_j, mu_j, sigma_j), j = 1..k.
// Construction validates the invariants (weights normalized and positive,
// covariances symmetric positive definite) and caches each component's
// Cholesky factor. Immutable afterwards; cheap to copy and share.
class GmmParams {
public:
    GmmParams(std::vector<double> alpha, std::vector<Vec> mu, std::vector<Mat> sigma);

    static GmmParams single(const Vec& mu, const Mat& sigma);
    // k = 1, mean zero, identity covariance: the Algorithm-1 default start.
    static GmmParams standard(int p);

    int k() const { return static_cast<int>(alpha_.size()); }
    int dim() const { return static_cast<int>(mu_.front().size()); }

    const std::vector<double>& alpha() const { return alpha_; }
    const std::vector<Vec>& mu() const { return mu_; }
    const std::vector<Mat>& sigma() const { return sigma_; }

    // Per-component Gaussian log density.
    double component_log_pdf(int j, const Vec& x) const;

    // Lower-triangular Cholesky factor of sigma_j (cached at construction).
    const Mat& chol_lower(int j) const { return chol_lower_[j]; }

    // Returns a copy whose covariance eigenvalues are at least floor^2.
    // Used to keep a sampling density from collapsing; no-op if floor <= 0.
    GmmParams with_variance_floor(double floor) const;

    std::string to_json() const;

private:
    std::vector<double> alpha_;
    std::vector<Vec> mu_;
    std::vector<Mat> sigma_;
    std::vector<Mat> chol_lower_;   // L with sigma = L L^T
    std::vector<double> log_norm_;  // -p/2 log(2 pi) - sum(log diag L)
};

double gmm_log_pdf(const GmmParams& theta, const Vec& x);
double gmm_pdf(const GmmParams& theta, const Vec& x);
Vec gmm_sample(const GmmParams& theta, RngStream& rng);

// Free parameter count d = (k-1) + k*(p + p(p+1)/2).
int param_dimension(int k, int p);

// Max over components of cond(sigma_j) = lambda_max / lambda_min.
double max_condition_number(const GmmParams& theta);

// A GMM proposal usable wherever an input density is expected.
class GmmDensity final : public InputDensity {
public:
    explicit GmmDensity(GmmParams theta) : theta_(std::move(theta)) {}

    int dim() const override { return theta_.dim(); }
    double log_pdf(const Vec& x) const override { return gmm_log_pdf(theta_, x); }
    Vec sample(RngStream& rng) const override { return gmm_sample(theta_, rng); }
    std::pair<double, double> support_hint() const override;

    const GmmParams& params() const { return theta_; }

private:
    GmmParams theta_;
};

}  // namespace cesis
