#include "cesis/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "cesis/error.hpp"

namespace cesis {

double integrate(const std::function<double(double)>& fn, double a, double b, double abs_tol) {
    using boost::math::quadrature::gauss_kronrod;
    double error = 0.0;
    // Depth 15 is the sweet spot: the reported error estimate accumulates
    // round-off pessimism when allowed to subdivide much further.
    const double value =
        gauss_kronrod<double, 15>::integrate(fn, a, b, 15, 1e-12, &error);
    if (!(error <= std::max(abs_tol, 1e-14 * std::abs(value))))
        throw NumericsError("integrate: quadrature did not reach requested tolerance");
    return value;
}

double oracle_p(const OracleModel& model, const InputDensity& f) {
    const auto [lo, hi] = f.support_hint();
    auto integrand = [&](double t) {
        Vec xv(1);
        xv[0] = t;
        return f.pdf(xv) * model.true_s(xv);
    };
    return integrate(integrand, lo, hi, 1e-9);
}

double calibrate_threshold(
    const std::function<std::unique_ptr<OracleModel>(double)>& model_at,
    const InputDensity& f, double target_p, double lo, double hi) {
    if (!(target_p > 0.0 && target_p < 1.0))
        throw InputError("calibrate_threshold: target_p must lie in (0,1)");
    auto p_at = [&](double l) { return oracle_p(*model_at(l), f); };
    double p_lo = p_at(lo);
    double p_hi = p_at(hi);
    // p is nonincreasing in l; require the bracket to straddle the target.
    if (!((p_lo - target_p) * (p_hi - target_p) <= 0.0))
        throw NumericsError("calibrate_threshold: target not bracketed by [lo, hi]");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double p_mid = p_at(mid);
        if (std::abs(p_mid - target_p) < 1e-6 * target_p) return mid;
        if ((p_lo - target_p) * (p_mid - target_p) <= 0.0) {
            hi = mid;
            p_hi = p_mid;
        } else {
            lo = mid;
            p_lo = p_mid;
        }
    }
    throw NumericsError("calibrate_threshold: bisection did not converge");
}

double kl_divergence(const std::function<double(double)>& q_pdf, const GmmParams& g,
                     double a, double b) {
    auto integrand = [&](double t) {
        const double q = q_pdf(t);
        if (q <= 0.0) return 0.0;
        Vec xv(1);
        xv[0] = t;
        const double log_g = gmm_log_pdf(g, xv);
        return q * (std::log(q) - log_g);
    };
    return integrate(integrand, a, b, 1e-8);
}

}  // namespace cesis
