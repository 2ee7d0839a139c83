#pragma once

#include <functional>

#include "cesis/densities.hpp"
#include "cesis/model_api.hpp"

namespace cesis {

// Adaptive Gauss-Kronrod integral of fn over [a, b] to absolute tolerance.
double integrate(const std::function<double(double)>& fn, double a, double b, double abs_tol);

// p = E_f[s(X)] = integral of f(x) s(x) dx, to absolute tolerance 1e-9.
double oracle_p(const OracleModel& model, const InputDensity& f);

// Bisection on the threshold l until oracle_p matches target_p to 1e-6
// relative. model_at builds the model for a candidate threshold.
double calibrate_threshold(
    const std::function<std::unique_ptr<OracleModel>(double)>& model_at,
    const InputDensity& f, double target_p, double lo, double hi);

// KL(q || g) over [a, b] by quadrature; q given as an evaluator, g a GMM.
double kl_divergence(const std::function<double(double)>& q_pdf, const GmmParams& g,
                     double a, double b);

}  // namespace cesis
