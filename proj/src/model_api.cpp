#include "cesis/model_api.hpp"

#include <cmath>

#include "cesis/error.hpp"

namespace cesis {

namespace {

double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

}  // namespace

NumericalExampleModel::NumericalExampleModel(double threshold)
    : threshold_(threshold), input_(1) {}

double NumericalExampleModel::mean_function(double x) {
    return 0.95 * x * x * (1.0 + 0.5 * std::cos(5.0 * x) + 0.5 * std::cos(10.0 * x));
}

double NumericalExampleModel::sd_function(double x) {
    const double s = 1.0 + 0.7 * std::abs(x) + 0.4 * std::cos(x) + 0.3 * std::cos(14.0 * x);
    if (!(s > 0.0)) throw NumericsError("NumericalExampleModel: sd_function not positive");
    return s;
}

int NumericalExampleModel::simulate(const Vec& x, RngStream& rng) const {
    if (x.size() != 1) throw InputError("NumericalExampleModel: dimension mismatch");
    const double y = mean_function(x[0]) + sd_function(x[0]) * rng.normal();
    return y > threshold_ ? 1 : 0;
}

double NumericalExampleModel::true_s(const Vec& x) const {
    if (x.size() != 1) throw InputError("NumericalExampleModel: dimension mismatch");
    const double z = (threshold_ - mean_function(x[0])) / sd_function(x[0]);
    // Survival form, not 1 - cdf(z): the subtraction underflows to a
    // quantized staircase for z > 8, which quadrature sees as roughness.
    return std_normal_cdf(-z);
}

ThreePointModel::ThreePointModel()
    : input_({-1.0, 0.0, 1.0}, {0.25, 0.5, 0.25}) {}

double ThreePointModel::s_at(double atom) const {
    if (atom == -1.0) return 0.02;
    if (atom == 0.0) return 0.001;
    if (atom == 1.0) return 0.10;
    throw InputError("ThreePointModel: x outside support");
}

int ThreePointModel::simulate(const Vec& x, RngStream& rng) const {
    if (x.size() != 1) throw InputError("ThreePointModel: dimension mismatch");
    return rng.uniform() < s_at(x[0]) ? 1 : 0;
}

double ThreePointModel::true_s(const Vec& x) const {
    if (x.size() != 1) throw InputError("ThreePointModel: dimension mismatch");
    return s_at(x[0]);
}

DeterministicTailModel::DeterministicTailModel(double threshold)
    : threshold_(threshold), input_(1) {
    if (threshold <= 0.0) throw InputError("DeterministicTailModel: threshold must be positive");
}

int DeterministicTailModel::simulate(const Vec& x, RngStream&) const {
    if (x.size() != 1) throw InputError("DeterministicTailModel: dimension mismatch");
    return std::abs(x[0]) > threshold_ ? 1 : 0;
}

double DeterministicTailModel::true_s(const Vec& x) const {
    if (x.size() != 1) throw InputError("DeterministicTailModel: dimension mismatch");
    return std::abs(x[0]) > threshold_ ? 1.0 : 0.0;
}

std::unique_ptr<SimulationModel> make_model(const std::string& name, double threshold) {
    if (name == "numerical_example")
        return std::make_unique<NumericalExampleModel>(threshold);
    if (name == "three_point")
        return std::make_unique<ThreePointModel>();
    if (name == "deterministic_tail")
        return std::make_unique<DeterministicTailModel>(threshold);
    throw ConfigError("unknown model: " + name);
}

std::vector<std::string> model_names() {
    return {"numerical_example", "three_point", "deterministic_tail"};
}

}  // namespace cesis
