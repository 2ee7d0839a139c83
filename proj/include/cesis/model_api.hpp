#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cesis/densities.hpp"
#include "cesis/rng.hpp"

namespace cesis {

// A stochastic simulation model: inputs X ~ f, scalar response Y = Y(X, noise),
// failure event {Y > l}. One call to simulate() is one run of the simulator.
class SimulationModel {
public:
    virtual ~SimulationModel() = default;

    virtual std::string name() const = 0;
    virtual int dim() const = 0;
    virtual const InputDensity& input_density() const = 0;
    virtual double threshold() const = 0;

    // One replication of the simulator at x; returns 1 if Y > l, else 0.
    virtual int simulate(const Vec& x, RngStream& rng) const = 0;
};

// A model whose conditional failure probability s(x) = P(Y > l | X = x) has
// a closed form, so estimator behaviour can be checked against exact values.
class OracleModel : public SimulationModel {
public:
    virtual double true_s(const Vec& x) const = 0;
};

// Section-4 benchmark: X ~ N(0,1), Y | X = x ~ N(mu(x), sigma(x)^2) with
//   mu(x)    = 0.95 x^2 (1 + 0.5 cos(5x) + 0.5 cos(10x))
//   sigma(x) = 1 + 0.7 |x| + 0.4 cos(x) + 0.3 cos(14x)
class NumericalExampleModel final : public OracleModel {
public:
    explicit NumericalExampleModel(double threshold);

    std::string name() const override { return "numerical_example"; }
    int dim() const override { return 1; }
    const InputDensity& input_density() const override { return input_; }
    double threshold() const override { return threshold_; }

    int simulate(const Vec& x, RngStream& rng) const override;
    double true_s(const Vec& x) const override;

    static double mean_function(double x);
    static double sd_function(double x);

private:
    double threshold_;
    StandardNormalDensity input_;
};

// Toy with three input atoms and known per-atom failure probabilities;
// small enough that every estimator quantity can be enumerated by hand.
class ThreePointModel final : public OracleModel {
public:
    ThreePointModel();

    std::string name() const override { return "three_point"; }
    int dim() const override { return 1; }
    const InputDensity& input_density() const override { return input_; }
    double threshold() const override { return 0.5; }

    int simulate(const Vec& x, RngStream& rng) const override;
    double true_s(const Vec& x) const override;

private:
    double s_at(double atom) const;

    DiscreteDensity input_;
};

// Noise-free model: fails exactly when |x| > threshold. s(x) is an indicator,
// which exercises the all-or-nothing branches of the estimators.
class DeterministicTailModel final : public OracleModel {
public:
    explicit DeterministicTailModel(double threshold);

    std::string name() const override { return "deterministic_tail"; }
    int dim() const override { return 1; }
    const InputDensity& input_density() const override { return input_; }
    double threshold() const override { return threshold_; }

    int simulate(const Vec& x, RngStream& rng) const override;
    double true_s(const Vec& x) const override;

private:
    double threshold_;
    StandardNormalDensity input_;
};

// name -> constructor(threshold). Unknown names raise ConfigError.
std::unique_ptr<SimulationModel> make_model(const std::string& name, double threshold);

std::vector<std::string> model_names();

}  // namespace cesis
