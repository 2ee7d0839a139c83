#include <doctest.h>

#include <cmath>

#include "cesis/error.hpp"
#include "cesis/weighted_em.hpp"

using namespace cesis;

namespace {

Vec v1(double x) {
    Vec v(1);
    v << x;
    return v;
}

Mat m1(double s) {
    Mat m(1, 1);
    m << s;
    return m;
}

std::vector<WeightedSample> random_dataset(RngStream& rng, int n) {
    std::vector<WeightedSample> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        WeightedSample s;
        s.x = v1(3.0 * rng.normal());
        s.v = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

TEST_CASE("weighted cross entropy matches a hand-computed value") {
    // Single sample at x = 0 with v = 1 against the standard normal:
    // -log phi(0) = 0.5 log(2 pi) = 0.91893853...; divided by M = 3.
    std::vector<WeightedSample> samples{{v1(0.0), 1.0}, {v1(5.0), 0.0}, {v1(-2.0), 0.0}};
    GmmParams theta = GmmParams::standard(1);
    CHECK(weighted_ce_objective(theta, samples) ==
          doctest::Approx(0.30631284440155758).epsilon(1e-13));

    // Linear in v: doubling every weight doubles the objective.
    auto doubled = samples;
    for (auto& s : doubled) s.v *= 2.0;
    CHECK(weighted_ce_objective(theta, doubled) ==
          doctest::Approx(2.0 * 0.30631284440155758).epsilon(1e-13));
}

TEST_CASE("responsibilities are posteriors that sum to one") {
    GmmParams one = GmmParams::standard(1);
    auto g = responsibilities(one, v1(0.3));
    REQUIRE(g.size() == 1);
    CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-14));

    GmmParams twin({0.5, 0.5}, {v1(0.0), v1(0.0)}, {m1(1.0), m1(1.0)});
    auto gt = responsibilities(twin, v1(1.7));
    CHECK(gt[0] == doctest::Approx(0.5).epsilon(1e-13));

    // alpha = (0.3, 0.7), N(-1, 0.49), N(2, 2.25), x = 0.7:
    // gamma_1 = 0.065462038130730921 from direct evaluation.
    GmmParams theta({0.3, 0.7}, {v1(-1.0), v1(2.0)}, {m1(0.49), m1(2.25)});
    auto gh = responsibilities(theta, v1(0.7));
    CHECK(gh[0] == doctest::Approx(0.065462038130730921).epsilon(1e-12));
    CHECK(gh[0] + gh[1] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("one em step with k=1 lands on the weighted moments") {
    std::vector<WeightedSample> samples{
        {v1(1.0), 2.0}, {v1(3.0), 1.0}, {v1(-2.0), 1.0}, {v1(10.0), 0.0}};
    GmmParams start = GmmParams::single(v1(0.0), m1(25.0));
    GmmParams next = em_step(start, samples);
    // Weighted mean = (2*1 + 3 - 2) / 4 = 0.75.
    CHECK(next.mu()[0](0) == doctest::Approx(0.75).epsilon(1e-12));
    // Weighted second moment about the mean: sum v (x - mu)^2 / sum v.
    const double var =
        (2.0 * 0.0625 + 1.0 * 5.0625 + 1.0 * 7.5625) / 4.0;
    CHECK(next.sigma()[0](0, 0) == doctest::Approx(var).epsilon(1e-12));
    CHECK(next.alpha()[0] == doctest::Approx(1.0));
}

TEST_CASE("em step rejects degenerate weight patterns") {
    std::vector<WeightedSample> zero{{v1(0.0), 0.0}, {v1(1.0), 0.0}};
    GmmParams theta = GmmParams::standard(1);
    CHECK_THROWS_AS(weighted_ce_objective(theta, {}), InputError);
    CHECK_THROWS_AS(em_step(theta, zero), FitError);
    // A single positive point collapses the covariance.
    std::vector<WeightedSample> one{{v1(2.0), 1.0}, {v1(5.0), 0.0}};
    CHECK_THROWS_AS(em_step(theta, one), FitError);
}

TEST_CASE("em iterations never increase the objective") {
    RngStream rng(4242);
    for (int rep = 0; rep < 20; ++rep) {
        auto samples = random_dataset(rng, 60);
        GmmParams theta({0.5, 0.5}, {v1(-1.0 + rng.normal()), v1(1.0 + rng.normal())},
                        {m1(1.0), m1(2.0)});
        double prev = weighted_ce_objective(theta, samples);
        for (int it = 0; it < 8; ++it) {
            try {
                theta = em_step(theta, samples);
            } catch (const FitError&) {
                break;  // collapsed; descent up to this point already checked
            }
            const double cur = weighted_ce_objective(theta, samples);
            CHECK(cur <= prev + 1e-10 * std::abs(prev));
            prev = cur;
        }
    }
}

TEST_CASE("scaling all weights leaves the em trajectory unchanged") {
    RngStream rng(777);
    auto samples = random_dataset(rng, 50);
    auto scaled = samples;
    for (auto& s : scaled) s.v *= 7.25;
    GmmParams theta({0.4, 0.6}, {v1(-2.0), v1(2.0)}, {m1(1.0), m1(1.0)});
    GmmParams a = em_step(theta, samples);
    GmmParams b = em_step(theta, scaled);
    for (int j = 0; j < 2; ++j) {
        CHECK(a.alpha()[j] == doctest::Approx(b.alpha()[j]).epsilon(1e-12));
        CHECK(a.mu()[j](0) == doctest::Approx(b.mu()[j](0)).epsilon(1e-12));
        CHECK(a.sigma()[j](0, 0) == doctest::Approx(b.sigma()[j](0, 0)).epsilon(1e-12));
    }
}

TEST_CASE("em fit with one component is the closed-form weighted gaussian") {
    RngStream data_rng(11);
    auto samples = random_dataset(data_rng, 80);
    double mass = 0.0, mean = 0.0;
    for (const auto& s : samples) {
        mass += s.v;
        mean += s.v * s.x(0);
    }
    mean /= mass;
    double var = 0.0;
    for (const auto& s : samples) var += s.v * (s.x(0) - mean) * (s.x(0) - mean);
    var /= mass;

    EmSettings settings;
    auto result = em_fit(1, samples, settings, RngStream(5));
    REQUIRE(result.has_value());
    CHECK(result->theta.mu()[0](0) == doctest::Approx(mean).epsilon(1e-8));
    CHECK(result->theta.sigma()[0](0, 0) == doctest::Approx(var).epsilon(1e-8));
}

TEST_CASE("em fit recovers a well-separated two-component mixture") {
    RngStream rng(2718);
    GmmParams truth({0.35, 0.65}, {v1(-6.0), v1(6.0)}, {m1(0.49), m1(0.81)});
    std::vector<WeightedSample> samples;
    for (int i = 0; i < 500; ++i) {
        RngStream draw = rng.derive(static_cast<std::uint64_t>(i));
        samples.push_back({gmm_sample(truth, draw), 1.0});
    }
    EmSettings settings;
    auto result = em_fit(2, samples, settings, RngStream(99));
    REQUIRE(result.has_value());
    int lo = result->theta.mu()[0](0) < result->theta.mu()[1](0) ? 0 : 1;
    int hi = 1 - lo;
    CHECK(result->theta.mu()[lo](0) == doctest::Approx(-6.0).epsilon(0.05));
    CHECK(result->theta.mu()[hi](0) == doctest::Approx(6.0).epsilon(0.05));
    CHECK(result->theta.alpha()[lo] == doctest::Approx(0.35).epsilon(0.15));
    // The selected fit lands near the truth's score (EM stops at 1% relative).
    const double truth_obj = weighted_ce_objective(truth, samples);
    CHECK(result->objective <= truth_obj + 0.05 * std::abs(truth_obj));
}

TEST_CASE("em fit reports infeasibility instead of fabricating structure") {
    EmSettings settings;
    // Fewer positive-weight samples than components.
    std::vector<WeightedSample> thin{{v1(0.0), 1.0}, {v1(1.0), 0.0}, {v1(2.0), 0.0}};
    CHECK_FALSE(em_fit(2, thin, settings, RngStream(3)).has_value());
    // All positive mass on a single repeated point: every restart collapses.
    std::vector<WeightedSample> stacked;
    for (int i = 0; i < 12; ++i) stacked.push_back({v1(4.2), 1.0});
    CHECK_FALSE(em_fit(1, stacked, settings, RngStream(8)).has_value());
    CHECK_THROWS_AS(em_fit(0, thin, settings, RngStream(1)), InputError);
}

TEST_CASE("em fit is deterministic in the supplied stream") {
    RngStream rng(606);
    auto samples = random_dataset(rng, 70);
    EmSettings settings;
    auto a = em_fit(2, samples, settings, RngStream(1234));
    auto b = em_fit(2, samples, settings, RngStream(1234));
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(a->objective == b->objective);
    CHECK(a->theta.mu()[0](0) == b->theta.mu()[0](0));
}
