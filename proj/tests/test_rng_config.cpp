#include <doctest.h>

#include <cmath>
#include <set>

#include "cesis/config.hpp"
#include "cesis/error.hpp"
#include "cesis/rng.hpp"

using namespace cesis;

TEST_CASE("rng streams are deterministic and derivation is stable") {
    RngStream a(42);
    RngStream b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream parent(7);
    const auto before = parent.counter();
    RngStream c1 = parent.derive(1);
    RngStream c2 = parent.derive(2);
    RngStream c1_again = parent.derive(1);
    CHECK(parent.counter() == before);  // derive never consumes
    CHECK(c1.next_u64() == c1_again.next_u64());
    CHECK(c1.key() != c2.key());
    CHECK(parent.derive("em").key() != parent.derive("draw").key());
}

TEST_CASE("derived streams do not collide over a block of tags") {
    RngStream parent(123);
    std::set<std::uint64_t> keys;
    for (std::uint64_t t = 0; t < 2000; ++t) keys.insert(parent.derive(t).key());
    CHECK(keys.size() == 2000);
}

TEST_CASE("uniform lies in [0,1) and normal has the right moments") {
    RngStream rng(2024);
    const int n = 200000;
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        mean += u;
        m2 += u * u;
    }
    mean /= n;
    CHECK(std::abs(mean - 0.5) < 0.005);
    CHECK(std::abs(m2 / n - 1.0 / 3.0) < 0.005);

    double nmean = 0.0, nm2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        nmean += z;
        nm2 += z * z;
    }
    CHECK(std::abs(nmean / n) < 0.01);
    CHECK(std::abs(nm2 / n - 1.0) < 0.02);
}

TEST_CASE("categorical respects the weights") {
    RngStream rng(9);
    std::vector<double> weights{1.0, 3.0, 0.0, 4.0};
    std::vector<int> counts(4, 0);
    const int n = 80000;
    for (int i = 0; i < n; ++i) ++counts[rng.categorical(weights)];
    CHECK(counts[2] == 0);
    CHECK(std::abs(counts[0] / double(n) - 0.125) < 0.01);
    CHECK(std::abs(counts[1] / double(n) - 0.375) < 0.01);
    CHECK(std::abs(counts[3] / double(n) - 0.500) < 0.01);
    CHECK_THROWS_AS(rng.categorical({0.0, 0.0}), InputError);
}

TEST_CASE("config parses dotted keys, comments, and overrides") {
    const auto cfg = KeyValueConfig::from_string(
        "# comment line\n"
        "budget.n0 = 600\n"
        "budget.ratio = 0.3   # trailing comment\n"
        "model.name = numerical_example\n"
        "flag.on = true\n"
        "budget.n0 = 700\n");
    CHECK(cfg.get_int("budget.n0", 0) == 700);  // later assignment wins
    CHECK(cfg.get_double("budget.ratio", 0.0) == doctest::Approx(0.3));
    CHECK(cfg.get_string("model.name", "") == "numerical_example");
    CHECK(cfg.get_bool("flag.on", false));
    CHECK(cfg.get_int("missing.key", 17) == 17);
    CHECK_THROWS_AS(cfg.require_int("missing.key"), ConfigError);
}

TEST_CASE("config rejects malformed lines and values") {
    CHECK_THROWS_AS(KeyValueConfig::from_string("novalue\n"), ConfigError);
    const auto cfg = KeyValueConfig::from_string("a.b = 12x\n");
    CHECK_THROWS_AS(cfg.get_int("a.b", 0), ConfigError);
    CHECK_THROWS_AS(cfg.get_double("a.b", 0.0), ConfigError);
}
