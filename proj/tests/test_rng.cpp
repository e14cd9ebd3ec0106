#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "cylint/rng.hpp"

using namespace cylint;
using Catch::Approx;

TEST_CASE("identical keys replay identical sequences", "[rng]") {
    RngStream a(42, 7);
    RngStream b(42, 7);
    for (int i = 0; i < 64; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct stream ids diverge immediately", "[rng]") {
    RngStream a(42, 0);
    RngStream b(42, 1);
    RngStream c(43, 0);
    int equal_ab = 0, equal_ac = 0;
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t x = a.next_u64();
        equal_ab += x == b.next_u64();
        equal_ac += x == c.next_u64();
    }
    REQUIRE(equal_ab == 0);
    REQUIRE(equal_ac == 0);
}

TEST_CASE("substreams depend only on the parent key", "[rng]") {
    RngStream parent(99, 3);
    RngStream early = parent.substream("noise");
    for (int i = 0; i < 100; ++i) parent.uniform(); // consume a lot
    RngStream late = parent.substream("noise");
    for (int i = 0; i < 32; ++i) REQUIRE(early.next_u64() == late.next_u64());

    RngStream other = parent.substream("operator");
    RngStream again = parent.substream("noise");
    REQUIRE(other.next_u64() != again.next_u64());

    // string and numeric derivations agree through the label hash
    RngStream by_name = parent.substream("x");
    RngStream by_hash = parent.substream(detail::fnv1a64("x"));
    REQUIRE(by_name.next_u64() == by_hash.next_u64());
}

TEST_CASE("derive_seed separates named sub-experiments", "[rng]") {
    REQUIRE(derive_seed(5, "alpha") == derive_seed(5, "alpha"));
    REQUIRE(derive_seed(5, "alpha") != derive_seed(5, "beta"));
    REQUIRE(derive_seed(5, "alpha") != derive_seed(6, "alpha"));
}

TEST_CASE("uniform draws live in the half-open unit interval", "[rng]") {
    RngStream rng(1, 0);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    // SE of the mean is 1/sqrt(12 n) = 0.00091; allow four of them
    REQUIRE(sum / n == Approx(0.5).margin(0.004));
}

TEST_CASE("normal consumes exactly two uniforms", "[rng]") {
    RngStream a(8, 1);
    RngStream b(8, 1);
    (void)a.normal();
    (void)b.uniform();
    (void)b.uniform();
    REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("normal has standard moments", "[rng]") {
    RngStream rng(2, 0);
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        REQUIRE(std::isfinite(z));
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    REQUIRE(mean == Approx(0.0).margin(4.0 / std::sqrt(double(n))));
    // var of the variance estimator is 2/n for normals; four sigmas
    REQUIRE(var == Approx(1.0).margin(4.0 * std::sqrt(2.0 / n)));
}

TEST_CASE("poisson matches its first two moments", "[rng]") {
    RngStream rng(3, 0);
    const double mean = 3.5;
    const int n = 50000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double k = static_cast<double>(rng.poisson(mean));
        sum += k;
        sum_sq += k * k;
    }
    const double m = sum / n;
    const double var = sum_sq / n - m * m;
    const double se_mean = std::sqrt(mean / n);
    REQUIRE(m == Approx(mean).margin(4.0 * se_mean));
    REQUIRE(var == Approx(mean).epsilon(0.05));
}

TEST_CASE("poisson handles chunked large means and rejects bad ones", "[rng]") {
    RngStream rng(4, 0);
    const double mean = 64.0; // forces the chunked path
    const int n = 20000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(mean));
    REQUIRE(sum / n == Approx(mean).margin(4.0 * std::sqrt(mean / n)));

    REQUIRE(rng.poisson(0.0) == 0);
    REQUIRE_THROWS_AS(rng.poisson(-1.0), invalid_input);
    REQUIRE_THROWS_AS(rng.poisson(std::numeric_limits<double>::infinity()), invalid_input);
    REQUIRE_THROWS_AS(rng.poisson(std::numeric_limits<double>::quiet_NaN()), invalid_input);
}
