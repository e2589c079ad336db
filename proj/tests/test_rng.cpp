#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include <driftless/rng.hpp>

using driftless::Rng;

TEST_CASE("same seed reproduces the stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int diff = 0;
    for (int i = 0; i < 100; ++i) diff += a.next_u64() != b.next_u64();
    REQUIRE(diff > 90);
}

TEST_CASE("uniform lies in [0,1) and is roughly uniform") {
    Rng rng(7);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    REQUIRE_THAT(sum / n, Catch::Matchers::WithinAbs(0.5, 0.01));
}

TEST_CASE("uniform_int stays in range and covers all buckets") {
    Rng rng(11);
    const std::uint64_t n = 10;
    std::vector<int> hits(n, 0);
    for (int i = 0; i < 100000; ++i) {
        const std::uint64_t v = rng.uniform_int(n);
        REQUIRE(v < n);
        hits[v] += 1;
    }
    for (int h : hits) REQUIRE(h > 9000);
}

TEST_CASE("exponential matches its mean") {
    Rng rng(3);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.exponential(1.0);
        REQUIRE(x >= 0.0);
        sum += x;
    }
    REQUIRE_THAT(sum / n, Catch::Matchers::WithinAbs(1.0, 0.05));
}

TEST_CASE("exponential scales with the mean") {
    Rng rng(5);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rng.exponential(5.0);
    REQUIRE_THAT(sum / n, Catch::Matchers::WithinAbs(5.0, 0.25));
}
