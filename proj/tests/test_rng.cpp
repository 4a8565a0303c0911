#include <doctest.h>

#include <cmath>
#include <vector>

#include "chasd/rng.hpp"

using chasd::rng::Stream;

TEST_CASE("streams with equal keys produce equal sequences") {
    Stream a = Stream::keyed(42, "test");
    Stream b = Stream::keyed(42, "test");
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("distinct labels and seeds give distinct streams") {
    Stream a = Stream::keyed(42, "alpha");
    Stream b = Stream::keyed(42, "beta");
    Stream c = Stream::keyed(43, "alpha");
    CHECK(a.next_u64() != b.next_u64());
    CHECK(Stream::keyed(42, "alpha").next_u64() != c.next_u64());
}

TEST_CASE("a copied stream replays from the point of the copy") {
    Stream a = Stream::keyed(7, "replay");
    a.next_u64();
    a.next_u64();
    Stream b = a;
    std::vector<double> from_a, from_b;
    for (int i = 0; i < 10; ++i) {
        from_a.push_back(a.next_double());
    }
    for (int i = 0; i < 10; ++i) {
        from_b.push_back(b.next_double());
    }
    CHECK(from_a == from_b);
}

TEST_CASE("draws on a parent do not disturb its splits") {
    Stream parent = Stream::keyed(9, "parent");
    Stream child_before = parent.split("child");
    for (int i = 0; i < 50; ++i) {
        parent.next_u64();
    }
    Stream child_after = parent.split("child");
    for (int i = 0; i < 20; ++i) {
        CHECK(child_before.next_u64() == child_after.next_u64());
    }
    CHECK(parent.split(3).next_u64() != parent.split(4).next_u64());
}

TEST_CASE("keyed_normal equals the stream's n-th normal draw") {
    Stream s = Stream::keyed(123, "table");
    for (std::uint64_t i = 0; i < 16; ++i) {
        const double sequential = s.next_normal();
        const double random_access = chasd::rng::keyed_normal(123, "table", i);
        CHECK(sequential == random_access);
    }
}

TEST_CASE("uniform doubles land in [0, 1) with the right mean") {
    Stream s = Stream::keyed(2024, "uniform");
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = s.next_double();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("normal draws have standard mean and variance") {
    Stream s = Stream::keyed(2025, "normal");
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = s.next_normal();
        REQUIRE(std::isfinite(x));
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("mix64 avalanches single-bit changes") {
    // Sanity, not a cryptographic claim: flipping one input bit flips many
    // output bits.
    const std::uint64_t base = chasd::rng::mix64(0x1234567890ABCDEFULL);
    for (int bit = 0; bit < 64; bit += 7) {
        const std::uint64_t flipped =
            chasd::rng::mix64(0x1234567890ABCDEFULL ^ (1ULL << bit));
        int diff = 0;
        for (std::uint64_t x = base ^ flipped; x; x &= x - 1) {
            ++diff;
        }
        CHECK(diff >= 10);
    }
}
