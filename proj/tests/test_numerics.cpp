#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "chasd/numerics.hpp"
#include "chasd/rng.hpp"

using chasd::Distribution;
using chasd::Logits;
using chasd::ScoreVector;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Logits random_logits(chasd::rng::Stream& s, std::size_t n, double scale = 3.0) {
    Logits l;
    for (std::size_t i = 0; i < n; ++i) {
        l.values.push_back(scale * (s.next_double() - 0.5));
    }
    return l;
}

} // namespace

TEST_CASE("softmax of uniform logits is uniform") {
    const Distribution d = chasd::softmax(Logits{{0.0, 0.0, 0.0}});
    for (double p : d.probs) {
        CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }
}

TEST_CASE("softmax ratios follow exponentials") {
    const Distribution d = chasd::softmax(Logits{{0.0, std::log(2.0)}});
    CHECK(d.probs[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(d.probs[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("a -inf logit carries exactly zero mass") {
    const Distribution d = chasd::softmax(Logits{{-kInf, 5.0, 5.0}});
    CHECK(d.probs[0] == 0.0);
    CHECK(d.probs[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(d.probs[2] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("softmax hand-computed value") {
    // exp(3) / (exp(3) + 3*exp(1)) evaluated independently beforehand.
    const Distribution d = chasd::softmax(Logits{{3.0, 1.0, 1.0, 1.0}});
    CHECK(d.probs[0] == doctest::Approx(0.71123459422759383).epsilon(1e-14));
}

TEST_CASE("softmax rejects degenerate inputs") {
    CHECK_THROWS(chasd::softmax(Logits{}));
    CHECK_THROWS(chasd::softmax(Logits{{-kInf, -kInf}}));
    CHECK_THROWS(chasd::softmax(Logits{{1.0, std::nan("")}}));
    CHECK_THROWS(chasd::softmax(Logits{{1.0, kInf}}));
}

TEST_CASE("softmax sums to one and preserves the argmax") {
    chasd::rng::Stream s = chasd::rng::Stream::keyed(11, "softmax-prop");
    for (int trial = 0; trial < 200; ++trial) {
        const Logits l = random_logits(s, 2 + trial % 30, 10.0);
        const Distribution d = chasd::softmax(l);
        const double sum = std::accumulate(d.probs.begin(), d.probs.end(), 0.0);
        CHECK(std::abs(sum - 1.0) < 1e-12);
        std::size_t la = 0, da = 0;
        for (std::size_t i = 1; i < l.size(); ++i) {
            if (l.values[i] > l.values[la]) la = i;
            if (d.probs[i] > d.probs[da]) da = i;
        }
        CHECK(la == da);
    }
}

TEST_CASE("softmax is invariant under a common shift") {
    chasd::rng::Stream s = chasd::rng::Stream::keyed(12, "softmax-shift");
    for (int trial = 0; trial < 100; ++trial) {
        const Logits l = random_logits(s, 8);
        const double c = 50.0 * (s.next_double() - 0.5);
        Logits shifted = l;
        for (double& v : shifted.values) {
            v += c;
        }
        const Distribution a = chasd::softmax(l);
        const Distribution b = chasd::softmax(shifted);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(std::abs(a.probs[i] - b.probs[i]) < 1e-12);
        }
    }
}

TEST_CASE("max_prob picks the largest entry, lowest index on ties") {
    const auto unique = chasd::max_prob(Distribution{{0.1, 0.7, 0.2}});
    CHECK(unique.index == 1);
    CHECK(unique.p == 0.7);

    const auto tied = chasd::max_prob(Distribution{{0.5, 0.5}});
    CHECK(tied.index == 0);
    CHECK(tied.p == 0.5);

    CHECK_THROWS(chasd::max_prob(Distribution{}));
}

TEST_CASE("top_m_indices basic selections") {
    CHECK(chasd::top_m_indices(ScoreVector{{0.1, 0.9, 0.5}}, 1) ==
          std::vector<std::size_t>{1});
    CHECK(chasd::top_m_indices(ScoreVector{{0.4, 0.4, 0.4}}, 2) ==
          std::vector<std::size_t>{0, 1});
    CHECK(chasd::top_m_indices(ScoreVector{{1.0, 2.0}}, 2) ==
          std::vector<std::size_t>{0, 1});
}

TEST_CASE("top_m_indices rejects out-of-range m") {
    const ScoreVector s{{1.0, 2.0, 3.0}};
    CHECK_THROWS(chasd::top_m_indices(s, 0));
    CHECK_THROWS(chasd::top_m_indices(s, 4));
}

TEST_CASE("top_m_indices agrees with a full-sort oracle") {
    chasd::rng::Stream rng = chasd::rng::Stream::keyed(13, "topm-prop");
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + trial % 24;
        ScoreVector s;
        for (std::size_t i = 0; i < n; ++i) {
            // Coarse quantization forces frequent ties.
            s.scores.push_back(std::floor(8.0 * rng.next_double()) / 8.0);
        }
        const std::size_t m = 1 + static_cast<std::size_t>(rng.next_u64() % n);

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (s.scores[a] != s.scores[b]) return s.scores[a] > s.scores[b];
            return a < b;
        });
        std::vector<std::size_t> expect(order.begin(), order.begin() + m);
        std::sort(expect.begin(), expect.end());

        const auto got = chasd::top_m_indices(s, m);
        REQUIRE(got.size() == m);
        CHECK(got == expect);
    }
}
