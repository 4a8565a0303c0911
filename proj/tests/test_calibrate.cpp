#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "chasd/calibrate.hpp"
#include "chasd/rng.hpp"

using chasd::ContrastConfig;
using chasd::Distribution;
using chasd::GateConfig;
using chasd::Logits;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Logits random_logits(chasd::rng::Stream& s, std::size_t n, double scale = 4.0) {
    Logits l;
    for (std::size_t i = 0; i < n; ++i) {
        l.values.push_back(scale * (s.next_double() - 0.5));
    }
    return l;
}

} // namespace

TEST_CASE("gate fires only below the threshold") {
    const Distribution confident{{0.9, 0.05, 0.05}};
    CHECK_FALSE(chasd::gate(confident, GateConfig{0.5}).triggered);
    CHECK(chasd::gate(confident, GateConfig{0.95}).triggered);

    const auto d = chasd::gate(confident, GateConfig{0.5});
    CHECK(d.p_max == 0.9);
    CHECK(d.argmax_token == 0);
}

TEST_CASE("gate boundary is strict: p_max equal to tau does not trigger") {
    const Distribution d{{0.5, 0.3, 0.2}};
    CHECK_FALSE(chasd::gate(d, GateConfig{0.5}).triggered);
}

TEST_CASE("tau zero never triggers") {
    chasd::rng::Stream s = chasd::rng::Stream::keyed(41, "gate-zero");
    for (int trial = 0; trial < 50; ++trial) {
        const Logits l = random_logits(s, 2 + trial % 10);
        CHECK_FALSE(chasd::gate(chasd::softmax(l), GateConfig{0.0}).triggered);
    }
}

TEST_CASE("gate validates tau") {
    const Distribution d{{1.0}};
    CHECK_THROWS(chasd::gate(d, GateConfig{-0.1}));
    CHECK_THROWS(chasd::gate(d, GateConfig{1.5}));
}

TEST_CASE("contrast with alpha zero is the identity, exactly") {
    chasd::rng::Stream s = chasd::rng::Stream::keyed(42, "contrast-a0");
    for (int trial = 0; trial < 50; ++trial) {
        const Logits x = random_logits(s, 8);
        const Logits y = random_logits(s, 8);
        CHECK(chasd::contrast_logits(x, y, 0.0) == x);
    }
}

TEST_CASE("contrast of equal branches is the identity for any alpha") {
    chasd::rng::Stream s = chasd::rng::Stream::keyed(43, "contrast-eq");
    for (int trial = 0; trial < 50; ++trial) {
        const Logits x = random_logits(s, 6);
        const double alpha = 5.0 * s.next_double();
        CHECK(chasd::contrast_logits(x, x, alpha) == x);
    }
}

TEST_CASE("contrast arithmetic at alpha 1") {
    const Logits out = chasd::contrast_logits(Logits{{2.0, 0.0}}, Logits{{1.0, 1.0}}, 1.0);
    CHECK(out.values == std::vector<double>{3.0, -1.0});
}

TEST_CASE("contrast rejects bad inputs") {
    CHECK_THROWS(chasd::contrast_logits(Logits{{1.0}}, Logits{{1.0, 2.0}}, 1.0));
    CHECK_THROWS(chasd::contrast_logits(Logits{{1.0}}, Logits{{2.0}}, -0.5));
    CHECK_THROWS(chasd::contrast_logits(Logits{{kInf}}, Logits{{2.0}}, 1.0));
    CHECK_THROWS(chasd::contrast_logits(Logits{{1.0}}, Logits{{-kInf}}, 1.0));
}

TEST_CASE("contrast commutes with a common shift") {
    chasd::rng::Stream s = chasd::rng::Stream::keyed(44, "contrast-shift");
    for (int trial = 0; trial < 50; ++trial) {
        const Logits x = random_logits(s, 8);
        const Logits y = random_logits(s, 8);
        const double alpha = 3.0 * s.next_double();
        const double c = 10.0 * (s.next_double() - 0.5);
        Logits xs = x, ys = y;
        for (double& v : xs.values) v += c;
        for (double& v : ys.values) v += c;
        const Logits base = chasd::contrast_logits(x, y, alpha);
        const Logits shifted = chasd::contrast_logits(xs, ys, alpha);
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(std::abs(shifted.values[i] - (base.values[i] + c)) < 1e-9);
        }
    }
}

TEST_CASE("candidates at beta zero are every token with positive probability") {
    const Distribution d = chasd::softmax(Logits{{-kInf, 1.0, 2.0, 0.0}});
    CHECK(chasd::apc_candidates(d, 0.0) == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("candidate threshold is strict") {
    const Distribution d{{0.5, 0.3, 0.15, 0.05}};
    // threshold = 0.1 * 0.5 = 0.05; 0.05 is not > 0.05
    CHECK(chasd::apc_candidates(d, 0.1) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("candidates always include the argmax for beta below one") {
    chasd::rng::Stream s = chasd::rng::Stream::keyed(45, "apc-argmax");
    for (int trial = 0; trial < 100; ++trial) {
        const Distribution d = chasd::softmax(random_logits(s, 2 + trial % 12));
        const double beta = 0.999 * s.next_double();
        const auto cands = chasd::apc_candidates(d, beta);
        REQUIRE(!cands.empty());
        const auto mp = chasd::max_prob(d);
        bool found = false;
        for (std::size_t c : cands) {
            found = found || c == mp.index;
        }
        CHECK(found);
    }
}

TEST_CASE("apc rejects beta outside [0, 1)") {
    const Distribution d{{1.0}};
    CHECK_THROWS(chasd::apc_candidates(d, -0.1));
    CHECK_THROWS(chasd::apc_candidates(d, 1.0));
}

TEST_CASE("apply_candidates masks exactly the complement") {
    const Logits l{{1.0, 2.0, 3.0, 4.0}};
    const Logits out = chasd::apply_candidates(l, {2});
    CHECK(out.values[0] == -kInf);
    CHECK(out.values[1] == -kInf);
    CHECK(out.values[2] == 3.0);
    CHECK(out.values[3] == -kInf);

    CHECK(chasd::apply_candidates(l, {0, 1, 2, 3}) == l);
}

TEST_CASE("apply_candidates leaves zero mass outside the set") {
    const Logits l{{1.0, 2.0, 3.0, 4.0}};
    const Distribution d = chasd::softmax(chasd::apply_candidates(l, {0, 1}));
    CHECK(d.probs[0] > 0.0);
    CHECK(d.probs[1] > 0.0);
    CHECK(d.probs[2] == 0.0);
    CHECK(d.probs[3] == 0.0);
}

TEST_CASE("apply_candidates rejects empty or out-of-range sets") {
    const Logits l{{1.0, 2.0}};
    CHECK_THROWS(chasd::apply_candidates(l, {}));
    CHECK_THROWS(chasd::apply_candidates(l, {2}));
}

TEST_CASE("calibrated_logits equals the hand-composed stages") {
    chasd::rng::Stream s = chasd::rng::Stream::keyed(46, "calibrated");
    for (int trial = 0; trial < 50; ++trial) {
        const Logits x = random_logits(s, 16);
        const Logits y = random_logits(s, 16);
        const ContrastConfig cfg{1.0, 0.1};
        const Logits got = chasd::calibrated_logits(x, y, cfg);
        const Logits expect = chasd::apply_candidates(
            chasd::contrast_logits(x, y, cfg.alpha),
            chasd::apc_candidates(chasd::softmax(x), cfg.beta));
        CHECK(got == expect);
    }
}

TEST_CASE("calibrating against an identical negative just masks the originals") {
    chasd::rng::Stream s = chasd::rng::Stream::keyed(47, "calibrated-eq");
    for (int trial = 0; trial < 50; ++trial) {
        const Logits x = random_logits(s, 12);
        const ContrastConfig cfg{0.5 + 2.0 * s.next_double(), 0.1};
        const Logits got = chasd::calibrated_logits(x, x, cfg);
        const auto cands = chasd::apc_candidates(chasd::softmax(x), cfg.beta);
        const Logits expect = chasd::apply_candidates(x, cands);
        CHECK(got == expect);

        // The argmax survives calibration untouched.
        std::size_t xa = 0, ga = 0;
        for (std::size_t i = 1; i < x.size(); ++i) {
            if (x.values[i] > x.values[xa]) xa = i;
            if (got.values[i] > got.values[ga]) ga = i;
        }
        CHECK(xa == ga);
    }
}

TEST_CASE("beta zero keeps every positive-probability token unmasked") {
    chasd::rng::Stream s = chasd::rng::Stream::keyed(48, "calibrated-b0");
    const Logits x = random_logits(s, 10);
    const Logits y = random_logits(s, 10);
    const Logits got = chasd::calibrated_logits(x, y, ContrastConfig{1.0, 0.0});
    for (double v : got.values) {
        CHECK(v != -kInf);
    }
}
