#pragma once

#include <cstddef>
#include <vector>

#include "chasd/numerics.hpp"

namespace chasd {

struct GateConfig {
    double tau = 0.5;  // confidence threshold in [0, 1]
};

struct ContrastConfig {
    double alpha = 1.0;  // contrastive strength, >= 0
    double beta = 0.1;   // candidate-set ratio in [0, 1)
};

struct GateDecision {
    bool triggered = false;
    double p_max = 0.0;
    std::size_t argmax_token = 0;
};

// Fire the negative branch only when the top probability is below tau.
// Strict: p_max exactly equal to tau does not trigger.
GateDecision gate(const Distribution& dist_ori, const GateConfig& cfg);

// Elementwise (1 + alpha) * l_ori - alpha * l_neg.
Logits contrast_logits(const Logits& l_ori, const Logits& l_neg, double alpha);

// Tokens whose ORIGINAL probability strictly exceeds beta * max probability,
// in ascending index order. For beta < 1 the set always contains the argmax.
std::vector<std::size_t> apc_candidates(const Distribution& dist_ori, double beta);

// Keep candidate entries unchanged; set everything else to -inf.
Logits apply_candidates(const Logits& l_cd, const std::vector<std::size_t>& candidates);

// Full calibration: contrast the two logit vectors, then restrict support to
// the candidate set computed from the original distribution (never from the
// contrasted one).
Logits calibrated_logits(const Logits& l_ori, const Logits& l_neg,
                         const ContrastConfig& cfg);

} // namespace chasd
