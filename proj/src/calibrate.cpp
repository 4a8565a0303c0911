#include "chasd/calibrate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace chasd {

GateDecision gate(const Distribution& dist_ori, const GateConfig& cfg) {
    if (std::isnan(cfg.tau) || cfg.tau < 0.0 || cfg.tau > 1.0) {
        throw std::invalid_argument("gate: tau must be in [0, 1]");
    }
    const MaxProb mp = max_prob(dist_ori);
    GateDecision d;
    d.p_max = mp.p;
    d.argmax_token = mp.index;
    d.triggered = mp.p < cfg.tau;
    return d;
}

Logits contrast_logits(const Logits& l_ori, const Logits& l_neg, double alpha) {
    if (l_ori.size() != l_neg.size()) {
        throw std::invalid_argument("contrast_logits: length mismatch");
    }
    if (std::isnan(alpha) || alpha < 0.0) {
        throw std::invalid_argument("contrast_logits: alpha must be >= 0");
    }
    Logits out;
    out.values.resize(l_ori.size());
    for (std::size_t i = 0; i < l_ori.size(); ++i) {
        const double x = l_ori.values[i];
        const double y = l_neg.values[i];
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw std::invalid_argument("contrast_logits: non-finite input logit");
        }
        // (1+a)x - ay, written so that a=0 and y=x collapse to x exactly.
        out.values[i] = x + alpha * (x - y);
    }
    return out;
}

std::vector<std::size_t> apc_candidates(const Distribution& dist_ori, double beta) {
    if (std::isnan(beta) || beta < 0.0 || beta >= 1.0) {
        throw std::invalid_argument("apc_candidates: beta must be in [0, 1)");
    }
    const MaxProb mp = max_prob(dist_ori);
    const double threshold = beta * mp.p;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < dist_ori.size(); ++i) {
        if (dist_ori.probs[i] > threshold) {
            out.push_back(i);
        }
    }
    return out;
}

Logits apply_candidates(const Logits& l_cd, const std::vector<std::size_t>& candidates) {
    if (candidates.empty()) {
        throw std::invalid_argument("apply_candidates: empty candidate set");
    }
    Logits out;
    out.values.assign(l_cd.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t idx : candidates) {
        if (idx >= l_cd.size()) {
            throw std::invalid_argument("apply_candidates: candidate index out of range");
        }
        out.values[idx] = l_cd.values[idx];
    }
    return out;
}

Logits calibrated_logits(const Logits& l_ori, const Logits& l_neg,
                         const ContrastConfig& cfg) {
    return apply_candidates(contrast_logits(l_ori, l_neg, cfg.alpha),
                            apc_candidates(softmax(l_ori), cfg.beta));
}

} // namespace chasd
