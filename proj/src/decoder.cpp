#include "chasd/decoder.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "chasd/perturbation.hpp"

namespace chasd {

void DecoderConfig::validate() const {
    if (std::isnan(alpha) || alpha < 0.0) {
        throw std::invalid_argument("config: alpha must be >= 0");
    }
    if (std::isnan(beta) || beta < 0.0 || beta >= 1.0) {
        throw std::invalid_argument("config: beta must be in [0, 1)");
    }
    if (std::isnan(tau) || tau < 0.0 || tau > 1.0) {
        throw std::invalid_argument("config: tau must be in [0, 1]");
    }
    if (std::isnan(k) || !(k > 0.0) || k > 1.0) {
        throw std::invalid_argument("config: k must be in (0, 1]");
    }
    if (std::isnan(sigma) || sigma < 0.0) {
        throw std::invalid_argument("config: sigma must be >= 0");
    }
    if (std::isnan(temperature) || !(temperature > 0.0)) {
        throw std::invalid_argument("config: temperature must be > 0");
    }
    if (max_len < 1) {
        throw std::invalid_argument("config: max_len must be >= 1");
    }
    if (eos_token < 0) {
        throw std::invalid_argument("config: eos_token must be >= 0");
    }
}

int sample_token(const Logits& logits, SamplingMode mode, double temperature,
                 rng::Stream& stream) {
    const auto& x = logits.values;
    if (x.empty()) {
        throw std::invalid_argument("sample_token: empty logits");
    }
    if (mode == SamplingMode::kGreedy) {
        std::size_t best = 0;
        bool any_finite = std::isfinite(x[0]);
        for (std::size_t i = 1; i < x.size(); ++i) {
            if (x[i] > x[best]) {
                best = i;
            }
            any_finite = any_finite || std::isfinite(x[i]);
        }
        if (!any_finite) {
            throw std::invalid_argument("sample_token: no finite logit");
        }
        return static_cast<int>(best);
    }
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("sample_token: temperature must be > 0");
    }
    Logits scaled;
    scaled.values.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        scaled.values[i] = x[i] / temperature;  // -inf survives the division
    }
    const Distribution dist = softmax(scaled);
    const double u = stream.next_double();
    double cum = 0.0;
    int last_positive = -1;
    for (std::size_t i = 0; i < dist.probs.size(); ++i) {
        if (dist.probs[i] > 0.0) {
            last_positive = static_cast<int>(i);
        }
        cum += dist.probs[i];
        if (u < cum) {
            return static_cast<int>(i);
        }
    }
    // Rounding can leave cum marginally under 1; fall back to the last token
    // that carries any mass.
    return last_positive;
}

StepOutcome decode_step(const Backend& backend, std::span<const int> prefix,
                        const VisualGrid& visual, const DecoderConfig& cfg,
                        const DecodeRng& rng, int step, StepLogits* capture) {
    cfg.validate();
    const BackendOutput out = backend.forward(prefix, visual);
    const Distribution dist_ori = softmax(out.logits);
    const GateDecision decision = gate(dist_ori, GateConfig{cfg.tau});

    StepOutcome result;
    result.trace.t = step;
    result.trace.p_max = decision.p_max;
    result.trace.triggered = decision.triggered;

    if (capture) {
        capture->original = out.logits;
        capture->negative.reset();
        capture->decision = decision;
    }

    Logits final_logits;
    if (!decision.triggered) {
        final_logits = out.logits;
        result.trace.forward_calls = 1;
    } else {
        const ScoreVector scores = saliency(out.attention);
        const PatchMask mask = build_mask(scores, cfg.k);
        const PixelMask pixel_mask = upsample_mask(mask, backend.geometry());
        NoiseSpec noise;
        noise.sigma = cfg.sigma;
        noise.stream = rng.noise_stream(step);
        const VisualGrid perturbed = perturb(visual, pixel_mask, noise);
        const Logits l_neg = backend.forward(prefix, perturbed).logits;

        const auto candidates = apc_candidates(dist_ori, cfg.beta);
        final_logits = apply_candidates(
            contrast_logits(out.logits, l_neg, cfg.alpha), candidates);

        result.trace.forward_calls = 2;
        result.trace.candidate_count = static_cast<int>(candidates.size());
        for (std::size_t i = 0; i < mask.bits.size(); ++i) {
            if (mask.bits[i]) {
                result.trace.mask_indices.push_back(i);
            }
        }
        if (capture) {
            capture->negative = l_neg;
        }
    }

    if (capture) {
        capture->final_logits = final_logits;
    }
    rng::Stream sampler = rng.sampling_stream(step);
    result.token = sample_token(final_logits, cfg.mode, cfg.temperature, sampler);
    result.trace.token = result.token;
    return result;
}

DecodeTrace decode(const Backend& backend, std::span<const int> prompt,
                   const VisualGrid& visual, const DecoderConfig& cfg,
                   const StepObserver& observer) {
    cfg.validate();
    if (prompt.empty()) {
        throw std::invalid_argument("decode: empty prompt");
    }
    const DecodeRng rng(cfg.seed);
    std::vector<int> prefix(prompt.begin(), prompt.end());

    DecodeTrace trace;
    long long triggered = 0;
    for (int t = 0; t < cfg.max_len; ++t) {
        StepLogits internals;
        const StepOutcome step =
            decode_step(backend, prefix, visual, cfg, rng, t,
                        observer ? &internals : nullptr);
        trace.steps.push_back(step.trace);
        trace.tokens.push_back(step.token);
        trace.total_forwards += step.trace.forward_calls;
        if (step.trace.triggered) {
            ++triggered;
        }
        if (observer) {
            observer(step.trace, internals);
        }
        if (step.token == cfg.eos_token) {
            break;
        }
        prefix.push_back(step.token);
    }
    trace.trigger_rate =
        static_cast<double>(triggered) / static_cast<double>(trace.steps.size());
    return trace;
}

EfficiencyReport efficiency_report(const DecodeTrace& trace) {
    if (trace.steps.empty()) {
        throw std::invalid_argument("efficiency_report: empty trace");
    }
    EfficiencyReport r;
    r.length = static_cast<long long>(trace.steps.size());
    for (const StepTrace& s : trace.steps) {
        if (s.triggered) {
            ++r.triggered_count;
        }
    }
    r.trigger_rate = static_cast<double>(r.triggered_count) /
                     static_cast<double>(r.length);
    r.total_forwards = trace.total_forwards;
    r.expected_forwards = (1.0 + r.trigger_rate) * static_cast<double>(r.length);
    return r;
}

} // namespace chasd
