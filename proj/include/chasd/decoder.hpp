#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "chasd/backend.hpp"
#include "chasd/calibrate.hpp"
#include "chasd/numerics.hpp"
#include "chasd/rng.hpp"

namespace chasd {

enum class SamplingMode { kGreedy, kSample };

struct DecoderConfig {
    double alpha = 1.0;
    double beta = 0.1;
    double tau = 0.5;
    double k = 0.1;
    double sigma = 1.0;
    SamplingMode mode = SamplingMode::kGreedy;
    double temperature = 1.0;
    int max_len = 16;
    int eos_token = 0;
    std::uint64_t seed = 0;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    bool operator==(const DecoderConfig&) const = default;
};

struct StepTrace {
    int t = 0;
    int token = 0;
    double p_max = 0.0;
    bool triggered = false;
    std::vector<std::size_t> mask_indices;  // empty when not triggered
    int candidate_count = 0;                // 0 when not triggered
    int forward_calls = 1;                  // 2 iff triggered

    bool operator==(const StepTrace&) const = default;
};

struct DecodeTrace {
    std::vector<StepTrace> steps;
    std::vector<int> tokens;
    long long total_forwards = 0;
    double trigger_rate = 0.0;

    bool operator==(const DecodeTrace&) const = default;
};

// Per-sequence random state. Noise and sampling use independent per-step
// substreams, so changing sigma can never shift a sampling outcome and every
// step's draws are independent of how many draws earlier steps consumed.
class DecodeRng {
public:
    explicit DecodeRng(std::uint64_t seed)
        : noise_root_(rng::Stream::keyed(seed, "noise")),
          sample_root_(rng::Stream::keyed(seed, "sample")) {}

    rng::Stream noise_stream(int step) const {
        return noise_root_.split(static_cast<std::uint64_t>(step));
    }
    rng::Stream sampling_stream(int step) const {
        return sample_root_.split(static_cast<std::uint64_t>(step));
    }

private:
    rng::Stream noise_root_;
    rng::Stream sample_root_;
};

// Internal per-step quantities exposed for verification: the raw original
// logits, the negative-branch logits when one ran, the logits the token was
// actually drawn from, and the gate decision.
struct StepLogits {
    Logits original;
    std::optional<Logits> negative;
    Logits final_logits;
    GateDecision decision;
};

struct StepOutcome {
    int token = 0;
    StepTrace trace;
};

using StepObserver = std::function<void(const StepTrace&, const StepLogits&)>;

// One decoding step: original forward, gate, and on trigger the full
// saliency -> mask -> perturb -> negative forward -> calibrate chain.
// `capture`, when non-null, receives the step's internal logits.
StepOutcome decode_step(const Backend& backend, std::span<const int> prefix,
                        const VisualGrid& visual, const DecoderConfig& cfg,
                        const DecodeRng& rng, int step,
                        StepLogits* capture = nullptr);

// Autoregressive loop: appends each emitted token to the prefix until the
// EOS token appears (it is recorded and counted) or max_len steps elapse.
DecodeTrace decode(const Backend& backend, std::span<const int> prompt,
                   const VisualGrid& visual, const DecoderConfig& cfg,
                   const StepObserver& observer = {});

// Greedy: argmax with lowest-index tie-break, no randomness consumed.
// Sample: one multinomial draw from softmax(logits / temperature).
int sample_token(const Logits& logits, SamplingMode mode, double temperature,
                 rng::Stream& stream);

struct EfficiencyReport {
    long long length = 0;
    long long triggered_count = 0;
    double trigger_rate = 0.0;
    long long total_forwards = 0;
    double expected_forwards = 0.0;  // (1 + trigger_rate) * length
};

EfficiencyReport efficiency_report(const DecodeTrace& trace);

} // namespace chasd
