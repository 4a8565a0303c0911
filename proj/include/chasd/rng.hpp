#pragma once

#include <cstdint>
#include <string_view>

namespace chasd::rng {

// SplitMix64 finalizer. Full-avalanche mix of a 64-bit word.
std::uint64_t mix64(std::uint64_t x);

// FNV-1a over the label bytes, for deriving named substreams.
std::uint64_t hash_label(std::string_view label);

// Counter-based random stream: output i is a pure function of (key, i),
// so draws never depend on construction order or on what other streams
// have consumed. Copying a stream yields an identical replayable state.
class Stream {
public:
    explicit Stream(std::uint64_t key) : key_(key) {}

    static Stream keyed(std::uint64_t seed, std::string_view label);

    // Independent substreams. Splits commute with draws on the parent.
    Stream split(std::string_view label) const;
    Stream split(std::uint64_t index) const;

    std::uint64_t next_u64();
    double next_double();   // uniform [0, 1)
    double next_normal();   // standard normal, Box-Muller (two uniforms per draw)

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

    bool operator==(const Stream&) const = default;

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Standard-normal value number `index` of the stream keyed by (seed, label).
// Pure function of its arguments; used to fill parameter tables whose values
// must not depend on fill order.
double keyed_normal(std::uint64_t seed, std::string_view label, std::uint64_t index);

} // namespace chasd::rng
