#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "chasd/backend.hpp"
#include "chasd/numerics.hpp"
#include "chasd/rng.hpp"

namespace chasd {

// Which visual tokens are selected for perturbation. bits[i] is 1 for the m
// highest-saliency tokens (ties to the lower index), 0 elsewhere.
struct PatchMask {
    std::vector<std::uint8_t> bits;
    int m = 0;

    bool operator==(const PatchMask&) const = default;
};

// The patch mask lifted to pixel resolution: every pixel of a selected patch
// is 1, across all channels.
struct PixelMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> bits;  // height x width, row-major

    bool at(int y, int x) const {
        return bits[static_cast<std::size_t>(y) * width + x] != 0;
    }

    bool operator==(const PixelMask&) const = default;
};

// Additive Gaussian noise: each selected pixel gets an independent
// sigma-scaled standard normal drawn from `stream`.
struct NoiseSpec {
    double sigma = 1.0;
    rng::Stream stream{0};
};

// Per-token attention salience, averaged over heads.
ScoreVector saliency(const AttentionMap& attention);

// Select the ceil(k * N) most-attended tokens, 0 < k <= 1.
PatchMask build_mask(const ScoreVector& salience, double k);

// Expand a patch-level mask to pixel resolution for the given geometry.
PixelMask upsample_mask(const PatchMask& mask, const PatchGeometry& geometry);

// Add noise to exactly the masked pixels; everything else is copied through
// bit-for-bit. Draws are consumed lazily in pixel storage order (channel,
// row, column), so the value landing on a given masked pixel depends only on
// how many masked pixels precede it.
VisualGrid perturb(const VisualGrid& visual, const PixelMask& mask,
                   const NoiseSpec& noise);

} // namespace chasd
