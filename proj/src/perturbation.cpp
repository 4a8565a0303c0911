#include "chasd/perturbation.hpp"

#include <cmath>
#include <stdexcept>

namespace chasd {

ScoreVector saliency(const AttentionMap& attention) {
    if (attention.heads < 1 || attention.tokens < 1) {
        throw std::invalid_argument("saliency: empty attention map");
    }
    if (attention.weights.size() !=
        static_cast<std::size_t>(attention.heads) * attention.tokens) {
        throw std::invalid_argument("saliency: weight buffer size mismatch");
    }
    ScoreVector s;
    s.scores.assign(attention.tokens, 0.0);
    for (int h = 0; h < attention.heads; ++h) {
        for (int i = 0; i < attention.tokens; ++i) {
            s.scores[i] += attention.at(h, i);
        }
    }
    for (double& v : s.scores) {
        v /= static_cast<double>(attention.heads);
    }
    return s;
}

PatchMask build_mask(const ScoreVector& salience, double k) {
    const std::size_t n = salience.size();
    if (n == 0) {
        throw std::invalid_argument("build_mask: empty salience");
    }
    if (!(k > 0.0) || k > 1.0) {
        throw std::invalid_argument("build_mask: k must be in (0, 1]");
    }
    const int m = static_cast<int>(std::ceil(k * static_cast<double>(n)));
    PatchMask mask;
    mask.m = m;
    mask.bits.assign(n, 0);
    for (std::size_t idx : top_m_indices(salience, static_cast<std::size_t>(m))) {
        mask.bits[idx] = 1;
    }
    return mask;
}

PixelMask upsample_mask(const PatchMask& mask, const PatchGeometry& geometry) {
    if (mask.bits.size() != static_cast<std::size_t>(geometry.patch_count())) {
        throw std::invalid_argument("upsample_mask: mask size does not match geometry");
    }
    PixelMask px;
    px.height = geometry.image_h();
    px.width = geometry.image_w();
    px.bits.assign(static_cast<std::size_t>(px.height) * px.width, 0);
    for (std::size_t i = 0; i < mask.bits.size(); ++i) {
        if (!mask.bits[i]) {
            continue;
        }
        const int pr = static_cast<int>(i) / geometry.grid_cols;
        const int pc = static_cast<int>(i) % geometry.grid_cols;
        for (int y = pr * geometry.patch_px_h; y < (pr + 1) * geometry.patch_px_h; ++y) {
            for (int x = pc * geometry.patch_px_w; x < (pc + 1) * geometry.patch_px_w; ++x) {
                px.bits[static_cast<std::size_t>(y) * px.width + x] = 1;
            }
        }
    }
    return px;
}

VisualGrid perturb(const VisualGrid& visual, const PixelMask& mask,
                   const NoiseSpec& noise) {
    const PatchGeometry& g = visual.geometry;
    if (mask.height != g.image_h() || mask.width != g.image_w()) {
        throw std::invalid_argument("perturb: mask resolution does not match image");
    }
    if (visual.pixels.size() != g.pixel_count()) {
        throw std::invalid_argument("perturb: pixel buffer size does not match geometry");
    }
    VisualGrid out = visual;
    rng::Stream stream = noise.stream;
    for (int c = 0; c < g.channels; ++c) {
        for (int y = 0; y < g.image_h(); ++y) {
            for (int x = 0; x < g.image_w(); ++x) {
                if (mask.at(y, x)) {
                    out.at(c, y, x) += noise.sigma * stream.next_normal();
                }
            }
        }
    }
    return out;
}

} // namespace chasd
