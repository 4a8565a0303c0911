#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "chasd/numerics.hpp"

namespace chasd {

// How an image is carved into visual tokens: a grid_rows x grid_cols grid of
// patches, each patch_px_h x patch_px_w pixels per channel.
struct PatchGeometry {
    int grid_rows = 0;
    int grid_cols = 0;
    int patch_px_h = 0;
    int patch_px_w = 0;
    int channels = 0;

    int patch_count() const { return grid_rows * grid_cols; }
    int image_h() const { return grid_rows * patch_px_h; }
    int image_w() const { return grid_cols * patch_px_w; }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(channels) * image_h() * image_w();
    }
    std::size_t patch_pixels() const {
        return static_cast<std::size_t>(channels) * patch_px_h * patch_px_w;
    }

    bool operator==(const PatchGeometry&) const = default;
};

// Dense pixel data laid out channel-major, then row-major within a channel:
// pixels[(c * image_h + y) * image_w + x].
struct VisualGrid {
    std::vector<double> pixels;
    PatchGeometry geometry;

    static VisualGrid zeros(const PatchGeometry& geom);

    double& at(int c, int y, int x);
    double at(int c, int y, int x) const;
};

// Attention from the generation position onto the visual tokens, one row per
// head. Each row is non-negative and sums to 1 within 1e-9.
struct AttentionMap {
    int heads = 0;
    int tokens = 0;
    std::vector<double> weights;  // heads x tokens, row-major

    double at(int head, int token) const {
        return weights[static_cast<std::size_t>(head) * tokens + token];
    }
    double& at(int head, int token) {
        return weights[static_cast<std::size_t>(head) * tokens + token];
    }
};

struct BackendOutput {
    Logits logits;
    AttentionMap attention;
};

// One next-token scoring call: prefix tokens plus an image in, logits over
// the vocabulary plus the visual attention pattern out.
class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendOutput forward(std::span<const int> prefix,
                                  const VisualGrid& visual) const = 0;
    virtual int vocab_size() const = 0;
    virtual const PatchGeometry& geometry() const = 0;
};

struct ToyBackendSpec {
    std::uint64_t seed = 0;
    int vocab_size = 32;
    PatchGeometry geometry{2, 2, 2, 2, 1};
    int embed_dim = 16;
    int head_count = 2;

    bool operator==(const ToyBackendSpec&) const = default;
};

// Deterministic self-contained backend: all weights are pure functions of the
// seed, and forward() is exactly reproducible across runs and platforms. The
// output genuinely depends on the image content through patch embeddings and
// multi-head attention, so perturbing pixels moves both logits and attention.
class ToyBackend final : public Backend {
public:
    explicit ToyBackend(const ToyBackendSpec& spec);

    BackendOutput forward(std::span<const int> prefix,
                          const VisualGrid& visual) const override;
    int vocab_size() const override { return spec_.vocab_size; }
    const PatchGeometry& geometry() const override { return spec_.geometry; }

    const ToyBackendSpec& spec() const { return spec_; }

private:
    std::vector<double> patch_embedding(const VisualGrid& visual, int patch) const;

    ToyBackendSpec spec_;
    std::vector<double> patch_proj_;   // embed_dim x patch_pixels
    std::vector<double> token_embed_;  // vocab x embed_dim
    std::vector<double> query_proj_;   // heads x embed_dim x embed_dim
    std::vector<double> key_proj_;     // heads x embed_dim x embed_dim
    std::vector<double> out_proj_;     // vocab x embed_dim
};

std::unique_ptr<Backend> build_toy_backend(const ToyBackendSpec& spec);

} // namespace chasd
