#include "chasd/backend.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "chasd/rng.hpp"

namespace chasd {

namespace {

void validate_geometry(const PatchGeometry& g) {
    if (g.grid_rows < 1 || g.grid_cols < 1 || g.patch_px_h < 1 ||
        g.patch_px_w < 1 || g.channels < 1) {
        throw std::invalid_argument("geometry: all dimensions must be >= 1");
    }
}

void validate_spec(const ToyBackendSpec& spec) {
    validate_geometry(spec.geometry);
    if (spec.vocab_size < 2) {
        throw std::invalid_argument("backend spec: vocab_size must be >= 2");
    }
    if (spec.embed_dim < 1) {
        throw std::invalid_argument("backend spec: embed_dim must be >= 1");
    }
    if (spec.head_count < 1) {
        throw std::invalid_argument("backend spec: head_count must be >= 1");
    }
}

std::vector<double> fill_table(std::uint64_t seed, std::string_view name,
                               std::size_t count, double scale) {
    std::vector<double> t(count);
    for (std::size_t i = 0; i < count; ++i) {
        t[i] = scale * rng::keyed_normal(seed, name, i);
    }
    return t;
}

} // namespace

VisualGrid VisualGrid::zeros(const PatchGeometry& geom) {
    validate_geometry(geom);
    VisualGrid g;
    g.geometry = geom;
    g.pixels.assign(geom.pixel_count(), 0.0);
    return g;
}

double& VisualGrid::at(int c, int y, int x) {
    return pixels[(static_cast<std::size_t>(c) * geometry.image_h() + y) *
                      geometry.image_w() + x];
}

double VisualGrid::at(int c, int y, int x) const {
    return pixels[(static_cast<std::size_t>(c) * geometry.image_h() + y) *
                      geometry.image_w() + x];
}

ToyBackend::ToyBackend(const ToyBackendSpec& spec) : spec_(spec) {
    validate_spec(spec_);
    const std::size_t d = spec_.embed_dim;
    const std::size_t v = spec_.vocab_size;
    const std::size_t h = spec_.head_count;
    const std::size_t ppx = spec_.geometry.patch_pixels();

    patch_proj_ = fill_table(spec_.seed, "patch_proj", d * ppx,
                             1.0 / std::sqrt(static_cast<double>(ppx)));
    token_embed_ = fill_table(spec_.seed, "token_embed", v * d, 1.0);
    const double dscale = 1.0 / std::sqrt(static_cast<double>(d));
    query_proj_ = fill_table(spec_.seed, "query_proj", h * d * d, dscale);
    key_proj_ = fill_table(spec_.seed, "key_proj", h * d * d, dscale);
    out_proj_ = fill_table(spec_.seed, "out_proj", v * d, dscale);
}

std::vector<double> ToyBackend::patch_embedding(const VisualGrid& visual,
                                                int patch) const {
    const PatchGeometry& g = spec_.geometry;
    const int pr = patch / g.grid_cols;
    const int pc = patch % g.grid_cols;
    const std::size_t d = spec_.embed_dim;

    // Flatten the patch in (channel, y, x) order, then project to embed_dim.
    std::vector<double> flat;
    flat.reserve(g.patch_pixels());
    for (int c = 0; c < g.channels; ++c) {
        for (int y = pr * g.patch_px_h; y < (pr + 1) * g.patch_px_h; ++y) {
            for (int x = pc * g.patch_px_w; x < (pc + 1) * g.patch_px_w; ++x) {
                flat.push_back(visual.at(c, y, x));
            }
        }
    }
    std::vector<double> e(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < flat.size(); ++j) {
            acc += patch_proj_[i * flat.size() + j] * flat[j];
        }
        e[i] = acc;
    }
    return e;
}

BackendOutput ToyBackend::forward(std::span<const int> prefix,
                                  const VisualGrid& visual) const {
    if (prefix.empty()) {
        throw std::invalid_argument("forward: empty prefix");
    }
    if (!(visual.geometry == spec_.geometry)) {
        throw std::invalid_argument("forward: visual geometry does not match backend");
    }
    if (visual.pixels.size() != spec_.geometry.pixel_count()) {
        throw std::invalid_argument("forward: pixel buffer size does not match geometry");
    }
    const std::size_t d = spec_.embed_dim;
    for (int tok : prefix) {
        if (tok < 0 || tok >= spec_.vocab_size) {
            throw std::invalid_argument("forward: token " + std::to_string(tok) +
                                        " outside vocabulary");
        }
    }

    // Prefix state: mean of the prefix token embeddings.
    std::vector<double> state(d, 0.0);
    for (int tok : prefix) {
        for (std::size_t i = 0; i < d; ++i) {
            state[i] += token_embed_[static_cast<std::size_t>(tok) * d + i];
        }
    }
    for (double& s : state) {
        s /= static_cast<double>(prefix.size());
    }

    const int n = spec_.geometry.patch_count();
    std::vector<std::vector<double>> patches(n);
    for (int p = 0; p < n; ++p) {
        patches[p] = patch_embedding(visual, p);
    }

    // Per-head scaled dot-product attention from the prefix state onto the
    // visual tokens, then a head-averaged pooled read of the patch embeddings.
    const int heads = spec_.head_count;
    AttentionMap attn;
    attn.heads = heads;
    attn.tokens = n;
    attn.weights.assign(static_cast<std::size_t>(heads) * n, 0.0);

    std::vector<double> pooled(d, 0.0);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    std::vector<double> q(d), kj(d), scores(n);
    for (int h = 0; h < heads; ++h) {
        const double* wq = &query_proj_[static_cast<std::size_t>(h) * d * d];
        const double* wk = &key_proj_[static_cast<std::size_t>(h) * d * d];
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                acc += wq[i * d + j] * state[j];
            }
            q[i] = acc;
        }
        for (int p = 0; p < n; ++p) {
            for (std::size_t i = 0; i < d; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    acc += wk[i * d + j] * patches[p][j];
                }
                kj[i] = acc;
            }
            double dot = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                dot += q[i] * kj[i];
            }
            scores[p] = dot * inv_sqrt_d;
        }
        const Distribution row = softmax(Logits{scores});
        for (int p = 0; p < n; ++p) {
            attn.at(h, p) = row.probs[p];
            for (std::size_t i = 0; i < d; ++i) {
                pooled[i] += row.probs[p] * patches[p][i];
            }
        }
    }
    for (double& v : pooled) {
        v /= static_cast<double>(heads);
    }

    BackendOutput out;
    out.logits.values.assign(spec_.vocab_size, 0.0);
    for (int w = 0; w < spec_.vocab_size; ++w) {
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            acc += out_proj_[static_cast<std::size_t>(w) * d + i] * (state[i] + pooled[i]);
        }
        out.logits.values[w] = acc;
    }
    out.attention = std::move(attn);
    return out;
}

std::unique_ptr<Backend> build_toy_backend(const ToyBackendSpec& spec) {
    return std::make_unique<ToyBackend>(spec);
}

} // namespace chasd
