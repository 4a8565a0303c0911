#pragma once

#include <cstddef>
#include <vector>

namespace chasd {

// Raw next-token scores, one per vocabulary entry. -inf marks an entry that
// has been ruled out; NaN and +inf are never valid.
struct Logits {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool operator==(const Logits&) const = default;
};

// Probabilities over the same index space. Entries are finite, non-negative,
// and sum to 1 within 1e-12.
struct Distribution {
    std::vector<double> probs;

    std::size_t size() const { return probs.size(); }
    bool operator==(const Distribution&) const = default;
};

// Generic per-index scores (e.g. visual-token saliency). Unlike Logits these
// carry no vocabulary meaning.
struct ScoreVector {
    std::vector<double> scores;

    std::size_t size() const { return scores.size(); }
    bool operator==(const ScoreVector&) const = default;
};

struct MaxProb {
    std::size_t index;
    double p;
};

// Numerically stable softmax. -inf logits map to probability zero. Throws if
// the input is empty, contains NaN or +inf, or has no finite entry at all.
Distribution softmax(const Logits& logits);

// Largest probability and its index; ties resolve to the lowest index.
MaxProb max_prob(const Distribution& dist);

// Indices of the m largest scores, returned in ascending index order. Ties
// resolve to the lower index. Requires 1 <= m <= scores.size().
std::vector<std::size_t> top_m_indices(const ScoreVector& scores, std::size_t m);

} // namespace chasd
