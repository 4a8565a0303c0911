#include "chasd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace chasd {

Distribution softmax(const Logits& logits) {
    const auto& x = logits.values;
    if (x.empty()) {
        throw std::invalid_argument("softmax: empty logits");
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : x) {
        if (std::isnan(v)) {
            throw std::invalid_argument("softmax: NaN logit");
        }
        if (v == std::numeric_limits<double>::infinity()) {
            throw std::invalid_argument("softmax: +inf logit");
        }
        mx = std::max(mx, v);
    }
    if (mx == -std::numeric_limits<double>::infinity()) {
        throw std::invalid_argument("softmax: all logits are -inf");
    }

    Distribution out;
    out.probs.resize(x.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = std::exp(x[i] - mx);  // exp(-inf) == 0
        out.probs[i] = e;
        sum += e;
    }
    for (double& p : out.probs) {
        p /= sum;
    }
    return out;
}

MaxProb max_prob(const Distribution& dist) {
    if (dist.probs.empty()) {
        throw std::invalid_argument("max_prob: empty distribution");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < dist.probs.size(); ++i) {
        if (dist.probs[i] > dist.probs[best]) {
            best = i;
        }
    }
    return {best, dist.probs[best]};
}

std::vector<std::size_t> top_m_indices(const ScoreVector& scores, std::size_t m) {
    const std::size_t n = scores.size();
    if (m < 1 || m > n) {
        throw std::invalid_argument("top_m_indices: m out of range");
    }
    for (double s : scores.scores) {
        if (std::isnan(s)) {
            throw std::invalid_argument("top_m_indices: NaN score");
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores.scores[a] > scores.scores[b];
    });
    order.resize(m);
    std::sort(order.begin(), order.end());
    return order;
}

} // namespace chasd
