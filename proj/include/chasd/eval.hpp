#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace chasd {

enum class YesNo { kYes, kNo };

// Case-insensitive "yes"/"no"; anything else throws.
YesNo parse_yes_no(std::string_view text);
std::string to_string(YesNo v);

// "yes" is the positive class throughout.
struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t tn = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + tn + fp + fn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

struct MmeCategory {
    std::string name;
    double acc = 0.0;       // plain per-question accuracy, [0, 1]
    double acc_plus = 0.0;  // both-of-pair accuracy, [0, 1]
};

ConfusionMatrix confusion(const std::vector<YesNo>& preds,
                          const std::vector<YesNo>& golds);

// (tp + tn) / total.
double accuracy(const ConfusionMatrix& cm);

// 2*tp / (2*tp + fp + fn). Throws when the denominator is zero: an
// evaluation with no positives anywhere is a data problem, not a score of 0.
double f1(const ConfusionMatrix& cm);

// ((100 - chair_i) + f1_pct) / 2, both inputs on a 0-100 scale.
double amber_score(double chair_i, double f1_pct);

// Sum over categories of 100 * (acc + acc_plus).
double mme_score(const std::vector<MmeCategory>& categories);

// Mean of judge ratings, each in [0, 6].
double mmhal_average(const std::vector<double>& scores);

} // namespace chasd
