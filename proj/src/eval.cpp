#include "chasd/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace chasd {

YesNo parse_yes_no(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "yes") {
        return YesNo::kYes;
    }
    if (lower == "no") {
        return YesNo::kNo;
    }
    throw std::invalid_argument("expected \"yes\" or \"no\", got \"" +
                                std::string(text) + "\"");
}

std::string to_string(YesNo v) {
    return v == YesNo::kYes ? "yes" : "no";
}

ConfusionMatrix confusion(const std::vector<YesNo>& preds,
                          const std::vector<YesNo>& golds) {
    if (preds.size() != golds.size()) {
        throw std::invalid_argument("confusion: prediction/gold length mismatch");
    }
    if (preds.empty()) {
        throw std::invalid_argument("confusion: empty input");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool p = preds[i] == YesNo::kYes;
        const bool g = golds[i] == YesNo::kYes;
        if (p && g) {
            ++cm.tp;
        } else if (!p && !g) {
            ++cm.tn;
        } else if (p && !g) {
            ++cm.fp;
        } else {
            ++cm.fn;
        }
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    if (cm.tp < 0 || cm.tn < 0 || cm.fp < 0 || cm.fn < 0) {
        throw std::invalid_argument("accuracy: negative count");
    }
    if (cm.total() == 0) {
        throw std::invalid_argument("accuracy: empty confusion matrix");
    }
    return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double f1(const ConfusionMatrix& cm) {
    if (cm.tp < 0 || cm.tn < 0 || cm.fp < 0 || cm.fn < 0) {
        throw std::invalid_argument("f1: negative count");
    }
    const std::int64_t denom = 2 * cm.tp + cm.fp + cm.fn;
    if (denom == 0) {
        throw std::invalid_argument("f1: undefined (no positives in predictions or golds)");
    }
    return static_cast<double>(2 * cm.tp) / static_cast<double>(denom);
}

double amber_score(double chair_i, double f1_pct) {
    if (std::isnan(chair_i) || chair_i < 0.0 || chair_i > 100.0) {
        throw std::invalid_argument("amber_score: chair_i must be in [0, 100]");
    }
    if (std::isnan(f1_pct) || f1_pct < 0.0 || f1_pct > 100.0) {
        throw std::invalid_argument("amber_score: f1_pct must be in [0, 100]");
    }
    return ((100.0 - chair_i) + f1_pct) / 2.0;
}

double mme_score(const std::vector<MmeCategory>& categories) {
    if (categories.empty()) {
        throw std::invalid_argument("mme_score: no categories");
    }
    double total = 0.0;
    for (const MmeCategory& c : categories) {
        if (std::isnan(c.acc) || c.acc < 0.0 || c.acc > 1.0) {
            throw std::invalid_argument("mme_score: acc out of [0, 1] in category \"" +
                                        c.name + "\"");
        }
        if (std::isnan(c.acc_plus) || c.acc_plus < 0.0 || c.acc_plus > 1.0) {
            throw std::invalid_argument(
                "mme_score: acc_plus out of [0, 1] in category \"" + c.name + "\"");
        }
        total += 100.0 * (c.acc + c.acc_plus);
    }
    return total;
}

double mmhal_average(const std::vector<double>& scores) {
    if (scores.empty()) {
        throw std::invalid_argument("mmhal_average: no scores");
    }
    double sum = 0.0;
    for (double s : scores) {
        if (std::isnan(s) || s < 0.0 || s > 6.0) {
            throw std::invalid_argument("mmhal_average: score out of [0, 6]");
        }
        sum += s;
    }
    return sum / static_cast<double>(scores.size());
}

} // namespace chasd
