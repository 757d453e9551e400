#include "sqlgrader/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sqlgrader {

namespace {

class UndefinedMetric : public ParameterError {
public:
    using ParameterError::ParameterError;
};

void require_binary_both(const std::vector<double>& scores, const std::vector<int>& labels,
                         const char* what, bool need_negatives) {
    if (scores.size() != labels.size())
        throw ShapeError(std::string(what) + ": score/label length mismatch");
    if (scores.empty()) throw ParameterError(std::string(what) + ": empty input");
    std::size_t pos = 0;
    for (int l : labels) pos += (l != 0);
    if (pos == 0)
        throw ParameterError(std::string(what) + ": undefined, no positive labels");
    if (need_negatives && pos == labels.size())
        throw ParameterError(std::string(what) + ": undefined, no negative labels");
}

// Indices sorted by score descending, stable.
std::vector<std::size_t> descending_order(const std::vector<double>& scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

}  // namespace

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    require_binary_both(scores, labels, "roc_auc", true);
    const auto order = descending_order(scores);
    std::size_t total_pos = 0;
    for (int l : labels) total_pos += (l != 0);
    const std::size_t total_neg = labels.size() - total_pos;

    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        // Consume the whole tie group before emitting a point.
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            if (labels[order[i]] != 0) ++tp; else ++fp;
            ++i;
        }
        curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(total_neg),
                                  static_cast<double>(tp) / static_cast<double>(total_pos));
    }
    double auc = 0.0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const auto& [x0, y0] = curve.points[k - 1];
        const auto& [x1, y1] = curve.points[k];
        auc += (x1 - x0) * (y0 + y1) * 0.5;
    }
    curve.auc = auc;
    return curve;
}

std::size_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

ConfusionMatrix confusion(const std::vector<std::size_t>& preds,
                          const std::vector<std::size_t>& actuals, std::size_t n_classes) {
    if (preds.size() != actuals.size())
        throw ShapeError("confusion: prediction/actual length mismatch");
    ConfusionMatrix cm;
    cm.n_classes = n_classes;
    cm.counts.assign(n_classes * n_classes, 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] >= n_classes || actuals[i] >= n_classes)
            throw ParameterError("confusion: label outside class set at index " +
                                 std::to_string(i));
        ++cm.counts[actuals[i] * n_classes + preds[i]];
    }
    return cm;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
    double sum = 0.0;
    for (std::size_t a = 0; a < cm.n_classes; ++a) {
        std::size_t row = 0;
        for (std::size_t p = 0; p < cm.n_classes; ++p) row += cm.at(a, p);
        if (row == 0)
            throw ParameterError("balanced_accuracy: actual class " + std::to_string(a) +
                                 " has no examples");
        sum += static_cast<double>(cm.at(a, a)) / static_cast<double>(row);
    }
    return sum / static_cast<double>(cm.n_classes);
}

PrCurve precision_recall(const std::vector<double>& scores, const std::vector<int>& labels) {
    require_binary_both(scores, labels, "precision_recall", false);
    const auto order = descending_order(scores);
    std::size_t total_pos = 0;
    for (int l : labels) total_pos += (l != 0);

    PrCurve curve;
    std::size_t tp = 0, predicted_pos = 0;
    double prev_recall = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            if (labels[order[i]] != 0) ++tp;
            ++predicted_pos;
            ++i;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
        const double precision =
            static_cast<double>(tp) / static_cast<double>(predicted_pos);
        curve.points.emplace_back(recall, precision);
        curve.average_precision += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return curve;
}

RegressionReport regression_report(const std::vector<double>& y,
                                   const std::vector<double>& yhat, std::size_t bins) {
    if (y.size() != yhat.size()) throw ShapeError("regression_report: length mismatch");
    if (y.empty()) throw ParameterError("regression_report: empty input");
    if (bins == 0) throw ParameterError("regression_report: bins must be positive");
    const double n = static_cast<double>(y.size());

    RegressionReport rep;
    double sse = 0.0;
    rep.residuals.residuals.reserve(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - yhat[i];
        rep.residuals.residuals.push_back(r);
        rep.mae += std::abs(r) / n;
        sse += r * r;
    }
    rep.rmse = std::sqrt(sse / n);

    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sst = 0.0;
    for (double v : y) sst += (v - y_mean) * (v - y_mean);
    if (sst == 0.0) {
        rep.r2_defined = false;
        rep.r2 = 0.0;
    } else {
        rep.r2 = 1.0 - sse / sst;
    }

    // Residual summary: mean, skewness, equal-width histogram.
    auto& rs = rep.residuals;
    rs.mean = std::accumulate(rs.residuals.begin(), rs.residuals.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0;
    for (double r : rs.residuals) {
        const double c = r - rs.mean;
        m2 += c * c / n;
        m3 += c * c * c / n;
    }
    rs.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;

    const auto [lo_it, hi_it] = std::minmax_element(rs.residuals.begin(), rs.residuals.end());
    double lo = *lo_it, hi = *hi_it;
    if (lo == hi) hi = lo + 1.0;  // degenerate range: single occupied bin
    rs.bin_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b)
        rs.bin_edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    rs.bin_counts.assign(bins, 0);
    for (double r : rs.residuals) {
        auto b = static_cast<std::size_t>((r - lo) / (hi - lo) * static_cast<double>(bins));
        if (b >= bins) b = bins - 1;
        ++rs.bin_counts[b];
    }
    return rep;
}

std::vector<Mistake> rank_mistakes(const std::vector<std::string>& ids,
                                   const std::vector<double>& p_correct,
                                   const std::vector<int>& labels) {
    if (ids.size() != p_correct.size() || ids.size() != labels.size())
        throw ShapeError("rank_mistakes: input length mismatch");
    std::vector<Mistake> mistakes;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const int predicted = p_correct[i] >= 0.5 ? 1 : 0;
        if (predicted == (labels[i] != 0 ? 1 : 0)) continue;
        mistakes.push_back({ids[i], p_correct[i], labels[i] != 0 ? 1 : 0, predicted});
    }
    std::sort(mistakes.begin(), mistakes.end(), [](const Mistake& a, const Mistake& b) {
        const double da = std::abs(a.p_correct - 0.5), db = std::abs(b.p_correct - 0.5);
        if (da != db) return da < db;
        return a.submission_id < b.submission_id;
    });
    return mistakes;
}

}  // namespace sqlgrader
