#pragma once

#include <array>
#include <string>
#include <vector>

#include "sqlgrader/errors.hpp"

namespace sqlgrader {

struct RocCurve {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr), (0,0) .. (1,1)
    double auc = 0.0;
};

// Threshold sweep over unique scores descending; AUC by trapezoid, which
// equals the pairwise-concordance statistic with ties counted 0.5.
RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct ConfusionMatrix {
    std::size_t n_classes = 0;
    std::vector<std::size_t> counts;  // counts[actual * n_classes + predicted]

    std::size_t at(std::size_t actual, std::size_t predicted) const {
        return counts[actual * n_classes + predicted];
    }
    std::size_t total() const;
};

ConfusionMatrix confusion(const std::vector<std::size_t>& preds,
                          const std::vector<std::size_t>& actuals, std::size_t n_classes);

// Mean of per-class recalls; every actual class must be populated.
double balanced_accuracy(const ConfusionMatrix& cm);

struct PrCurve {
    std::vector<std::pair<double, double>> points;  // (recall, precision)
    double average_precision = 0.0;
};

// Step-interpolated AP: sum over thresholds of (R_n - R_{n-1}) * P_n.
PrCurve precision_recall(const std::vector<double>& scores, const std::vector<int>& labels);

struct ResidualSummary {
    std::vector<double> residuals;  // y - yhat
    std::vector<double> bin_edges;  // bins + 1 edges
    std::vector<std::size_t> bin_counts;
    double mean = 0.0;
    double skewness = 0.0;
};

struct RegressionReport {
    double mae = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;
    bool r2_defined = true;  // false when var(y) == 0
    ResidualSummary residuals;
};

RegressionReport regression_report(const std::vector<double>& y,
                                   const std::vector<double>& yhat, std::size_t bins = 20);

struct Mistake {
    std::string submission_id;
    double p_correct = 0.0;
    int actual = 0;      // true correctness label
    int predicted = 0;   // thresholded at 0.5
};

// Misclassified examples ordered by |p - 0.5| ascending (head = highest
// uncertainty, tail = highest confidence); ties by submission id.
std::vector<Mistake> rank_mistakes(const std::vector<std::string>& ids,
                                   const std::vector<double>& p_correct,
                                   const std::vector<int>& labels);

}  // namespace sqlgrader
