#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sqlgrader/dataset.hpp"
#include "sqlgrader/metrics.hpp"
#include "sqlgrader/model.hpp"

namespace sqlgrader {

// One row of the predictions CSV:
// submission_id,p_correct,p_remark_correct,p_remark_partial,p_remark_uninterp,
// p_remark_cheating,grade_hat,grade_hat_percent,bottleneck_x,bottleneck_y,
// remark_argmax[,fold]
struct PredRow {
    std::string submission_id;
    Prediction prediction;
    std::optional<std::size_t> fold;
};

PredRow make_pred_row(std::string submission_id, const Prediction& p,
                      std::optional<std::size_t> fold = std::nullopt);

std::size_t remark_argmax(const Prediction& p);

std::string preds_to_csv(const std::vector<PredRow>& rows);
std::vector<PredRow> preds_from_csv(const std::string& text);
std::vector<PredRow> load_preds_csv(const std::string& path);
void write_preds_csv(const std::vector<PredRow>& rows, const std::string& path);

// Full metrics document over out-of-fold (or plain) predictions joined with
// their labels by submission_id. Rows are re-ordered to the label order, so
// the output is independent of the row order in `rows`. A per-fold section is
// included when every row carries a fold id. Throws DataError listing ids
// present on only one side.
std::string metrics_json(const std::vector<PredRow>& rows,
                         const std::vector<SubmissionRecord>& labels);

// One CSV per curve (roc.csv, pr_<class>.csv) under dir, for external
// plotting.
void write_curve_csvs(const std::vector<PredRow>& rows,
                      const std::vector<SubmissionRecord>& labels, const std::string& dir);

// Shortest round-trip decimal formatting for doubles.
std::string fmt_double(double v);

}  // namespace sqlgrader
