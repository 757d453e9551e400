#include "sqlgrader/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

namespace sqlgrader {

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::size_t remark_argmax(const Prediction& p) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < p.remark_probs.size(); ++j)
        if (p.remark_probs[j] > p.remark_probs[best]) best = j;
    return best;
}

PredRow make_pred_row(std::string submission_id, const Prediction& p,
                      std::optional<std::size_t> fold) {
    return PredRow{std::move(submission_id), p, fold};
}

namespace {

const char* kPredHeader =
    "submission_id,p_correct,p_remark_correct,p_remark_partial,p_remark_uninterp,"
    "p_remark_cheating,grade_hat,grade_hat_percent,bottleneck_x,bottleneck_y,remark_argmax";

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
    out += "\"";
    return out;
}

}  // namespace

std::string preds_to_csv(const std::vector<PredRow>& rows) {
    const bool with_fold = !rows.empty() && rows.front().fold.has_value();
    std::string out = kPredHeader;
    if (with_fold) out += ",fold";
    out += "\n";
    for (const auto& row : rows) {
        const Prediction& p = row.prediction;
        out += csv_escape(row.submission_id);
        for (double v : {p.p_correct, p.remark_probs[0], p.remark_probs[1], p.remark_probs[2],
                         p.remark_probs[3], p.grade_hat, p.grade_hat * 100.0,
                         p.bottleneck_xy[0], p.bottleneck_xy[1]})
            out += "," + fmt_double(v);
        out += std::string(",") + remark_name(static_cast<Remark>(remark_argmax(p)));
        if (with_fold) {
            if (!row.fold)
                throw DataError("predictions mix rows with and without fold ids");
            out += "," + std::to_string(*row.fold);
        }
        out += "\n";
    }
    return out;
}

namespace {

// Minimal line splitter for the predictions CSV; the only quotable field is
// submission_id and it never contains newlines.
std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw DataError("bad numeric field \"" + s + "\" in " + where);
    }
}

}  // namespace

std::vector<PredRow> preds_from_csv(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(std::move(line));
            line.clear();
        } else {
            line += c;
        }
    }
    if (!line.empty()) lines.push_back(std::move(line));
    if (lines.empty()) throw DataError("predictions CSV is empty");

    const auto header = split_fields(lines[0]);
    bool with_fold = false;
    if (header.size() == 12 && header.back() == "fold") {
        with_fold = true;
    } else if (header.size() != 11) {
        throw DataError("predictions CSV header has " + std::to_string(header.size()) +
                        " fields, expected 11 or 12");
    }

    std::vector<PredRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = split_fields(lines[i]);
        const std::string where = "predictions line " + std::to_string(i + 1);
        if (f.size() != header.size())
            throw DataError(where + ": expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(f.size()));
        PredRow row;
        row.submission_id = f[0];
        row.prediction.p_correct = parse_double(f[1], where);
        for (std::size_t j = 0; j < 4; ++j)
            row.prediction.remark_probs[j] = parse_double(f[2 + j], where);
        row.prediction.grade_hat = parse_double(f[6], where);
        row.prediction.bottleneck_xy[0] = parse_double(f[8], where);
        row.prediction.bottleneck_xy[1] = parse_double(f[9], where);
        if (with_fold) row.fold = static_cast<std::size_t>(parse_double(f[11], where));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<PredRow> load_preds_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read predictions: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return preds_from_csv(text);
}

void write_preds_csv(const std::vector<PredRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write predictions: " + path);
    out << preds_to_csv(rows);
    if (!out) throw IoError("short write on predictions: " + path);
}

// ------------------------------------------------------------------- metrics

namespace {

struct Joined {
    std::vector<PredRow> rows;                  // label order
    std::vector<const SubmissionRecord*> recs;  // aligned
};

Joined join_by_id(const std::vector<PredRow>& rows,
                  const std::vector<SubmissionRecord>& labels) {
    std::map<std::string, const PredRow*> by_id;
    for (const auto& row : rows) by_id[row.submission_id] = &row;

    Joined joined;
    std::vector<std::string> missing;
    std::set<std::string> used;
    for (const auto& rec : labels) {
        auto it = by_id.find(rec.submission_id);
        if (it == by_id.end()) {
            missing.push_back("no prediction for " + rec.submission_id);
            continue;
        }
        used.insert(rec.submission_id);
        joined.rows.push_back(*it->second);
        joined.recs.push_back(&rec);
    }
    for (const auto& row : rows)
        if (!used.count(row.submission_id))
            missing.push_back("no label for " + row.submission_id);
    if (!missing.empty()) {
        std::string msg = "prediction/label id mismatch:";
        for (const auto& m : missing) msg += "\n  " + m;
        throw DataError(msg);
    }
    return joined;
}

nlohmann::json roc_to_json(const RocCurve& curve) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& [fpr, tpr] : curve.points) points.push_back({fpr, tpr});
    return {{"points", points}, {"auc", curve.auc}};
}

nlohmann::json pr_to_json(const PrCurve& curve) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& [recall, precision] : curve.points)
        points.push_back({recall, precision});
    return {{"points", points}, {"average_precision", curve.average_precision}};
}

nlohmann::json mistake_to_json(const Mistake& m) {
    return {{"submission_id", m.submission_id},
            {"p_correct", m.p_correct},
            {"actual", m.actual},
            {"predicted", m.predicted}};
}

}  // namespace

std::string metrics_json(const std::vector<PredRow>& rows,
                         const std::vector<SubmissionRecord>& labels) {
    Joined joined = join_by_id(rows, labels);
    const std::size_t n = joined.rows.size();

    std::vector<std::string> ids(n);
    std::vector<double> p_correct(n), grade(n), grade_hat(n);
    std::vector<int> y_correct(n);
    std::vector<std::size_t> remark_pred(n), remark_actual(n), correct_pred(n),
        correct_actual(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PredRow& row = joined.rows[i];
        const SubmissionRecord& rec = *joined.recs[i];
        ids[i] = row.submission_id;
        p_correct[i] = row.prediction.p_correct;
        y_correct[i] = rec.is_correct ? 1 : 0;
        grade[i] = rec.grade_percent / 100.0;
        grade_hat[i] = row.prediction.grade_hat;
        remark_pred[i] = remark_argmax(row.prediction);
        remark_actual[i] = static_cast<std::size_t>(rec.remark);
        correct_pred[i] = row.prediction.p_correct >= 0.5 ? 1 : 0;
        correct_actual[i] = rec.is_correct ? 1 : 0;
    }

    nlohmann::json doc;

    // Correctness: ROC/AUC, confusion, balanced accuracy.
    try {
        doc["roc"] = roc_to_json(roc_auc(p_correct, y_correct));
    } catch (const ParameterError&) {
        doc["roc"] = nullptr;  // single-class labels
    }
    ConfusionMatrix cm_c = confusion(correct_pred, correct_actual, 2);
    doc["confusion_correct"] = {
        {"labels", {"incorrect", "correct"}},
        {"counts", {{cm_c.at(0, 0), cm_c.at(0, 1)}, {cm_c.at(1, 0), cm_c.at(1, 1)}}}};
    try {
        doc["balanced_accuracy"] = balanced_accuracy(cm_c);
    } catch (const ParameterError&) {
        doc["balanced_accuracy"] = nullptr;
    }

    // Remarks: 4x4 confusion and one-vs-rest PR per class.
    ConfusionMatrix cm_r = confusion(remark_pred, remark_actual, 4);
    {
        nlohmann::json counts = nlohmann::json::array();
        nlohmann::json names = nlohmann::json::array();
        for (std::size_t a = 0; a < 4; ++a) {
            names.push_back(remark_name(static_cast<Remark>(a)));
            nlohmann::json row_counts = nlohmann::json::array();
            for (std::size_t p = 0; p < 4; ++p) row_counts.push_back(cm_r.at(a, p));
            counts.push_back(row_counts);
        }
        doc["confusion_remark"] = {{"labels", names}, {"counts", counts}};
        try {
            doc["balanced_accuracy_remark"] = balanced_accuracy(cm_r);
        } catch (const ParameterError&) {
            doc["balanced_accuracy_remark"] = nullptr;
        }
    }
    {
        nlohmann::json pr = nlohmann::json::object();
        for (std::size_t cls = 0; cls < 4; ++cls) {
            std::vector<double> scores(n);
            std::vector<int> one_vs_rest(n);
            for (std::size_t i = 0; i < n; ++i) {
                scores[i] = joined.rows[i].prediction.remark_probs[cls];
                one_vs_rest[i] = remark_actual[i] == cls ? 1 : 0;
            }
            const char* name = remark_name(static_cast<Remark>(cls));
            try {
                pr[name] = pr_to_json(precision_recall(scores, one_vs_rest));
            } catch (const ParameterError&) {
                pr[name] = nullptr;  // class absent
            }
        }
        doc["pr"] = pr;
    }

    // Grade regression.
    {
        RegressionReport rep = regression_report(grade, grade_hat);
        doc["regression"] = {{"mae", rep.mae},
                             {"rmse", rep.rmse},
                             {"r2", rep.r2_defined ? nlohmann::json(rep.r2) : nullptr},
                             {"residual_mean", rep.residuals.mean},
                             {"residual_skewness", rep.residuals.skewness}};
        doc["residual_histogram"] = {{"bin_edges", rep.residuals.bin_edges},
                                     {"counts", rep.residuals.bin_counts}};
    }

    // Uncertainty-ranked mistakes, top 10 at both ends.
    {
        auto mistakes = rank_mistakes(ids, p_correct, y_correct);
        nlohmann::json best = nlohmann::json::array(), worst = nlohmann::json::array();
        const std::size_t k = std::min<std::size_t>(10, mistakes.size());
        for (std::size_t i = 0; i < k; ++i) best.push_back(mistake_to_json(mistakes[i]));
        for (std::size_t i = 0; i < k; ++i)
            worst.push_back(mistake_to_json(mistakes[mistakes.size() - 1 - i]));
        doc["mistakes"] = {{"count", mistakes.size()}, {"best", best}, {"worst", worst}};
    }

    // Per-fold ROC/AUC when fold ids are present on every row.
    bool all_folds = !joined.rows.empty();
    for (const auto& row : joined.rows) all_folds = all_folds && row.fold.has_value();
    if (all_folds) {
        std::map<std::size_t, std::vector<std::size_t>> by_fold;
        for (std::size_t i = 0; i < n; ++i) by_fold[*joined.rows[i].fold].push_back(i);
        nlohmann::json folds = nlohmann::json::array();
        std::vector<double> fold_aucs;
        for (const auto& [fold_id, members] : by_fold) {
            std::vector<double> scores;
            std::vector<int> lbls;
            for (std::size_t i : members) {
                scores.push_back(p_correct[i]);
                lbls.push_back(y_correct[i]);
            }
            nlohmann::json entry = {{"fold", fold_id}, {"size", members.size()}};
            try {
                RocCurve curve = roc_auc(scores, lbls);
                entry["roc"] = roc_to_json(curve);
                fold_aucs.push_back(curve.auc);
            } catch (const ParameterError&) {
                entry["roc"] = nullptr;  // singleton or single-class fold
            }
            folds.push_back(entry);
        }
        doc["folds"] = folds;
        if (!fold_aucs.empty()) {
            double mean = 0.0;
            for (double a : fold_aucs) mean += a;
            mean /= static_cast<double>(fold_aucs.size());
            double var = 0.0;
            for (double a : fold_aucs) var += (a - mean) * (a - mean);
            var /= static_cast<double>(fold_aucs.size());
            doc["auc_mean"] = mean;
            doc["auc_min"] = *std::min_element(fold_aucs.begin(), fold_aucs.end());
            doc["auc_max"] = *std::max_element(fold_aucs.begin(), fold_aucs.end());
            // Reported as both; "variance" is ambiguous in common usage.
            doc["auc_var"] = var;
            doc["auc_std"] = std::sqrt(var);
        }
    }

    return doc.dump(2) + "\n";
}

void write_curve_csvs(const std::vector<PredRow>& rows,
                      const std::vector<SubmissionRecord>& labels, const std::string& dir) {
    Joined joined = join_by_id(rows, labels);
    const std::size_t n = joined.rows.size();
    std::filesystem::create_directories(dir);

    auto write_points = [&](const std::string& name, const char* header,
                            const std::vector<std::pair<double, double>>& points) {
        const std::string path = dir + "/" + name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write curve CSV: " + path);
        out << header << "\n";
        for (const auto& [a, b] : points) out << fmt_double(a) << "," << fmt_double(b) << "\n";
    };

    std::vector<double> p_correct(n);
    std::vector<int> y_correct(n);
    for (std::size_t i = 0; i < n; ++i) {
        p_correct[i] = joined.rows[i].prediction.p_correct;
        y_correct[i] = joined.recs[i]->is_correct ? 1 : 0;
    }
    try {
        write_points("roc.csv", "fpr,tpr", roc_auc(p_correct, y_correct).points);
    } catch (const ParameterError&) {
    }
    const char* kSlug[4] = {"correct", "partial", "uninterp", "cheating"};
    for (std::size_t cls = 0; cls < 4; ++cls) {
        std::vector<double> scores(n);
        std::vector<int> lbls(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = joined.rows[i].prediction.remark_probs[cls];
            lbls[i] = static_cast<std::size_t>(joined.recs[i]->remark) == cls ? 1 : 0;
        }
        try {
            write_points("pr_" + std::string(kSlug[cls]) + ".csv", "recall,precision",
                         precision_recall(scores, lbls).points);
        } catch (const ParameterError&) {
        }
    }
}

}  // namespace sqlgrader
