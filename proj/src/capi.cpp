#include "sqlgrader.h"

#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "sqlgrader/dataset.hpp"
#include "sqlgrader/model.hpp"
#include "sqlgrader/report.hpp"
#include "sqlgrader/training.hpp"

namespace {

thread_local std::string g_last_error;

using namespace sqlgrader;

sqlg_status to_status(const std::exception& e) {
    g_last_error = e.what();
    if (dynamic_cast<const ParameterError*>(&e)) return SQLG_ERR_USAGE;
    if (dynamic_cast<const ShapeError*>(&e)) return SQLG_ERR_USAGE;
    if (dynamic_cast<const DataError*>(&e)) return SQLG_ERR_DATA;
    if (dynamic_cast<const TrainError*>(&e)) return SQLG_ERR_TRAIN;
    return SQLG_ERR_IO;
}

template <typename Fn>
sqlg_status guarded(Fn&& fn) {
    try {
        fn();
        return SQLG_OK;
    } catch (const std::exception& e) {
        return to_status(e);
    } catch (...) {
        g_last_error = "unknown error";
        return SQLG_ERR_IO;
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << text;
    if (!out) throw IoError("short write: " + path);
}

TrainConfig make_train_config(const char* mode, size_t epochs, size_t batch_size,
                              uint64_t seed, int class_weighting) {
    if (!mode) throw ParameterError("mode is required");
    TrainConfig cfg;
    const std::string m = mode;
    if (m == "joint")
        cfg.mode = TrainMode::Joint;
    else if (m == "iterative")
        cfg.mode = TrainMode::Iterative;
    else
        throw ParameterError("mode must be \"joint\" or \"iterative\", got \"" + m + "\"");
    if (epochs == 0) throw ParameterError("epochs must be >= 1");
    if (batch_size < 2) throw ParameterError("batch size must be >= 2 (batch normalization)");
    cfg.epochs = epochs;
    cfg.batch_size = batch_size;
    cfg.seed = seed;
    cfg.class_weighting = class_weighting != 0;
    return cfg;
}

}  // namespace

extern "C" {

const char* sqlg_last_error(void) { return g_last_error.c_str(); }

sqlg_status sqlg_generate(size_t n, uint64_t seed, const char* out_csv,
                          size_t class_counts[4]) {
    return guarded([&] {
        if (!out_csv) throw ParameterError("output path is required");
        auto records = generate_synthetic(n, seed);
        write_csv(records, out_csv);
        if (class_counts) {
            for (int i = 0; i < 4; ++i) class_counts[i] = 0;
            for (const auto& rec : records)
                ++class_counts[static_cast<std::size_t>(rec.remark)];
        }
    });
}

sqlg_status sqlg_train(const char* data_csv, const char* mode, size_t epochs,
                       size_t batch_size, uint64_t seed, int class_weighting,
                       const char* model_out, const char* history_out, char* summary,
                       size_t summary_len) {
    return guarded([&] {
        if (!data_csv || !model_out)
            throw ParameterError("data and model output paths are required");
        TrainConfig cfg = make_train_config(mode, epochs, batch_size, seed, class_weighting);

        auto records = load_csv(data_csv);
        if (records.empty()) throw DataError("dataset has no rows: " + std::string(data_csv));

        std::vector<std::vector<std::string>> corpus;
        corpus.reserve(records.size());
        for (const auto& rec : records) corpus.push_back(lex(rec.submitted_answer));
        Vocabulary vocab = build_vocab(corpus);

        std::vector<LabeledExample> examples;
        examples.reserve(records.size());
        for (const auto& rec : records) examples.push_back(to_example(rec, vocab));

        ModelConfig mc;
        mc.vocab_size = vocab.size();
        mc.seed = seed;
        SeededRng rng(seed);
        GraderNet net = build(mc, rng);

        TrainHistory history = train(net, examples, cfg);
        save_checkpoint(net, vocab, model_out);
        if (history_out) write_text(history_out, history_to_jsonl(history));

        if (summary && summary_len > 0) {
            std::ostringstream line;
            // Last recorded loss per objective.
            std::map<std::string, double> final_losses;
            for (const auto& rec : history.epochs) final_losses[rec.objective] = rec.loss;
            line << "final loss:";
            for (const auto& [objective, loss] : final_losses)
                line << " " << objective << "=" << fmt_double(loss);
            const std::string text = line.str();
            std::strncpy(summary, text.c_str(), summary_len - 1);
            summary[summary_len - 1] = '\0';
        }
    });
}

sqlg_status sqlg_xval(const char* data_csv, const char* scheme, size_t k, const char* mode,
                      size_t epochs, size_t batch_size, uint64_t seed, int class_weighting,
                      size_t jobs, const char* metrics_out, const char* preds_out,
                      const char* curves_dir) {
    return guarded([&] {
        if (!data_csv || !scheme || !metrics_out || !preds_out)
            throw ParameterError("data, scheme, metrics and predictions paths are required");
        TrainConfig cfg = make_train_config(mode, epochs, batch_size, seed, class_weighting);

        auto records = load_csv(data_csv);
        if (records.empty()) throw DataError("dataset has no rows: " + std::string(data_csv));

        FoldPlan plan;
        const std::string s = scheme;
        if (s == "kfold")
            plan = kfold_split(records.size(), k, seed);
        else if (s == "loo")
            plan = loo_split(records.size());
        else
            throw ParameterError("scheme must be \"kfold\" or \"loo\", got \"" + s + "\"");

        ModelConfig mc;  // vocab_size filled per fold
        mc.vocab_size = 2;
        CrossValResult result =
            cross_validate(records, plan, cfg, mc, jobs == 0 ? 1 : jobs);

        std::vector<PredRow> rows;
        rows.reserve(result.predictions.size());
        for (const auto& oof : result.predictions)
            rows.push_back(make_pred_row(oof.submission_id, oof.prediction, oof.fold));
        write_preds_csv(rows, preds_out);
        write_text(metrics_out, metrics_json(rows, records));
        if (curves_dir) write_curve_csvs(rows, records, curves_dir);
    });
}

struct sqlg_model {
    sqlgrader::Checkpoint checkpoint;
};

sqlg_status sqlg_model_load(const char* path, sqlg_model** out) {
    return guarded([&] {
        if (!path || !out) throw ParameterError("path and output handle are required");
        auto model = std::make_unique<sqlg_model>();
        model->checkpoint = load_checkpoint(path);
        *out = model.release();
    });
}

void sqlg_model_free(sqlg_model* model) { delete model; }

namespace {

sqlg_prediction to_c_prediction(const Prediction& p) {
    sqlg_prediction out{};
    out.p_correct = p.p_correct;
    for (int j = 0; j < 4; ++j) out.remark_probs[j] = p.remark_probs[j];
    out.grade_hat = p.grade_hat;
    out.bottleneck_x = p.bottleneck_xy[0];
    out.bottleneck_y = p.bottleneck_xy[1];
    out.remark_argmax = static_cast<int>(remark_argmax(p));
    return out;
}

}  // namespace

sqlg_status sqlg_model_predict(const sqlg_model* model, const char* sql,
                               sqlg_prediction* out) {
    return guarded([&] {
        if (!model || !sql || !out)
            throw ParameterError("model, sql and output struct are required");
        EncodedStatement enc = encode(lex(sql), model->checkpoint.vocab);
        *out = to_c_prediction(predict(model->checkpoint.net, enc));
    });
}

sqlg_status sqlg_model_predict_csv(const sqlg_model* model, const char* data_csv,
                                   const char* out_csv) {
    return guarded([&] {
        if (!model || !data_csv || !out_csv)
            throw ParameterError("model, data and output paths are required");
        auto records = load_csv(data_csv);
        std::vector<PredRow> rows;
        rows.reserve(records.size());
        for (const auto& rec : records) {
            EncodedStatement enc;
            try {
                enc = encode(lex(rec.submitted_answer), model->checkpoint.vocab);
            } catch (const DataError& e) {
                throw DataError("submission " + rec.submission_id + ": " + e.what());
            }
            rows.push_back(
                make_pred_row(rec.submission_id, predict(model->checkpoint.net, enc)));
        }
        write_preds_csv(rows, out_csv);
    });
}

sqlg_status sqlg_metrics(const char* preds_csv, const char* labels_csv, const char* out_json,
                         const char* curves_dir) {
    return guarded([&] {
        if (!preds_csv || !labels_csv || !out_json)
            throw ParameterError("predictions, labels and output paths are required");
        auto rows = load_preds_csv(preds_csv);
        auto labels = load_csv(labels_csv);
        write_text(out_json, metrics_json(rows, labels));
        if (curves_dir) write_curve_csvs(rows, labels, curves_dir);
    });
}

const char* sqlg_remark_name(int remark_class) {
    if (remark_class < 0 || remark_class > 3) return nullptr;
    return remark_name(static_cast<Remark>(remark_class));
}

}  // extern "C"
