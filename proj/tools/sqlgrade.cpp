// sqlgrade: command-line front end over the sqlgrader C API.
//
// Subcommands: gen, train, xval, predict, metrics. Exit codes: 0 success,
// 1 usage error, 2 data error, 3 training failure, 4 I/O error.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sqlgrader.h"

namespace {

int fail(sqlg_status status) {
    std::cerr << "sqlgrade: " << sqlg_last_error() << "\n";
    return static_cast<int>(status);
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SQLGRADE_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            // fall through to 0; a bad env var should not kill every command
            std::cerr << "sqlgrade: ignoring unparseable SQLGRADE_SEED\n";
        }
    }
    return 0;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

void print_prediction_row(std::ostream& out, const std::string& id,
                          const sqlg_prediction& p) {
    out.precision(17);
    out << csv_escape(id) << "," << p.p_correct;
    for (double v : p.remark_probs) out << "," << v;
    out << "," << p.grade_hat << "," << p.grade_hat * 100.0 << "," << p.bottleneck_x << ","
        << p.bottleneck_y << "," << sqlg_remark_name(p.remark_argmax) << "\n";
}

constexpr const char* kPredHeader =
    "submission_id,p_correct,p_remark_correct,p_remark_partial,p_remark_uninterp,"
    "p_remark_cheating,grade_hat,grade_hat_percent,bottleneck_x,bottleneck_y,remark_argmax";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attention-based convolutional multi-task grader for SQL statements"};
    app.require_subcommand(1);
    const std::uint64_t env_seed = default_seed();

    // ---- gen
    auto* gen = app.add_subcommand("gen", "Generate a rule-labeled synthetic corpus");
    std::size_t gen_n = 0;
    std::uint64_t gen_seed = env_seed;
    std::string gen_out;
    gen->add_option("--n", gen_n, "Number of records (>= 8)")->required();
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out", gen_out, "Output CSV path")->required();

    // ---- train
    auto* train = app.add_subcommand("train", "Train a grader on a dataset CSV");
    std::string train_data, train_mode = "joint", train_out, train_history;
    std::size_t train_epochs = 0, train_batch = 32;
    std::uint64_t train_seed = env_seed;
    bool train_weighted = false;
    train->add_option("--data", train_data, "Dataset CSV")->required();
    train->add_option("--mode", train_mode, "joint or iterative");
    train->add_option("--epochs", train_epochs, "Epoch count (>= 1)")->required();
    train->add_option("--batch-size", train_batch, "Minibatch size (>= 2)");
    train->add_option("--seed", train_seed, "RNG seed");
    train->add_flag("--class-weighting", train_weighted, "Weight losses by class frequency");
    train->add_option("--out", train_out, "Checkpoint output (.grader.json)")->required();
    train->add_option("--history", train_history, "Training history output (JSON lines)");

    // ---- xval
    auto* xval = app.add_subcommand("xval", "Cross-validated evaluation");
    std::string xval_data, xval_scheme = "kfold", xval_mode = "joint";
    std::string xval_metrics, xval_preds, xval_curves;
    std::size_t xval_k = 10, xval_epochs = 0, xval_batch = 32, xval_jobs = 1;
    std::uint64_t xval_seed = env_seed;
    bool xval_weighted = false;
    xval->add_option("--data", xval_data, "Dataset CSV")->required();
    xval->add_option("--scheme", xval_scheme, "kfold or loo");
    xval->add_option("--k", xval_k, "Fold count for kfold");
    xval->add_option("--mode", xval_mode, "joint or iterative");
    xval->add_option("--epochs", xval_epochs, "Epochs per fold (>= 1)")->required();
    xval->add_option("--batch-size", xval_batch, "Minibatch size (>= 2)");
    xval->add_option("--seed", xval_seed, "RNG seed");
    xval->add_flag("--class-weighting", xval_weighted, "Weight losses by class frequency");
    xval->add_option("--jobs", xval_jobs, "Parallel folds (results independent of this)");
    xval->add_option("--out", xval_metrics, "Metrics JSON output")->required();
    xval->add_option("--preds", xval_preds, "Out-of-fold predictions CSV output")->required();
    xval->add_option("--curves", xval_curves, "Directory for per-curve CSV exports");

    // ---- predict
    auto* predict = app.add_subcommand("predict", "Grade SQL statements with a checkpoint");
    std::string pr_model, pr_sql, pr_data, pr_out;
    bool pr_stdin = false;
    predict->add_option("--model", pr_model, "Checkpoint path")->required();
    predict->add_option("--sql", pr_sql, "One SQL statement");
    predict->add_flag("--stdin", pr_stdin, "Read one statement per line from stdin");
    predict->add_option("--data", pr_data, "Dataset CSV to grade");
    predict->add_option("--out", pr_out, "Output CSV (default: stdout)");

    // ---- metrics
    auto* metrics = app.add_subcommand("metrics", "Recompute metrics from predictions");
    std::string m_preds, m_labels, m_out, m_curves;
    metrics->add_option("--preds", m_preds, "Predictions CSV")->required();
    metrics->add_option("--labels", m_labels, "Labels dataset CSV")->required();
    metrics->add_option("--out", m_out, "Metrics JSON output")->required();
    metrics->add_option("--curves", m_curves, "Directory for per-curve CSV exports");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (gen->parsed()) {
        std::size_t counts[4] = {0, 0, 0, 0};
        const sqlg_status st = sqlg_generate(gen_n, gen_seed, gen_out.c_str(), counts);
        if (st != SQLG_OK) return fail(st);
        std::cout << "wrote " << gen_n << " records to " << gen_out << "\n";
        for (int i = 0; i < 4; ++i)
            std::cout << "  " << sqlg_remark_name(i) << ": " << counts[i] << "\n";
        return 0;
    }

    if (train->parsed()) {
        char summary[512] = {0};
        const sqlg_status st = sqlg_train(
            train_data.c_str(), train_mode.c_str(), train_epochs, train_batch, train_seed,
            train_weighted ? 1 : 0, train_out.c_str(),
            train_history.empty() ? nullptr : train_history.c_str(), summary, sizeof summary);
        if (st != SQLG_OK) return fail(st);
        std::cout << summary << "\n";
        std::cout << "wrote checkpoint " << train_out << "\n";
        return 0;
    }

    if (xval->parsed()) {
        const sqlg_status st = sqlg_xval(
            xval_data.c_str(), xval_scheme.c_str(), xval_k, xval_mode.c_str(), xval_epochs,
            xval_batch, xval_seed, xval_weighted ? 1 : 0, xval_jobs, xval_metrics.c_str(),
            xval_preds.c_str(), xval_curves.empty() ? nullptr : xval_curves.c_str());
        if (st != SQLG_OK) return fail(st);
        std::cout << "wrote " << xval_metrics << " and " << xval_preds << "\n";
        return 0;
    }

    if (predict->parsed()) {
        if (pr_sql.empty() && !pr_stdin && pr_data.empty()) {
            std::cerr << "sqlgrade: predict needs --sql, --stdin or --data\n";
            return 1;
        }
        sqlg_model* model = nullptr;
        sqlg_status st = sqlg_model_load(pr_model.c_str(), &model);
        if (st != SQLG_OK) return fail(st);
        std::unique_ptr<sqlg_model, decltype(&sqlg_model_free)> guard(model, sqlg_model_free);

        if (!pr_data.empty()) {
            if (pr_out.empty()) {
                std::cerr << "sqlgrade: --data requires --out\n";
                return 1;
            }
            st = sqlg_model_predict_csv(model, pr_data.c_str(), pr_out.c_str());
            if (st != SQLG_OK) return fail(st);
            std::cout << "wrote " << pr_out << "\n";
            return 0;
        }

        std::ofstream file_out;
        if (!pr_out.empty()) {
            file_out.open(pr_out, std::ios::binary);
            if (!file_out) {
                std::cerr << "sqlgrade: cannot write " << pr_out << "\n";
                return 4;
            }
        }
        std::ostream& out = pr_out.empty() ? std::cout : file_out;
        out << kPredHeader << "\n";

        auto grade_one = [&](const std::string& id, const std::string& sql) -> int {
            sqlg_prediction p{};
            const sqlg_status s = sqlg_model_predict(model, sql.c_str(), &p);
            if (s != SQLG_OK) {
                std::cerr << "sqlgrade: " << sqlg_last_error() << "\n  input: " << sql << "\n";
                return static_cast<int>(s);
            }
            print_prediction_row(out, id, p);
            return 0;
        };

        if (!pr_sql.empty()) {
            if (int rc = grade_one("sql-0001", pr_sql)) return rc;
        }
        if (pr_stdin) {
            std::string line;
            std::size_t count = 0;
            while (std::getline(std::cin, line)) {
                if (line.empty()) continue;
                char id[32];
                std::snprintf(id, sizeof id, "stdin-%04zu", ++count);
                if (int rc = grade_one(id, line)) return rc;
            }
        }
        return 0;
    }

    if (metrics->parsed()) {
        const sqlg_status st =
            sqlg_metrics(m_preds.c_str(), m_labels.c_str(), m_out.c_str(),
                         m_curves.empty() ? nullptr : m_curves.c_str());
        if (st != SQLG_OK) return fail(st);
        std::cout << "wrote " << m_out << "\n";
        return 0;
    }

    return 1;
}
