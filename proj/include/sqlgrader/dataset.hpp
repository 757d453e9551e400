#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sqlgrader/lexer.hpp"

namespace sqlgrader {

enum class Remark { Correct = 0, PartiallyCorrect = 1, Uninterpretable = 2, Cheating = 3 };

const char* remark_name(Remark r);

// Case-insensitive, internal whitespace collapsed ("Partially Correct" ok).
Remark parse_remark(const std::string& text);

struct SubmissionRecord {
    std::string submission_id;
    std::string query_id;
    std::string submitted_answer;
    bool is_correct = false;
    Remark remark = Remark::Correct;
    double grade_percent = 0.0;
};

// Gradebook inconsistencies are warnings, not failures.
std::vector<std::string> validate_records(const std::vector<SubmissionRecord>& records);

// RFC-4180 CSV with header submission_id,query_id,submitted_answer,is_correct,
// remark,grade. Any bad row fails the load; all row errors are reported with
// line numbers in one DataError.
std::vector<SubmissionRecord> load_csv(const std::string& path);
std::vector<SubmissionRecord> parse_csv(const std::string& text);

void write_csv(const std::vector<SubmissionRecord>& records, const std::string& path);
std::string records_to_csv(const std::vector<SubmissionRecord>& records);

struct LabeledExample {
    std::string submission_id;
    EncodedStatement x;
    double y_correct = 0.0;
    std::array<double, 4> y_remark{};  // one-hot [Correct, Partial, Uninterp, Cheating]
    double y_grade = 0.0;              // grade_percent / 100
};

LabeledExample to_example(const SubmissionRecord& rec, const Vocabulary& vocab,
                          const LexOptions& opts = {});

// ------------------------------------------------------------ fold planning

struct FoldPlan {
    struct Fold {
        std::vector<std::size_t> train_indices;
        std::vector<std::size_t> val_indices;
    };
    std::vector<Fold> folds;
    std::string scheme;  // "kfold" or "loo"
    std::uint64_t seed = 0;
};

// Shuffle by seed, deal round-robin into k validation sets.
FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

// Fold i validates exactly index i.
FoldPlan loo_split(std::size_t n);

// ------------------------------------------------------------ class weights

struct ClassWeights {
    std::array<double, 2> correct;  // [negative, positive]
    std::array<double, 4> remark;
    std::vector<std::string> warnings;
};

// weight = n_total / (n_classes * n_class); zero-count classes get weight 0.
ClassWeights class_weights(const std::vector<LabeledExample>& examples);

// -------------------------------------------------------- synthetic corpus

// Rule-labeled template corpus, rule set v1:
//  - Correct: well-formed SELECT with all required join predicates; grade 100.
//  - PartiallyCorrect: one required join predicate dropped; grade in [40, 80].
//  - Uninterpretable: keyword order garbled; grade 0.
//  - Cheating: the statement duplicated verbatim after a ';'; grade 0.
// Class draw per record: 40% / 35% / 20% / 5%.
std::vector<SubmissionRecord> generate_synthetic(std::size_t n, std::uint64_t seed);

}  // namespace sqlgrader
