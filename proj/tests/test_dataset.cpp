#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>

#include "sqlgrader/dataset.hpp"

using namespace sqlgrader;

// ------------------------------------------------------------------- remarks

TEST_CASE("remark parsing is forgiving about case and spacing") {
    CHECK(parse_remark("Correct") == Remark::Correct);
    CHECK(parse_remark("correct") == Remark::Correct);
    CHECK(parse_remark("  CORRECT ") == Remark::Correct);
    CHECK(parse_remark("Partially Correct") == Remark::PartiallyCorrect);
    CHECK(parse_remark("partially   correct") == Remark::PartiallyCorrect);
    CHECK(parse_remark("PartiallyCorrect") == Remark::PartiallyCorrect);
    CHECK(parse_remark("Uninterpretable") == Remark::Uninterpretable);
    CHECK(parse_remark("cheating") == Remark::Cheating);
    CHECK_THROWS_AS(parse_remark("mostly right"), DataError);
    CHECK_THROWS_AS(parse_remark(""), DataError);
}

TEST_CASE("remark names round trip through the parser") {
    for (Remark r : {Remark::Correct, Remark::PartiallyCorrect, Remark::Uninterpretable,
                     Remark::Cheating})
        CHECK(parse_remark(remark_name(r)) == r);
}

// ----------------------------------------------------------------------- csv

namespace {

const char* kHeader = "submission_id,query_id,submitted_answer,is_correct,remark,grade\n";

}

TEST_CASE("csv round trip preserves quoting, newlines and commas") {
    std::vector<SubmissionRecord> recs;
    recs.push_back({"s1", "q1", "SELECT a, b FROM t", true, Remark::Correct, 100.0});
    recs.push_back({"s2", "q1", "SELECT *\nFROM t -- \"quoted\"", false,
                    Remark::PartiallyCorrect, 66.66});
    recs.push_back({"s3", "q2", "garbage", false, Remark::Uninterpretable, 0.0});
    std::string text = records_to_csv(recs);
    std::vector<SubmissionRecord> back = parse_csv(text);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].submission_id == recs[i].submission_id);
        CHECK(back[i].query_id == recs[i].query_id);
        CHECK(back[i].submitted_answer == recs[i].submitted_answer);
        CHECK(back[i].is_correct == recs[i].is_correct);
        CHECK(back[i].remark == recs[i].remark);
        CHECK(back[i].grade_percent == doctest::Approx(recs[i].grade_percent));
    }
}

TEST_CASE("csv accepts quoted fields with embedded delimiters") {
    std::string text = std::string(kHeader) +
        "s1,q1,\"SELECT a,b FROM \"\"t\"\"\",true,Correct,100\n";
    auto recs = parse_csv(text);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].submitted_answer == "SELECT a,b FROM \"t\"");
}

TEST_CASE("csv errors carry line numbers and collect every bad row") {
    std::string text = std::string(kHeader) +
        "s1,q1,SELECT 1,true,Correct,100\n"
        "s2,q1,SELECT 2,maybe,Correct,100\n"      // bad boolean, line 3
        "s3,q1,SELECT 3,false,Dunno,50\n"          // bad remark, line 4
        "s4,q1,SELECT 4,false,Correct,190\n"       // grade out of range, line 5
        "s5,q1,SELECT 5,false,Correct,abc\n";      // non-numeric grade, line 6
    try {
        parse_csv(text);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("line 4") != std::string::npos);
        CHECK(msg.find("line 5") != std::string::npos);
        CHECK(msg.find("line 6") != std::string::npos);
    }
}

TEST_CASE("csv rejects a wrong header and short rows") {
    CHECK_THROWS_AS(parse_csv("id,sql,grade\na,b,1\n"), DataError);
    CHECK_THROWS_AS(parse_csv(std::string(kHeader) + "s1,q1,SELECT 1,true\n"), DataError);
    CHECK(parse_csv(kHeader).empty());
}

TEST_CASE("gradebook consistency warnings") {
    std::vector<SubmissionRecord> recs;
    recs.push_back({"s1", "q1", "SELECT 1", true, Remark::Correct, 100.0});
    CHECK(validate_records(recs).empty());

    recs.push_back({"s2", "q1", "SELECT 2", true, Remark::Cheating, 0.0});
    recs.push_back({"s3", "q1", "SELECT 3", false, Remark::Correct, 100.0});
    auto warnings = validate_records(recs);
    CHECK(warnings.size() == 2);
    CHECK(warnings[0].find("s2") != std::string::npos);
    CHECK(warnings[1].find("s3") != std::string::npos);
}

// ------------------------------------------------------------------ examples

TEST_CASE("to_example maps labels to model targets") {
    Vocabulary vocab = build_vocab({lex("select a from t")}, 1);
    SubmissionRecord rec{"s1", "q1", "SELECT a FROM t", false, Remark::PartiallyCorrect, 66.0};
    LabeledExample ex = to_example(rec, vocab);
    CHECK(ex.submission_id == "s1");
    CHECK(ex.x.ids.size() == kSeqLen);
    CHECK(ex.y_correct == 0.0);
    CHECK(ex.y_remark == std::array<double, 4>{0.0, 1.0, 0.0, 0.0});
    CHECK(ex.y_grade == doctest::Approx(0.66));
}

// --------------------------------------------------------------------- folds

namespace {

void check_partition(const FoldPlan& plan, std::size_t n) {
    std::vector<std::size_t> seen_val;
    for (const auto& fold : plan.folds) {
        std::set<std::size_t> train(fold.train_indices.begin(), fold.train_indices.end());
        for (std::size_t v : fold.val_indices) {
            CHECK(train.count(v) == 0);
            seen_val.push_back(v);
        }
        CHECK(train.size() + fold.val_indices.size() == n);
    }
    std::sort(seen_val.begin(), seen_val.end());
    REQUIRE(seen_val.size() == n);
    for (std::size_t i = 0; i < n; ++i) CHECK(seen_val[i] == i);
}

}  // namespace

TEST_CASE("kfold folds partition the index range") {
    for (std::size_t n : {10, 23, 100})
        for (std::size_t k : {2, 5, 7}) {
            FoldPlan plan = kfold_split(n, k, 42);
            REQUIRE(plan.folds.size() == k);
            check_partition(plan, n);
            // Round-robin deal keeps fold sizes within one of each other.
            std::size_t lo = n, hi = 0;
            for (const auto& f : plan.folds) {
                lo = std::min(lo, f.val_indices.size());
                hi = std::max(hi, f.val_indices.size());
            }
            CHECK(hi - lo <= 1);
        }
}

TEST_CASE("kfold is seed-deterministic and seed-sensitive") {
    FoldPlan a = kfold_split(50, 5, 7);
    FoldPlan b = kfold_split(50, 5, 7);
    FoldPlan c = kfold_split(50, 5, 8);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(a.folds[i].val_indices == b.folds[i].val_indices);
    bool any_diff = false;
    for (std::size_t i = 0; i < 5; ++i)
        if (a.folds[i].val_indices != c.folds[i].val_indices) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("kfold rejects unusable k") {
    CHECK_THROWS_AS(kfold_split(10, 1, 0), ParameterError);
    CHECK_THROWS_AS(kfold_split(10, 11, 0), ParameterError);
    CHECK_NOTHROW(kfold_split(10, 10, 0));
}

TEST_CASE("leave-one-out puts each index in exactly one validation fold") {
    FoldPlan plan = loo_split(6);
    REQUIRE(plan.folds.size() == 6);
    CHECK(plan.scheme == "loo");
    for (std::size_t i = 0; i < 6; ++i) {
        REQUIRE(plan.folds[i].val_indices.size() == 1);
        CHECK(plan.folds[i].val_indices[0] == i);
        CHECK(plan.folds[i].train_indices.size() == 5);
    }
    check_partition(plan, 6);
}

// ------------------------------------------------------------- class weights

TEST_CASE("class weights follow n_total / (n_classes * n_class)") {
    // 90 positive / 10 negative: negative weight 100/(2*10) = 5,
    // positive weight 100/(2*90) = 0.5556.
    std::vector<LabeledExample> examples(100);
    for (std::size_t i = 0; i < 100; ++i) {
        examples[i].y_correct = i < 90 ? 1.0 : 0.0;
        examples[i].y_remark = {0, 0, 0, 0};
        examples[i].y_remark[i % 2] = 1.0;  // remarks split 50/50 over two classes
    }
    ClassWeights w = class_weights(examples);
    CHECK(w.correct[0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(w.correct[1] == doctest::Approx(100.0 / 180.0).epsilon(1e-12));
    CHECK(w.remark[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(w.remark[1] == doctest::Approx(0.5).epsilon(1e-12));
    // Absent remark classes get weight zero plus a warning each.
    CHECK(w.remark[2] == 0.0);
    CHECK(w.remark[3] == 0.0);
    CHECK(w.warnings.size() == 2);
}

// ----------------------------------------------------------------- synthetic

TEST_CASE("synthetic corpus is deterministic and label-consistent") {
    auto a = generate_synthetic(100, 9);
    auto b = generate_synthetic(100, 9);
    REQUIRE(a.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(a[i].submission_id == b[i].submission_id);
        CHECK(a[i].submitted_answer == b[i].submitted_answer);
        CHECK(a[i].remark == b[i].remark);
        CHECK(a[i].grade_percent == b[i].grade_percent);
    }
    for (const auto& r : a) {
        CHECK(r.is_correct == (r.remark == Remark::Correct));
        switch (r.remark) {
            case Remark::Correct:
                CHECK(r.grade_percent == 100.0);
                break;
            case Remark::PartiallyCorrect:
                CHECK(r.grade_percent >= 40.0);
                CHECK(r.grade_percent <= 80.0);
                break;
            default:
                CHECK(r.grade_percent == 0.0);
        }
        if (r.remark == Remark::Cheating) {
            // The tell: the statement repeated verbatim after a semicolon.
            auto semi = r.submitted_answer.find(';');
            REQUIRE(semi != std::string::npos);
            std::string first = r.submitted_answer.substr(0, semi);
            CHECK(r.submitted_answer.find(first, semi) != std::string::npos);
        }
    }
    CHECK(validate_records(a).empty());
}

TEST_CASE("synthetic class mix at n=400") {
    auto recs = generate_synthetic(400, 42);
    int counts[4] = {0, 0, 0, 0};
    for (const auto& r : recs) counts[static_cast<int>(r.remark)]++;
    CHECK(counts[0] == 160);
    CHECK(counts[1] == 154);
    CHECK(counts[2] == 73);
    CHECK(counts[3] == 13);
    CHECK(recs.front().submission_id == "syn-00000");
    CHECK(recs.back().submission_id == "syn-00399");
}

TEST_CASE("synthetic corpus enforces the minimum size") {
    CHECK_THROWS_AS(generate_synthetic(7, 0), ParameterError);
    CHECK(generate_synthetic(8, 0).size() == 8);
}
