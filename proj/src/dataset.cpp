#include "sqlgrader/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "sqlgrader/rng.hpp"

namespace sqlgrader {

const char* remark_name(Remark r) {
    switch (r) {
        case Remark::Correct: return "Correct";
        case Remark::PartiallyCorrect: return "Partially Correct";
        case Remark::Uninterpretable: return "Uninterpretable";
        case Remark::Cheating: return "Cheating";
    }
    return "?";
}

Remark parse_remark(const std::string& text) {
    std::string norm;
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!norm.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            norm += ' ';
            pending_space = false;
        }
        norm += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (norm == "correct") return Remark::Correct;
    if (norm == "partially correct" || norm == "partiallycorrect")
        return Remark::PartiallyCorrect;
    if (norm == "uninterpretable") return Remark::Uninterpretable;
    if (norm == "cheating") return Remark::Cheating;
    throw DataError("unknown remark \"" + text + "\"");
}

std::vector<std::string> validate_records(const std::vector<SubmissionRecord>& records) {
    std::vector<std::string> warnings;
    for (const auto& r : records) {
        if (r.remark == Remark::Correct && !r.is_correct)
            warnings.push_back("submission " + r.submission_id +
                               ": remark Correct but is_correct is false");
        if (r.is_correct && r.grade_percent != 100.0)
            warnings.push_back("submission " + r.submission_id +
                               ": is_correct but grade is not 100");
    }
    return warnings;
}

// --------------------------------------------------------------- CSV parsing

namespace {

// RFC-4180: quoted fields may contain commas, newlines and "" escapes.
// Returns rows of fields; keeps track of the 1-based line each row starts on.
std::vector<std::pair<std::size_t, std::vector<std::string>>> split_csv(
    const std::string& text) {
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
    std::vector<std::string> fields;
    std::string field;
    std::size_t line = 1, row_line = 1;
    bool in_quotes = false;
    bool row_started = false;

    auto end_field = [&] { fields.push_back(std::move(field)); field.clear(); };
    auto end_row = [&] {
        end_field();
        rows.emplace_back(row_line, std::move(fields));
        fields.clear();
        row_started = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (!row_started) {
            row_line = line;
            row_started = true;
        }
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
                if (c == '\n') ++line;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r') {
            // swallowed; \r\n handled at \n
        } else if (c == '\n') {
            end_row();
            ++line;
        } else {
            field += c;
        }
    }
    if (in_quotes) throw DataError("unterminated quoted CSV field at end of input");
    if (row_started || !field.empty() || !fields.empty()) end_row();
    return rows;
}

bool parse_bool(const std::string& s, bool& out) {
    if (s == "1" || s == "true" || s == "TRUE" || s == "True") { out = true; return true; }
    if (s == "0" || s == "false" || s == "FALSE" || s == "False") { out = false; return true; }
    return false;
}

const std::vector<std::string> kHeader = {"submission_id", "query_id", "submitted_answer",
                                          "is_correct",    "remark",   "grade"};

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::string format_grade(double g) {
    std::ostringstream out;
    out.precision(17);
    out << g;
    return out.str();
}

}  // namespace

std::vector<SubmissionRecord> parse_csv(const std::string& text) {
    auto rows = split_csv(text);
    if (rows.empty()) throw DataError("CSV is empty (missing header)");
    const auto& header = rows.front().second;
    if (header != kHeader) {
        std::string expected;
        for (const auto& h : kHeader) expected += (expected.empty() ? "" : ",") + h;
        throw DataError("CSV header mismatch; expected: " + expected);
    }

    std::vector<SubmissionRecord> records;
    std::vector<std::string> errors;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& [line, fields] = rows[r];
        const std::string where = "line " + std::to_string(line);
        if (fields.size() != kHeader.size()) {
            errors.push_back(where + ": expected " + std::to_string(kHeader.size()) +
                             " fields, got " + std::to_string(fields.size()));
            continue;
        }
        SubmissionRecord rec;
        rec.submission_id = fields[0];
        rec.query_id = fields[1];
        rec.submitted_answer = fields[2];
        if (!parse_bool(fields[3], rec.is_correct)) {
            errors.push_back(where + ": is_correct must be 0/1/true/false, got \"" +
                             fields[3] + "\"");
            continue;
        }
        try {
            rec.remark = parse_remark(fields[4]);
        } catch (const DataError& e) {
            errors.push_back(where + ": " + e.what());
            continue;
        }
        try {
            std::size_t pos = 0;
            rec.grade_percent = std::stod(fields[5], &pos);
            if (pos != fields[5].size()) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            errors.push_back(where + ": unparseable grade \"" + fields[5] + "\"");
            continue;
        }
        if (rec.grade_percent < 0.0 || rec.grade_percent > 100.0) {
            errors.push_back(where + ": grade " + fields[5] + " out of range [0,100]");
            continue;
        }
        records.push_back(std::move(rec));
    }
    if (!errors.empty()) {
        std::string msg = std::to_string(errors.size()) + " bad CSV row(s):";
        for (const auto& e : errors) msg += "\n  " + e;
        throw DataError(msg);
    }
    return records;
}

std::vector<SubmissionRecord> load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read dataset: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_csv(text);
}

std::string records_to_csv(const std::vector<SubmissionRecord>& records) {
    std::string out = "submission_id,query_id,submitted_answer,is_correct,remark,grade\n";
    for (const auto& r : records) {
        out += csv_escape(r.submission_id) + "," + csv_escape(r.query_id) + "," +
               csv_escape(r.submitted_answer) + "," + (r.is_correct ? "1" : "0") + "," +
               remark_name(r.remark) + "," + format_grade(r.grade_percent) + "\n";
    }
    return out;
}

void write_csv(const std::vector<SubmissionRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write CSV: " + path);
    out << records_to_csv(records);
    if (!out) throw IoError("short write on CSV: " + path);
}

// ------------------------------------------------------------------ labeling

LabeledExample to_example(const SubmissionRecord& rec, const Vocabulary& vocab,
                          const LexOptions& opts) {
    LabeledExample ex;
    ex.submission_id = rec.submission_id;
    try {
        ex.x = encode(lex(rec.submitted_answer, opts), vocab);
    } catch (const DataError& e) {
        throw DataError("submission " + rec.submission_id + ": " + e.what());
    }
    ex.y_correct = rec.is_correct ? 1.0 : 0.0;
    ex.y_remark[static_cast<std::size_t>(rec.remark)] = 1.0;
    ex.y_grade = rec.grade_percent / 100.0;
    return ex;
}

// ---------------------------------------------------------------------- folds

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2 || k > n)
        throw ParameterError("kfold_split requires 2 <= k <= n, got k=" + std::to_string(k) +
                             ", n=" + std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    SeededRng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.next_below(i + 1)]);

    FoldPlan plan;
    plan.scheme = "kfold";
    plan.seed = seed;
    plan.folds.resize(k);
    for (std::size_t i = 0; i < n; ++i) plan.folds[i % k].val_indices.push_back(order[i]);
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<bool> in_val(n, false);
        for (std::size_t idx : plan.folds[f].val_indices) in_val[idx] = true;
        for (std::size_t i = 0; i < n; ++i)
            if (!in_val[i]) plan.folds[f].train_indices.push_back(i);
    }
    return plan;
}

FoldPlan loo_split(std::size_t n) {
    if (n < 2) throw ParameterError("loo_split requires n >= 2");
    FoldPlan plan;
    plan.scheme = "loo";
    plan.folds.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        plan.folds[i].val_indices = {i};
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) plan.folds[i].train_indices.push_back(j);
    }
    return plan;
}

// -------------------------------------------------------------- class weights

ClassWeights class_weights(const std::vector<LabeledExample>& examples) {
    if (examples.empty()) throw ParameterError("class_weights: no examples");
    ClassWeights w{};
    std::array<std::size_t, 2> nc{};
    std::array<std::size_t, 4> nr{};
    for (const auto& ex : examples) {
        ++nc[ex.y_correct > 0.5 ? 1 : 0];
        for (std::size_t j = 0; j < 4; ++j)
            if (ex.y_remark[j] > 0.5) ++nr[j];
    }
    const double total = static_cast<double>(examples.size());
    for (std::size_t j = 0; j < 2; ++j) {
        if (nc[j] == 0) {
            w.correct[j] = 0.0;
            w.warnings.push_back(std::string("correctness class ") + (j ? "1" : "0") +
                                 " has no examples; weight set to 0");
        } else {
            w.correct[j] = total / (2.0 * static_cast<double>(nc[j]));
        }
    }
    for (std::size_t j = 0; j < 4; ++j) {
        if (nr[j] == 0) {
            w.remark[j] = 0.0;
            w.warnings.push_back(std::string("remark class ") +
                                 remark_name(static_cast<Remark>(j)) +
                                 " has no examples; weight set to 0");
        } else {
            w.remark[j] = total / (4.0 * static_cast<double>(nr[j]));
        }
    }
    return w;
}

// ---------------------------------------------------------- synthetic corpus

namespace {

struct Template {
    std::string tables;    // FROM clause body with required join predicates
    std::string join;      // required join predicate(s)
    std::string columns;
};

// Toy schemas with a required join the generator can drop or garble.
const std::vector<Template> kTemplates = {
    {"person p, address a", "p.address_id = a.id", "p.id, p.first_name, p.last_name"},
    {"ztvshow ztv, zprodby zprb", "zprb.show_num = ztv.show_num",
     "ztv.show_name, zprb.prod_salary"},
    {"course c, enrollment e", "e.course_id = c.id", "c.title, e.student_id"},
    {"orders o, customer cu", "o.customer_id = cu.id", "cu.name, o.total"},
    {"employee emp, dept d", "emp.dept_id = d.id", "emp.name, d.dept_name"},
};

const std::vector<std::string> kFilters = {
    "%1.id > 10", "%1.id < 250", "%1.id >= 42", "%1.id <> 7", "%1.id != 99",
};

std::string make_correct(const Template& t, SeededRng& rng) {
    std::string sql = "SELECT " + t.columns + " FROM " + t.tables + " WHERE " + t.join;
    if (rng.next_double() < 0.5) {
        std::string filter = kFilters[rng.next_below(kFilters.size())];
        const std::string alias = t.tables.substr(t.tables.find(' ') + 1,
                                                  t.tables.find(',') - t.tables.find(' ') - 1);
        const auto pos = filter.find("%1");
        filter = filter.substr(0, pos) + alias + filter.substr(pos + 2);
        sql += " AND " + filter;
    }
    if (rng.next_double() < 0.3) sql += " ORDER BY 1";
    return sql + ";";
}

std::string make_partial(const Template& t, SeededRng& rng) {
    // Required join predicate dropped: a cross join with only a value filter.
    std::string sql = "SELECT " + t.columns + " FROM " + t.tables;
    std::string filter = kFilters[rng.next_below(kFilters.size())];
    const std::string alias = t.tables.substr(t.tables.find(' ') + 1,
                                              t.tables.find(',') - t.tables.find(' ') - 1);
    const auto pos = filter.find("%1");
    filter = filter.substr(0, pos) + alias + filter.substr(pos + 2);
    sql += " WHERE " + filter;
    return sql + ";";
}

std::string make_uninterpretable(const Template& t, SeededRng& rng) {
    // Keyword order garbled beyond parsing.
    switch (rng.next_below(3)) {
        case 0: return "FROM " + t.tables + " SELECT " + t.columns + " WHERE;";
        case 1: return "SELECT WHERE " + t.join + " " + t.columns + " FROM;";
        default: return "WHERE SELECT FROM " + t.columns + " " + t.tables + ";";
    }
}

}  // namespace

std::vector<SubmissionRecord> generate_synthetic(std::size_t n, std::uint64_t seed) {
    if (n < 8) throw ParameterError("generate_synthetic requires n >= 8");
    SeededRng rng(seed);
    std::vector<SubmissionRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Template& t = kTemplates[rng.next_below(kTemplates.size())];
        SubmissionRecord rec;
        {
            std::ostringstream id;
            id << "syn-" << std::setw(5) << std::setfill('0') << i;
            rec.submission_id = id.str();
        }
        rec.query_id = "q" + std::to_string(1 + rng.next_below(12));

        const double draw = rng.next_double();
        if (draw < 0.40) {
            rec.submitted_answer = make_correct(t, rng);
            rec.is_correct = true;
            rec.remark = Remark::Correct;
            rec.grade_percent = 100.0;
        } else if (draw < 0.75) {
            rec.submitted_answer = make_partial(t, rng);
            rec.is_correct = false;
            rec.remark = Remark::PartiallyCorrect;
            rec.grade_percent = 40.0 + 5.0 * static_cast<double>(rng.next_below(9));  // 40..80
        } else if (draw < 0.95) {
            rec.submitted_answer = make_uninterpretable(t, rng);
            rec.is_correct = false;
            rec.remark = Remark::Uninterpretable;
            rec.grade_percent = 0.0;
        } else {
            // Duplicated verbatim answer.
            const std::string body = make_correct(t, rng);
            rec.submitted_answer = body + " " + body;
            rec.is_correct = false;
            rec.remark = Remark::Cheating;
            rec.grade_percent = 0.0;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace sqlgrader
