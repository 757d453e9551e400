#include "sqlgrader/lexer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

namespace sqlgrader {

namespace {

bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '$' || c == '#';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

}  // namespace

std::vector<std::string> lex(const std::string& sql, const LexOptions& opts) {
    std::vector<std::string> tokens;
    const std::size_t n = sql.size();
    std::size_t i = 0;
    while (i < n) {
        const char c = sql[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        // Line comment.
        if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
            while (i < n && sql[i] != '\n') ++i;
            continue;
        }
        // Block comment; an unterminated one runs to end of input.
        if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
            i += 2;
            while (i + 1 < n && !(sql[i] == '*' && sql[i + 1] == '/')) ++i;
            i = (i + 1 < n) ? i + 2 : n;
            continue;
        }
        // String literal, single or double quoted, '' / "" as escape.
        if (c == '\'' || c == '"') {
            const char quote = c;
            const std::size_t start = i;
            ++i;
            std::string body;
            bool closed = false;
            while (i < n) {
                if (sql[i] == quote) {
                    if (i + 1 < n && sql[i + 1] == quote) {
                        body += quote;
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                body += sql[i++];
            }
            if (!closed)
                throw DataError("unterminated string literal at byte offset " +
                                std::to_string(start));
            if (opts.fold_literals)
                tokens.emplace_back("<str>");
            else
                tokens.push_back(std::string(1, quote) + body + quote);
            continue;
        }
        // Numeric literal: digits, optional fraction and exponent.
        if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(sql[i + 1]))) {
            const std::size_t start = i;
            while (i < n && is_digit(sql[i])) ++i;
            if (i < n && sql[i] == '.') {
                ++i;
                while (i < n && is_digit(sql[i])) ++i;
            }
            if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < n && (sql[j] == '+' || sql[j] == '-')) ++j;
                if (j < n && is_digit(sql[j])) {
                    i = j;
                    while (i < n && is_digit(sql[i])) ++i;
                }
            }
            if (opts.fold_literals)
                tokens.emplace_back("<num>");
            else
                tokens.push_back(sql.substr(start, i - start));
            continue;
        }
        // Identifier / keyword run.
        if (is_word_char(c)) {
            std::string word;
            while (i < n && is_word_char(sql[i])) word += lower(sql[i++]);
            tokens.push_back(std::move(word));
            continue;
        }
        // Two-character operators, then single punctuation.
        if (i + 1 < n) {
            const std::string two = sql.substr(i, 2);
            if (two == ">=" || two == "<=" || two == "<>" || two == "!=" || two == "||") {
                tokens.push_back(two);
                i += 2;
                continue;
            }
        }
        tokens.push_back(std::string(1, lower(c)));
        ++i;
    }
    return tokens;
}

int Vocabulary::id_of(const std::string& token) const {
    auto it = token_to_id.find(token);
    return it == token_to_id.end() ? kUnkId : it->second;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus,
                       std::size_t min_count) {
    if (corpus.empty()) throw DataError("build_vocab: empty corpus");
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& tokens : corpus)
        for (const auto& t : tokens) ++counts[t];

    std::vector<std::pair<std::string, std::size_t>> kept;
    for (const auto& [token, count] : counts)
        if (count >= min_count) kept.emplace_back(token, count);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary vocab;
    vocab.id_to_token = {"<pad>", "<unk>"};
    for (const auto& [token, count] : kept) {
        vocab.token_to_id[token] = static_cast<int>(vocab.id_to_token.size());
        vocab.id_to_token.push_back(token);
    }
    return vocab;
}

EncodedStatement encode(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
    EncodedStatement enc;
    enc.ids.assign(kSeqLen, kPadId);
    const std::size_t limit = std::min(tokens.size(), kSeqLen);
    for (std::size_t i = 0; i < limit; ++i) enc.ids[i] = vocab.id_of(tokens[i]);
    return enc;
}

std::string vocab_to_json(const Vocabulary& vocab) {
    nlohmann::json doc;
    doc["format_version"] = 1;
    doc["tokens"] = std::vector<std::string>(vocab.id_to_token.begin() + 2,
                                             vocab.id_to_token.end());
    return doc.dump();
}

Vocabulary vocab_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("vocabulary file is not valid JSON: ") + e.what());
    }
    if (!doc.contains("format_version") || doc["format_version"].get<int>() != 1)
        throw IoError("unsupported vocabulary format_version");
    Vocabulary vocab;
    vocab.id_to_token = {"<pad>", "<unk>"};
    for (const auto& t : doc.at("tokens")) {
        vocab.token_to_id[t.get<std::string>()] = static_cast<int>(vocab.id_to_token.size());
        vocab.id_to_token.push_back(t.get<std::string>());
    }
    return vocab;
}

void save_vocab(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write vocabulary file: " + path);
    out << vocab_to_json(vocab) << "\n";
}

Vocabulary load_vocab(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read vocabulary file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return vocab_from_json(text);
}

}  // namespace sqlgrader
