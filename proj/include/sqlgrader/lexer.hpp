#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sqlgrader/errors.hpp"

namespace sqlgrader {

inline constexpr std::size_t kSeqLen = 172;
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;

struct LexOptions {
    // Fold string literals to "<str>" and numeric literals to "<num>".
    bool fold_literals = true;
};

// Tokenize SQL text. Lowercases outside string literals, discards whitespace
// and comments (-- to end of line, /* */), keeps identifier/keyword runs of
// [a-z0-9_$#]+, folds literals per options, and emits punctuation and the
// two-character operators >= <= <> != || as single tokens.
// Throws DataError with a byte offset on an unterminated string literal.
std::vector<std::string> lex(const std::string& sql, const LexOptions& opts = {});

struct Vocabulary {
    std::map<std::string, int> token_to_id;  // non-reserved tokens only
    std::vector<std::string> id_to_token;    // includes <pad>, <unk> at 0, 1

    std::size_t size() const { return id_to_token.size(); }
    int id_of(const std::string& token) const;
};

// Ids 2.. assigned by descending frequency, ties lexicographic; PAD=0, UNK=1.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus,
                       std::size_t min_count = 1);

// Fixed-length token-id encoding of one statement: truncate to the first
// kSeqLen tokens, right-pad with PAD.
struct EncodedStatement {
    std::vector<int> ids;  // length exactly kSeqLen
};

EncodedStatement encode(const std::vector<std::string>& tokens, const Vocabulary& vocab);

// Vocabulary file: {"format_version":1, "tokens":[...]} for ids 2.. in order.
void save_vocab(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocab(const std::string& path);

std::string vocab_to_json(const Vocabulary& vocab);
Vocabulary vocab_from_json(const std::string& text);

}  // namespace sqlgrader
