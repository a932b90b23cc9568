#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace corpuskit {

// A tokenizer under evaluation, reduced to what the metrics need: a
// deterministic per-word piece split. Concatenating the pieces, after
// undoing the adapter's declared markers, reconstructs the word.
class TokenizerAdapter {
public:
    virtual ~TokenizerAdapter() = default;

    virtual std::vector<std::string> tokenize(std::string_view word) const = 0;
    virtual std::string_view name() const = 0;
    virtual size_t vocab_size() const = 0;

    // Piece the adapter emits for words it cannot represent.
    virtual std::string_view unk_piece() const { return "[UNK]"; }
};

// Reference adapter: greedy longest-match against a piece vocabulary.
// Unmatched bytes fall back to <0xNN> pieces by default; with fallback
// disabled, any unmatchable word collapses to the unknown piece.
class VocabTokenizer : public TokenizerAdapter {
public:
    struct Options {
        std::string unk = "[UNK]";
        bool byte_fallback = true;
    };

    VocabTokenizer(std::string name, const std::vector<std::string>& pieces,
                   Options options);
    VocabTokenizer(std::string name, const std::vector<std::string>& pieces);

    // Vocab file format: one piece per line, UTF-8, blank lines ignored.
    static VocabTokenizer from_file(std::string name, const std::string& path,
                                    Options options);
    static VocabTokenizer from_file(std::string name, const std::string& path);

    std::vector<std::string> tokenize(std::string_view word) const override;
    std::string_view name() const override { return name_; }
    size_t vocab_size() const override { return pieces_.size(); }
    std::string_view unk_piece() const override { return options_.unk; }

private:
    std::string name_;
    std::vector<std::string> pieces_;  // sorted unique, for lookup
    size_t max_piece_bytes_ = 0;
    Options options_;
};

struct TokEvalReport {
    std::string tokenizer;
    size_t vocab_size = 0;
    int64_t word_count = 0;
    int64_t token_count = 0;
    // Words split into two or more pieces, not counting words made up
    // entirely of the unknown piece.
    int64_t split_words = 0;
    // Words whose pieces include the unknown piece.
    int64_t unk_words = 0;

    double fertility() const { return static_cast<double>(token_count) / word_count; }
    double pcw() const { return static_cast<double>(split_words) / word_count; }
};

// Exact token and split counts over an isolated word list. Throws
// std::invalid_argument on an empty list.
TokEvalReport evaluate_tokenizer(const std::vector<std::string>& words,
                                 const TokenizerAdapter& tok);

// Whole-text mode: whitespace-splits the text and evaluates the words,
// duplicates included.
TokEvalReport evaluate_text(std::string_view text, const TokenizerAdapter& tok);

// Ascending by exact fertility; ties broken by token_count, then name.
void sort_reports(std::vector<TokEvalReport>& reports);

// One report per adapter over the shared word list, sorted ascending by
// fertility. Adapters are evaluated in parallel; threads = 0 picks the
// hardware default. Throws std::invalid_argument when no adapter is given.
std::vector<TokEvalReport> compare_tokenizers(
    const std::vector<std::string>& words,
    const std::vector<const TokenizerAdapter*>& adapters, size_t threads = 0);

nlohmann::json report_to_json(const TokEvalReport& report);

// Aligned comparison table: Tokenizer, Tokens (N words), Vocab Size,
// Fertility, PCW, UNK. Fertility and PCW shown at two decimals.
std::string comparison_table(const std::vector<TokEvalReport>& reports);

// Word list file: one word per line, UTF-8, blank lines ignored.
std::vector<std::string> load_word_list(const std::string& path);

std::vector<std::string> load_vocab_file(const std::string& path);

// Undoes <0xNN> byte pieces and concatenates. Returns nullopt when any
// piece equals the unknown marker, since the original is unrecoverable.
std::optional<std::string> reconstruct_pieces(const std::vector<std::string>& pieces,
                                              std::string_view unk);

}  // namespace corpuskit
