#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "corpuskit/tokeval.hpp"

using namespace corpuskit;

namespace {

// Scripted adapter: emits a fixed number of pieces per word by position.
class PieceCountTokenizer : public TokenizerAdapter {
public:
    PieceCountTokenizer(std::string name, std::vector<int> counts)
        : name_(std::move(name)), counts_(std::move(counts)) {}

    std::vector<std::string> tokenize(std::string_view word) const override {
        size_t i = index_++ % counts_.size();
        std::vector<std::string> pieces;
        for (int p = 0; p < counts_[i]; ++p)
            pieces.push_back(std::string(word) + "#" + std::to_string(p));
        return pieces;
    }
    std::string_view name() const override { return name_; }
    size_t vocab_size() const override { return 1000; }

private:
    std::string name_;
    std::vector<int> counts_;
    mutable size_t index_ = 0;
};

class IdentityTokenizer : public TokenizerAdapter {
public:
    std::vector<std::string> tokenize(std::string_view word) const override {
        return {std::string(word)};
    }
    std::string_view name() const override { return "identity"; }
    size_t vocab_size() const override { return 42; }
};

class UnkPairTokenizer : public TokenizerAdapter {
public:
    std::vector<std::string> tokenize(std::string_view word) const override {
        if (word.find('!') != std::string_view::npos) return {"[UNK]", "[UNK]"};
        if (word.find('?') != std::string_view::npos)
            return {"[UNK]", std::string(word)};
        return {std::string(word)};
    }
    std::string_view name() const override { return "unkpair"; }
    size_t vocab_size() const override { return 7; }
};

std::string temp_file(const std::string& name, const std::string& content) {
    std::string path = "/tmp/corpuskit_tok_" + name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("identity tokenizer gives fertility 1 and pcw 0") {
    IdentityTokenizer tok;
    std::vector<std::string> words = {"one", "two", "three"};
    TokEvalReport report = evaluate_tokenizer(words, tok);
    CHECK(report.word_count == 3);
    CHECK(report.token_count == 3);
    CHECK(report.fertility() == 1.0);
    CHECK(report.pcw() == 0.0);
    CHECK(report.unk_words == 0);
    CHECK(report.vocab_size == 42);
}

TEST_CASE("piece counts (1,2,3,2) give fertility 2 and pcw 0.75") {
    PieceCountTokenizer tok("mock", {1, 2, 3, 2});
    std::vector<std::string> words = {"a", "b", "c", "d"};
    TokEvalReport report = evaluate_tokenizer(words, tok);
    CHECK(report.word_count == 4);
    CHECK(report.token_count == 8);
    CHECK(report.fertility() == 2.0);
    CHECK(report.split_words == 3);
    CHECK(report.pcw() == 0.75);
}

TEST_CASE("fertility display rounds to the published two decimals") {
    // 31,500 words with 14,629 of them split in two gives 46,129 tokens.
    std::vector<int> counts(31500, 1);
    std::fill(counts.begin(), counts.begin() + 14629, 2);
    PieceCountTokenizer tok("reference", counts);
    std::vector<std::string> words(31500, "w");
    TokEvalReport report = evaluate_tokenizer(words, tok);
    CHECK(report.token_count == 46129);
    CHECK(report.fertility() == doctest::Approx(1.46441).epsilon(1e-5));

    nlohmann::json j = report_to_json(report);
    CHECK(j["fertility_display"] == "1.46");
    CHECK(j["token_count"] == 46129);
    CHECK(j["word_count"] == 31500);
}

TEST_CASE("fertility times word count reproduces token count exactly") {
    std::mt19937_64 rng(404);
    std::vector<int> counts;
    for (int i = 0; i < 997; ++i) counts.push_back(1 + static_cast<int>(rng() % 5));
    PieceCountTokenizer tok("mock", counts);
    std::vector<std::string> words(997, "x");
    TokEvalReport report = evaluate_tokenizer(words, tok);
    int64_t expected = 0;
    for (int c : counts) expected += c;
    CHECK(report.token_count == expected);
}

TEST_CASE("empty word list is rejected") {
    IdentityTokenizer tok;
    CHECK_THROWS_AS(evaluate_tokenizer({}, tok), std::invalid_argument);
}

TEST_CASE("unknown-only words count as UNK but not as splits") {
    UnkPairTokenizer tok;
    std::vector<std::string> words = {"plain", "bang!", "what?"};
    TokEvalReport report = evaluate_tokenizer(words, tok);
    CHECK(report.word_count == 3);
    CHECK(report.token_count == 5);
    CHECK(report.unk_words == 2);
    // "bang!" is all-UNK so only "what?" counts as split.
    CHECK(report.split_words == 1);
}

TEST_CASE("greedy matcher prefers the longest piece") {
    VocabTokenizer tok("greedy", {"a", "b", "c", "ab", "abc"});
    CHECK(tok.tokenize("abc") == std::vector<std::string>{"abc"});
    CHECK(tok.tokenize("abb") == std::vector<std::string>{"ab", "b"});
    CHECK(tok.tokenize("cab") == std::vector<std::string>{"c", "ab"});
    CHECK(tok.tokenize("ababc") == std::vector<std::string>{"ab", "abc"});
    CHECK(tok.tokenize("").empty());
    CHECK(tok.vocab_size() == 5);
}

TEST_CASE("byte fallback covers out-of-vocab bytes and reconstructs") {
    VocabTokenizer tok("bytes", {"a"});
    std::vector<std::string> pieces = tok.tokenize("aZ");
    CHECK(pieces == std::vector<std::string>{"a", "<0x5A>"});
    CHECK(reconstruct_pieces(pieces, tok.unk_piece()) == std::string("aZ"));

    std::string hindi = "हि";
    std::vector<std::string> fallback = tok.tokenize(hindi);
    CHECK(fallback.size() == hindi.size());
    CHECK(reconstruct_pieces(fallback, tok.unk_piece()) == hindi);
}

TEST_CASE("disabled fallback collapses unmatchable words to UNK") {
    VocabTokenizer::Options options;
    options.byte_fallback = false;
    VocabTokenizer tok("strict", {"a", "x"}, options);
    CHECK(tok.tokenize("ax") == std::vector<std::string>{"a", "x"});
    CHECK(tok.tokenize("ay") == std::vector<std::string>{"[UNK]"});
    CHECK(reconstruct_pieces(tok.tokenize("ay"), tok.unk_piece()) == std::nullopt);

    std::vector<std::string> words = {"ax", "ay", "xa"};
    TokEvalReport report = evaluate_tokenizer(words, tok);
    CHECK(report.unk_words == 1);
    CHECK(report.split_words == 2);
    CHECK(report.token_count == 5);
}

TEST_CASE("multibyte vocab pieces match whole codepoints") {
    VocabTokenizer tok("hindi", {"हि", "न्दी", "दी"});
    std::vector<std::string> pieces = tok.tokenize("हिन्दी");
    CHECK(pieces == std::vector<std::string>{"हि", "न्दी"});
    CHECK(reconstruct_pieces(pieces, tok.unk_piece()) == std::string("हिन्दी"));
}

TEST_CASE("report is invariant under word permutation") {
    VocabTokenizer tok("greedy", {"a", "b", "ab", "ba"});
    std::vector<std::string> words = {"ab", "ba", "aab", "bba", "a", "b"};
    TokEvalReport base = evaluate_tokenizer(words, tok);

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        std::shuffle(words.begin(), words.end(), rng);
        TokEvalReport shuffled = evaluate_tokenizer(words, tok);
        CHECK(shuffled.token_count == base.token_count);
        CHECK(shuffled.split_words == base.split_words);
        CHECK(shuffled.unk_words == base.unk_words);
    }
}

TEST_CASE("compare_tokenizers sorts ascending by fertility") {
    VocabTokenizer compact("compact", {"aa", "bb", "ab", "ba", "a", "b"});
    VocabTokenizer chars("chars", {"a", "b"});
    std::vector<std::string> words = {"aa", "ab", "ba", "bb"};

    std::vector<TokEvalReport> reports = compare_tokenizers(words, {&chars, &compact});
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].tokenizer == "compact");
    CHECK(reports[0].fertility() == 1.0);
    CHECK(reports[1].tokenizer == "chars");
    CHECK(reports[1].fertility() == 2.0);

    std::vector<TokEvalReport> single = compare_tokenizers(words, {&chars});
    CHECK(single.size() == 1);

    CHECK_THROWS_AS(compare_tokenizers(words, {}), std::invalid_argument);
}

TEST_CASE("sort breaks fertility ties by token count then name") {
    TokEvalReport a;
    a.tokenizer = "alpha";
    a.word_count = 50;
    a.token_count = 100;
    TokEvalReport b;
    b.tokenizer = "beta";
    b.word_count = 45;
    b.token_count = 90;
    TokEvalReport c;
    c.tokenizer = "gamma";
    c.word_count = 45;
    c.token_count = 90;

    std::vector<TokEvalReport> reports = {a, c, b};
    sort_reports(reports);
    CHECK(reports[0].tokenizer == "beta");
    CHECK(reports[1].tokenizer == "gamma");
    CHECK(reports[2].tokenizer == "alpha");
}

TEST_CASE("parallel comparison matches serial") {
    VocabTokenizer t1("one", {"a"});
    VocabTokenizer t2("two", {"a", "b"});
    VocabTokenizer t3("three", {"a", "b", "ab"});
    std::vector<std::string> words = {"ab", "ba", "aa"};

    std::vector<TokEvalReport> serial = compare_tokenizers(words, {&t1, &t2, &t3}, 1);
    std::vector<TokEvalReport> parallel = compare_tokenizers(words, {&t1, &t2, &t3}, 3);
    REQUIRE(serial.size() == parallel.size());
    for (size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].tokenizer == parallel[i].tokenizer);
        CHECK(serial[i].token_count == parallel[i].token_count);
    }
}

TEST_CASE("whole-text mode equals evaluating the split words") {
    VocabTokenizer tok("greedy", {"a", "b", "ab"});
    TokEvalReport from_text = evaluate_text("ab ab\n b", tok);
    TokEvalReport from_words = evaluate_tokenizer({"ab", "ab", "b"}, tok);
    CHECK(from_text.token_count == from_words.token_count);
    CHECK(from_text.word_count == from_words.word_count);
    CHECK(from_text.split_words == from_words.split_words);
}

TEST_CASE("comparison table lays out the published columns") {
    VocabTokenizer compact("compact", {"aa", "ab", "ba", "bb"});
    VocabTokenizer chars("chars", {"a", "b"});
    std::vector<std::string> words = {"aa", "ab"};
    std::vector<TokEvalReport> reports = compare_tokenizers(words, {&chars, &compact});
    std::string table = comparison_table(reports);

    CHECK(table.find("Tokenizer") != std::string::npos);
    CHECK(table.find("Tokens (2 words)") != std::string::npos);
    CHECK(table.find("Vocab Size") != std::string::npos);
    CHECK(table.find("Fertility") != std::string::npos);
    CHECK(table.find("PCW") != std::string::npos);
    CHECK(table.find("UNK") != std::string::npos);
    CHECK(table.find("compact") < table.find("chars"));
    CHECK(table.find("1.00") != std::string::npos);
    CHECK(table.find("2.00") != std::string::npos);
}

TEST_CASE("word list and vocab loaders skip blanks and strip CR") {
    std::string words_path = temp_file("words.txt", "alpha\r\n\nbeta\ngamma\n\n");
    std::vector<std::string> words = load_word_list(words_path);
    CHECK(words == std::vector<std::string>{"alpha", "beta", "gamma"});

    std::string vocab_path = temp_file("vocab.txt", "a\nab\n\nb\n");
    std::vector<std::string> vocab = load_vocab_file(vocab_path);
    CHECK(vocab.size() == 3);

    CHECK_THROWS_AS(load_word_list("/tmp/corpuskit_tok_missing.txt"), std::runtime_error);
    std::remove(words_path.c_str());
    std::remove(vocab_path.c_str());
}
