#include "corpuskit/tokeval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "corpuskit/parallel.hpp"
#include "corpuskit/textutil.hpp"

namespace corpuskit {

namespace {

std::vector<std::string> read_lines(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(std::string("cannot open ") + what + ": " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        lines.push_back(line);
    }
    return lines;
}

std::string byte_piece(unsigned char byte) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "<0x%02X>", byte);
    return buf;
}

bool is_byte_piece(std::string_view piece, unsigned char& byte) {
    if (piece.size() != 6 || piece[0] != '<' || piece[1] != '0' || piece[2] != 'x' ||
        piece[5] != '>')
        return false;
    auto hex = [](char c, int& v) {
        if (c >= '0' && c <= '9')
            v = c - '0';
        else if (c >= 'A' && c <= 'F')
            v = c - 'A' + 10;
        else
            return false;
        return true;
    };
    int hi = 0;
    int lo = 0;
    if (!hex(piece[3], hi) || !hex(piece[4], lo)) return false;
    byte = static_cast<unsigned char>(hi * 16 + lo);
    return true;
}

}  // namespace

VocabTokenizer::VocabTokenizer(std::string name, const std::vector<std::string>& pieces,
                               Options options)
    : name_(std::move(name)), pieces_(pieces), options_(std::move(options)) {
    std::sort(pieces_.begin(), pieces_.end());
    pieces_.erase(std::unique(pieces_.begin(), pieces_.end()), pieces_.end());
    for (const std::string& piece : pieces_) {
        max_piece_bytes_ = std::max(max_piece_bytes_, piece.size());
    }
}

VocabTokenizer::VocabTokenizer(std::string name, const std::vector<std::string>& pieces)
    : VocabTokenizer(std::move(name), pieces, Options{}) {}

VocabTokenizer VocabTokenizer::from_file(std::string name, const std::string& path,
                                         Options options) {
    return VocabTokenizer(std::move(name), load_vocab_file(path), std::move(options));
}

VocabTokenizer VocabTokenizer::from_file(std::string name, const std::string& path) {
    return from_file(std::move(name), path, Options{});
}

std::vector<std::string> VocabTokenizer::tokenize(std::string_view word) const {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos < word.size()) {
        size_t limit = std::min(max_piece_bytes_, word.size() - pos);
        bool matched = false;
        for (size_t len = limit; len >= 1; --len) {
            std::string_view candidate = word.substr(pos, len);
            auto it = std::lower_bound(
                pieces_.begin(), pieces_.end(), candidate,
                [](const std::string& a, std::string_view b) { return std::string_view(a) < b; });
            if (it != pieces_.end() && *it == candidate) {
                out.emplace_back(candidate);
                pos += len;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (!options_.byte_fallback) return {options_.unk};
        out.push_back(byte_piece(static_cast<unsigned char>(word[pos])));
        ++pos;
    }
    return out;
}

TokEvalReport evaluate_tokenizer(const std::vector<std::string>& words,
                                 const TokenizerAdapter& tok) {
    if (words.empty()) throw std::invalid_argument("empty word list");

    TokEvalReport report;
    report.tokenizer = std::string(tok.name());
    report.vocab_size = tok.vocab_size();
    report.word_count = static_cast<int64_t>(words.size());
    std::string_view unk = tok.unk_piece();

    for (const std::string& word : words) {
        std::vector<std::string> pieces = tok.tokenize(word);
        report.token_count += static_cast<int64_t>(pieces.size());
        bool any_unk = false;
        bool all_unk = !pieces.empty();
        for (const std::string& piece : pieces) {
            if (piece == unk)
                any_unk = true;
            else
                all_unk = false;
        }
        if (any_unk) ++report.unk_words;
        if (pieces.size() >= 2 && !all_unk) ++report.split_words;
    }
    return report;
}

TokEvalReport evaluate_text(std::string_view text, const TokenizerAdapter& tok) {
    std::vector<std::string> words;
    for (std::string_view word : split_words(text)) words.emplace_back(word);
    return evaluate_tokenizer(words, tok);
}

void sort_reports(std::vector<TokEvalReport>& reports) {
    std::stable_sort(reports.begin(), reports.end(),
                     [](const TokEvalReport& a, const TokEvalReport& b) {
                         auto lhs = static_cast<__int128>(a.token_count) * b.word_count;
                         auto rhs = static_cast<__int128>(b.token_count) * a.word_count;
                         if (lhs != rhs) return lhs < rhs;
                         if (a.token_count != b.token_count)
                             return a.token_count < b.token_count;
                         return a.tokenizer < b.tokenizer;
                     });
}

std::vector<TokEvalReport> compare_tokenizers(
    const std::vector<std::string>& words,
    const std::vector<const TokenizerAdapter*>& adapters, size_t threads) {
    if (adapters.empty()) throw std::invalid_argument("no tokenizer adapters given");
    if (threads == 0) threads = default_thread_count();

    std::vector<TokEvalReport> reports = parallel_map(
        adapters,
        [&words](const TokenizerAdapter* tok) { return evaluate_tokenizer(words, *tok); },
        threads);
    sort_reports(reports);
    return reports;
}

nlohmann::json report_to_json(const TokEvalReport& report) {
    char fert[32];
    char pcw[32];
    std::snprintf(fert, sizeof(fert), "%.2f", report.fertility());
    std::snprintf(pcw, sizeof(pcw), "%.2f", report.pcw());
    return {
        {"tokenizer", report.tokenizer},
        {"vocab_size", report.vocab_size},
        {"word_count", report.word_count},
        {"token_count", report.token_count},
        {"split_words", report.split_words},
        {"unk_words", report.unk_words},
        {"fertility", report.fertility()},
        {"pcw", report.pcw()},
        {"fertility_display", fert},
        {"pcw_display", pcw},
    };
}

std::string comparison_table(const std::vector<TokEvalReport>& reports) {
    int64_t words = reports.empty() ? 0 : reports.front().word_count;
    std::vector<std::string> headers = {
        "Tokenizer", "Tokens (" + std::to_string(words) + " words)",
        "Vocab Size", "Fertility", "PCW", "UNK"};

    std::vector<std::vector<std::string>> rows;
    for (const TokEvalReport& report : reports) {
        char fert[32];
        char pcw[32];
        std::snprintf(fert, sizeof(fert), "%.2f", report.fertility());
        std::snprintf(pcw, sizeof(pcw), "%.2f", report.pcw());
        rows.push_back({report.tokenizer, std::to_string(report.token_count),
                        std::to_string(report.vocab_size), fert, pcw,
                        std::to_string(report.unk_words)});
    }

    std::vector<size_t> widths(headers.size());
    for (size_t c = 0; c < headers.size(); ++c) {
        widths[c] = headers[c].size();
        for (const auto& row : rows) widths[c] = std::max(widths[c], row[c].size());
    }

    auto emit_row = [&](const std::vector<std::string>& cells, std::string& out) {
        for (size_t c = 0; c < cells.size(); ++c) {
            if (c > 0) out += "  ";
            if (c == 0) {
                out += cells[c];
                out.append(widths[c] - cells[c].size(), ' ');
            } else {
                out.append(widths[c] - cells[c].size(), ' ');
                out += cells[c];
            }
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    };

    std::string out;
    emit_row(headers, out);
    std::vector<std::string> dashes;
    for (size_t w : widths) dashes.emplace_back(w, '-');
    emit_row(dashes, out);
    for (const auto& row : rows) emit_row(row, out);
    return out;
}

std::vector<std::string> load_word_list(const std::string& path) {
    return read_lines(path, "word list");
}

std::vector<std::string> load_vocab_file(const std::string& path) {
    return read_lines(path, "vocab file");
}

std::optional<std::string> reconstruct_pieces(const std::vector<std::string>& pieces,
                                              std::string_view unk) {
    std::string out;
    for (const std::string& piece : pieces) {
        if (piece == unk) return std::nullopt;
        unsigned char byte = 0;
        if (is_byte_piece(piece, byte))
            out.push_back(static_cast<char>(byte));
        else
            out += piece;
    }
    return out;
}

}  // namespace corpuskit
