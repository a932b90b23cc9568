#include "corpuskit/corpus_io.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace corpuskit {

JsonlReader::JsonlReader(const std::string& path, MalformedLinePolicy policy)
    : in_(path, std::ios::binary), path_(path), policy_(policy) {
    if (!in_) throw std::runtime_error("cannot open " + path);
}

std::optional<DocumentRecord> JsonlReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            return document_from_json(nlohmann::json::parse(line));
        } catch (const std::exception& e) {
            if (policy_ == MalformedLinePolicy::abort) {
                throw std::runtime_error(path_ + ":" + std::to_string(line_) + ": " + e.what());
            }
            errors_.push_back({line_, e.what()});
        }
    }
    return std::nullopt;
}

std::vector<DocumentRecord> JsonlReader::read_all() {
    std::vector<DocumentRecord> docs;
    while (auto doc = next()) docs.push_back(std::move(*doc));
    return docs;
}

JsonlWriter::JsonlWriter(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
}

void JsonlWriter::write(const DocumentRecord& doc) { write_json(document_to_json(doc)); }

void JsonlWriter::write_json(const nlohmann::json& j) {
    out_ << j.dump() << '\n';
    if (!out_) throw std::runtime_error("write failed: " + path_);
    ++written_;
}

void corpus_stats_accumulate(CorpusStats& stats, const DocumentRecord& doc) {
    bool excluded = doc.toxicity_score && *doc.toxicity_score >= 4;
    SubsetStats& subset = excluded ? stats.excluded_subset : stats.default_subset;
    subset.documents += 1;
    subset.bytes += doc.text.size();
    stats.total.documents += 1;
    stats.total.bytes += doc.text.size();
    if (doc.token_count) {
        subset.tokens += static_cast<uint64_t>(*doc.token_count);
        stats.total.tokens += static_cast<uint64_t>(*doc.token_count);
    } else {
        stats.tokens_complete = false;
    }
}

CorpusStats corpus_stats(const std::vector<DocumentRecord>& docs) {
    CorpusStats stats;
    for (const auto& doc : docs) corpus_stats_accumulate(stats, doc);
    return stats;
}

std::string with_thousands(uint64_t value) {
    std::string digits = std::to_string(value);
    std::string out;
    out.reserve(digits.size() + digits.size() / 3);
    size_t lead = digits.size() % 3;
    if (lead == 0) lead = 3;
    for (size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (i - lead) % 3 == 0 && i >= lead) out.push_back(',');
        out.push_back(digits[i]);
    }
    return out;
}

namespace {

std::string gb_string(uint64_t bytes) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", static_cast<double>(bytes) / 1e9);
    return buf;
}

nlohmann::json subset_to_json(const SubsetStats& s, bool tokens_complete) {
    nlohmann::json j{
        {"documents", s.documents},
        {"bytes", s.bytes},
        {"size_gb", static_cast<double>(s.bytes) / 1e9},
    };
    if (tokens_complete) {
        j["tokens"] = s.tokens;
    } else {
        j["tokens"] = nullptr;
    }
    return j;
}

}  // namespace

nlohmann::json stats_to_json(const CorpusStats& stats) {
    return nlohmann::json{
        {"subsets",
         {{"default", subset_to_json(stats.default_subset, stats.tokens_complete)},
          {"excluded", subset_to_json(stats.excluded_subset, stats.tokens_complete)}}},
        {"total", subset_to_json(stats.total, stats.tokens_complete)},
        {"tokens_complete", stats.tokens_complete},
    };
}

std::string stats_table(const CorpusStats& stats) {
    struct Row {
        std::string label, documents, size_gb, tokens;
    };
    auto make_row = [&](const std::string& label, const SubsetStats& s) {
        return Row{label, with_thousands(s.documents), gb_string(s.bytes),
                   stats.tokens_complete ? with_thousands(s.tokens) : std::string("-")};
    };
    std::vector<Row> rows = {
        {"Subset", "Documents", "Raw UTF-8 (GB)", "Tokens"},
        make_row("default", stats.default_subset),
        make_row("excluded", stats.excluded_subset),
        make_row("Total", stats.total),
    };
    size_t w0 = 0, w1 = 0, w2 = 0, w3 = 0;
    for (const auto& r : rows) {
        w0 = std::max(w0, r.label.size());
        w1 = std::max(w1, r.documents.size());
        w2 = std::max(w2, r.size_gb.size());
        w3 = std::max(w3, r.tokens.size());
    }
    std::string out;
    auto pad_left = [](const std::string& s, size_t w) {
        return std::string(w - s.size(), ' ') + s;
    };
    auto pad_right = [](const std::string& s, size_t w) {
        return s + std::string(w - s.size(), ' ');
    };
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out += pad_right(r.label, w0) + "  " + pad_left(r.documents, w1) + "  " +
               pad_left(r.size_gb, w2) + "  " + pad_left(r.tokens, w3) + "\n";
        if (i == 0) {
            out += std::string(w0 + w1 + w2 + w3 + 6, '-') + "\n";
        }
    }
    return out;
}

}  // namespace corpuskit
