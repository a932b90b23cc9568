#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "corpuskit/document.hpp"

namespace corpuskit {

enum class MalformedLinePolicy { abort, skip };

struct LineError {
    size_t line = 0;
    std::string message;
};

// Streams DocumentRecords from a UTF-8 JSON-lines file. With the skip
// policy, malformed lines are collected in errors() and reading continues;
// with abort, the first malformed line throws std::runtime_error carrying
// the line number.
class JsonlReader {
public:
    JsonlReader(const std::string& path,
                MalformedLinePolicy policy = MalformedLinePolicy::abort);

    // Returns the next record, or nullopt at end of file.
    std::optional<DocumentRecord> next();

    std::vector<DocumentRecord> read_all();

    const std::vector<LineError>& errors() const { return errors_; }
    size_t lines_read() const { return line_; }

private:
    std::ifstream in_;
    std::string path_;
    MalformedLinePolicy policy_;
    size_t line_ = 0;
    std::vector<LineError> errors_;
};

class JsonlWriter {
public:
    explicit JsonlWriter(const std::string& path);

    void write(const DocumentRecord& doc);
    void write_json(const nlohmann::json& j);
    size_t written() const { return written_; }
    void flush() { out_.flush(); }

private:
    std::ofstream out_;
    std::string path_;
    size_t written_ = 0;
};

struct SubsetStats {
    uint64_t documents = 0;
    uint64_t bytes = 0;
    uint64_t tokens = 0;
};

struct CorpusStats {
    SubsetStats default_subset;
    SubsetStats excluded_subset;
    SubsetStats total;
    // False when any record lacked token_count; token totals are then
    // reported as absent rather than as a misleading partial sum.
    bool tokens_complete = true;
};

// Subset assignment: excluded iff toxicity_score >= 4, else default.
CorpusStats corpus_stats(const std::vector<DocumentRecord>& docs);
void corpus_stats_accumulate(CorpusStats& stats, const DocumentRecord& doc);

nlohmann::json stats_to_json(const CorpusStats& stats);

// Aligned three-column table: Documents, Raw UTF-8 (GB), Tokens. Size is
// raw UTF-8 gigabytes (1e9 bytes) of the text fields, not compressed size.
std::string stats_table(const CorpusStats& stats);

// 1,234,567-style digit grouping.
std::string with_thousands(uint64_t value);

}  // namespace corpuskit
