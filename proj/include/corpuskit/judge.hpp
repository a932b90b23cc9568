#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpuskit/document.hpp"

namespace corpuskit {

enum class JudgeTask { educational, toxicity };

std::string_view judge_task_name(JudgeTask task);

// Scoring rubric templates sent to the judge endpoint. Each contains the
// literal slot `[THE TEXT TO BE EVALUATED]` exactly once and is treated as
// frozen protocol data, `Texto:` label included, so that recorded runs stay
// comparable across versions.
const std::string& judge_prompt_template(JudgeTask task);

inline constexpr std::string_view kPromptSlot = "[THE TEXT TO BE EVALUATED]";

struct RenderedPrompt {
    std::string text;
    // True when the document itself contained the slot marker and was
    // escaped to keep the rendered prompt unambiguous.
    bool marker_escaped = false;
};

// Substitutes the document text into the task template. Throws
// std::invalid_argument on empty text.
RenderedPrompt render_prompt(JudgeTask task, std::string_view doc_text);

// Extracts the first `score`-keyed JSON object from a model response,
// tolerating single quotes, code fences, and surrounding prose. Throws
// std::runtime_error("unparsable") when nothing matches and
// std::runtime_error("out_of_range") when the value leaves 1..5.
int parse_score(std::string_view response);

struct JudgeScore {
    std::string doc_id;
    JudgeTask task = JudgeTask::educational;
    int score = 0;  // in 1..5
    std::string raw_response;
    int attempts = 0;
    bool truncated = false;
};

struct SidecarEntry {
    int edu_score = 0;
    int toxicity_score = 0;
};

// Distilled-classifier outputs keyed by document id.
class ScoreSidecar {
public:
    static ScoreSidecar load(const std::string& path);

    void set(const std::string& id, SidecarEntry entry);
    const std::map<std::string, SidecarEntry>& entries() const { return entries_; }
    size_t size() const { return entries_.size(); }

private:
    std::map<std::string, SidecarEntry> entries_;
};

enum class ConflictMode { error, overwrite, keep };

// Copies sidecar scores onto matching documents; unmatched documents pass
// through untouched. A document that already carries a different score
// raises std::runtime_error("score_conflict") under ConflictMode::error.
// Returns the number of documents annotated.
size_t apply_sidecar(std::vector<DocumentRecord>& docs, const ScoreSidecar& sidecar,
                     ConflictMode mode = ConflictMode::error);

struct JudgeClientConfig {
    std::string endpoint;  // e.g. "http://127.0.0.1:8080"
    std::string path = "/v1/chat/completions";
    std::string model = "judge";
    size_t sample_size = 0;
    uint64_t seed = 0;
    // Maximum total attempts per request, including the first.
    int retries = 3;
    int backoff_initial_ms = 100;
    size_t max_in_flight = 8;
    size_t truncate_chars = 8000;  // codepoints, cut at a boundary
    int timeout_seconds = 30;
};

struct AnnotationRun {
    std::vector<JudgeScore> scores;       // sorted by (doc id, task)
    std::vector<std::string> failed_ids;  // left unannotated, never fabricated
    nlohmann::json manifest;
};

// Draws a seeded uniform sample without replacement, scores each sampled
// document on both tasks against a chat-completion endpoint, and writes
// edu_score / toxicity_score back onto the documents. Requests run with a
// bounded number in flight; transient failures retry with exponential
// backoff; documents that still fail are reported in failed_ids.
AnnotationRun annotate_sample(std::vector<DocumentRecord>& docs, const JudgeClientConfig& cfg);

// Seeded partial Fisher-Yates sample of k indices from [0, n). Explicit
// modulo draws keep the selection identical across platforms.
std::vector<size_t> sample_indices(size_t n, size_t k, uint64_t seed);

}  // namespace corpuskit
