#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "corpuskit/document.hpp"
#include "corpuskit/langid.hpp"
#include "corpuskit/toml.hpp"

namespace corpuskit {

// Thresholds for the rule-based quality stage. Defaults are documented
// Hindi-oriented values; production runs should load their own and log the
// config hash.
struct HeuristicConfig {
    size_t min_words = 10;
    double max_line_dup_fraction = 0.30;
    size_t char_ngram_size = 10;
    double max_char_ngram_repetition = 0.20;
    double min_stopword_fraction = 0.01;
    std::set<std::string> stopword_list;  // empty -> bundled Hindi list
    double mean_word_len_lo = 2.0;
    double mean_word_len_hi = 12.0;
    double min_terminal_punct_line_fraction = 0.10;

    // Throws std::invalid_argument when fractions leave [0,1] or the word
    // length range is inverted.
    void validate() const;

    // Reads a `[heuristics]` table; missing keys keep defaults. Accepts
    // either an inline `stopword_list` array or a `stopwords_file` path.
    static HeuristicConfig from_toml(const toml::Table& root);
};

const std::set<std::string>& default_hindi_stopwords();

std::set<std::string> load_stopwords_file(const std::string& path);

// Lowercase registrable domains / exact hosts; a host matches when it
// equals an entry or is a subdomain of one.
class Blocklist {
public:
    static Blocklist from_file(const std::string& path);

    void add(std::string_view domain);
    bool matches_host(std::string_view host) const;
    size_t size() const { return domains_.size(); }

private:
    std::set<std::string> domains_;
};

// Host part of a URL, lowercased; nullopt when no plausible host exists.
std::optional<std::string> extract_host(std::string_view url);

FilterVerdict url_blocklist_filter(const DocumentRecord& doc, const Blocklist& blocklist);

// Two-model cascade: keep iff both models put the target language on top
// with confidence >= threshold. The precise model is only consulted when
// the coarse one accepts. Appends one verdict per executed stage and
// records the target-language confidences on the record.
FilterVerdict langid_cascade(DocumentRecord& doc, const LangIdModel& coarse,
                             const LangIdModel& precise, const std::string& target,
                             double threshold = 0.69);

struct HeuristicOutcome {
    FilterVerdict verdict;
    // word_count, line_dup_fraction, char_ngram_repetition,
    // stopword_fraction, mean_word_length, terminal_punct_line_fraction.
    std::map<std::string, double> metrics;
};

// Applies the quality rules in fixed order and reports the first failure:
// min_words -> line dup -> char n-gram repetition -> stopword fraction ->
// mean word length -> terminal punctuation. All metrics are computed even
// when an early rule already failed.
HeuristicOutcome heuristic_filter(const DocumentRecord& doc, const HeuristicConfig& cfg);

enum class GateOutcome { default_subset, excluded, dropped };

std::string_view gate_outcome_name(GateOutcome g);

// Length and toxicity gates over annotated documents: dropped when
// token_count < min_tokens, excluded when toxicity_score >= cutoff, else
// default. Throws std::runtime_error("unannotated_document") when either
// annotation is missing. Appends gate verdicts to the record.
GateOutcome final_gates(DocumentRecord& doc, int64_t min_tokens = 50, int toxicity_cutoff = 4);

struct PipelineConfig {
    const Blocklist* blocklist = nullptr;       // stage skipped when null
    const LangIdModel* coarse = nullptr;        // cascade skipped when null
    const LangIdModel* precise = nullptr;
    std::string target_lang = "hi";
    double langid_threshold = 0.69;
    std::optional<HeuristicConfig> heuristics;  // stage skipped when absent
    bool apply_final_gates = false;
    int64_t min_tokens = 50;
    int toxicity_cutoff = 4;
};

// Runs the configured stages in fixed order on one document, appending
// verdicts as it goes and stopping at the first drop. Heuristic metrics
// land in doc.extra["heuristic_metrics"]. Pure per document, safe to call
// from worker threads.
GateOutcome run_pipeline_stages(DocumentRecord& doc, const PipelineConfig& cfg);

}  // namespace corpuskit
