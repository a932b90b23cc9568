#include "corpuskit/filters.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "corpuskit/textutil.hpp"

namespace corpuskit {

namespace {

// Common Hindi function words; mirrored in data/hindi_stopwords.txt.
const char* kHindiStopwords[] = {
    "का", "के", "की", "को", "में", "से", "पर", "है", "हैं", "था", "थी", "थे",
    "और", "या", "एक", "यह", "वह", "ये", "वे", "ने", "हो", "होता", "होती", "होते",
    "कर", "करना", "किया", "गया", "गई", "गए", "नहीं", "भी", "तो", "ही", "अब", "जब",
    "तब", "कि", "जो", "इस", "उस", "लिए", "साथ", "बाद", "तक", "कुछ", "सब", "हम",
    "आप", "मैं", "तुम", "कहा", "अपने", "हुआ", "हुई", "हुए", "रहा", "रही", "रहे",
    "सकता", "सकते", "वाले", "द्वारा", "इसके", "उसके",
};

void check_fraction(double v, const char* field) {
    if (v < 0.0 || v > 1.0) {
        throw std::invalid_argument(std::string(field) + " must be in [0,1], got " +
                                    std::to_string(v));
    }
}

std::string trimmed(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

bool plausible_host(std::string_view host) {
    if (host.empty() || host.size() > 253) return false;
    for (char c : host) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
        if (!ok) return false;
    }
    return host.front() != '.' && host.back() != '.';
}

}  // namespace

void HeuristicConfig::validate() const {
    check_fraction(max_line_dup_fraction, "max_line_dup_fraction");
    check_fraction(max_char_ngram_repetition, "max_char_ngram_repetition");
    check_fraction(min_stopword_fraction, "min_stopword_fraction");
    check_fraction(min_terminal_punct_line_fraction, "min_terminal_punct_line_fraction");
    if (mean_word_len_lo >= mean_word_len_hi) {
        throw std::invalid_argument("mean_word_len_range lo must be < hi");
    }
    if (char_ngram_size == 0) throw std::invalid_argument("char_ngram_size must be positive");
}

HeuristicConfig HeuristicConfig::from_toml(const toml::Table& root) {
    HeuristicConfig cfg;
    if (!root.has_table("heuristics")) {
        cfg.validate();
        return cfg;
    }
    const auto& t = root.table("heuristics");
    cfg.min_words = static_cast<size_t>(t.get_int("min_words", static_cast<int64_t>(cfg.min_words)));
    cfg.max_line_dup_fraction = t.get_double("max_line_dup_fraction", cfg.max_line_dup_fraction);
    cfg.char_ngram_size =
        static_cast<size_t>(t.get_int("char_ngram_size", static_cast<int64_t>(cfg.char_ngram_size)));
    cfg.max_char_ngram_repetition =
        t.get_double("max_char_ngram_repetition", cfg.max_char_ngram_repetition);
    cfg.min_stopword_fraction = t.get_double("min_stopword_fraction", cfg.min_stopword_fraction);
    if (t.has("mean_word_len_range")) {
        const auto& arr = t.at("mean_word_len_range").as_array();
        if (arr.size() != 2) throw std::invalid_argument("mean_word_len_range needs [lo, hi]");
        cfg.mean_word_len_lo = arr[0].as_double();
        cfg.mean_word_len_hi = arr[1].as_double();
    }
    cfg.min_terminal_punct_line_fraction =
        t.get_double("min_terminal_punct_line_fraction", cfg.min_terminal_punct_line_fraction);
    if (t.has("stopword_list")) {
        for (const auto& v : t.at("stopword_list").as_array()) {
            cfg.stopword_list.insert(v.as_string());
        }
    }
    if (t.has("stopwords_file")) {
        auto loaded = load_stopwords_file(t.get_string("stopwords_file"));
        cfg.stopword_list.insert(loaded.begin(), loaded.end());
    }
    cfg.validate();
    return cfg;
}

const std::set<std::string>& default_hindi_stopwords() {
    static const std::set<std::string> words(std::begin(kHindiStopwords),
                                             std::end(kHindiStopwords));
    return words;
}

std::set<std::string> load_stopwords_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open stopword list " + path);
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        auto word = trimmed(line);
        if (!word.empty() && word[0] != '#') words.insert(word);
    }
    return words;
}

Blocklist Blocklist::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open blocklist " + path);
    Blocklist list;
    std::string line;
    while (std::getline(in, line)) {
        auto entry = trimmed(line);
        if (!entry.empty() && entry[0] != '#') list.add(entry);
    }
    return list;
}

void Blocklist::add(std::string_view domain) {
    domains_.insert(to_lower_ascii(trimmed(domain)));
}

bool Blocklist::matches_host(std::string_view host) const {
    std::string h = to_lower_ascii(host);
    if (domains_.count(h)) return true;
    // Walk up the label chain so "a.b.example.com" hits "example.com".
    size_t pos = 0;
    while ((pos = h.find('.', pos)) != std::string::npos) {
        ++pos;
        if (domains_.count(h.substr(pos))) return true;
    }
    return false;
}

std::optional<std::string> extract_host(std::string_view url) {
    std::string_view rest = url;
    size_t scheme_end = rest.find("://");
    if (scheme_end != std::string_view::npos) {
        std::string_view scheme = rest.substr(0, scheme_end);
        if (scheme.empty() || !std::isalpha(static_cast<unsigned char>(scheme[0]))) {
            return std::nullopt;
        }
        rest = rest.substr(scheme_end + 3);
    }
    size_t path_start = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, path_start);
    size_t at = authority.rfind('@');
    if (at != std::string_view::npos) authority = authority.substr(at + 1);
    size_t colon = authority.find(':');
    if (colon != std::string_view::npos) authority = authority.substr(0, colon);
    std::string host = to_lower_ascii(authority);
    if (!plausible_host(host)) return std::nullopt;
    return host;
}

FilterVerdict url_blocklist_filter(const DocumentRecord& doc, const Blocklist& blocklist) {
    if (!doc.url || doc.url->empty()) {
        return FilterVerdict::keep(Stage::url_blocklist, "no_url");
    }
    auto host = extract_host(*doc.url);
    if (!host) return FilterVerdict::keep(Stage::url_blocklist, "url_unparsable");
    if (blocklist.matches_host(*host)) {
        return FilterVerdict::drop(Stage::url_blocklist, "blocked_domain");
    }
    return FilterVerdict::keep(Stage::url_blocklist);
}

namespace {

struct CascadeStep {
    bool accepted = false;
    double target_confidence = 0.0;
    std::string reason;
};

CascadeStep run_langid_step(const LangIdModel& model, std::string_view text,
                            const std::string& target, double threshold) {
    CascadeStep step;
    auto preds = model.classify(text);
    for (const auto& p : preds) {
        if (p.lang == target) {
            step.target_confidence = p.confidence;
            break;
        }
    }
    if (preds.empty() || preds.front().lang != target) {
        step.reason = "not_target_language";
        return step;
    }
    if (preds.front().confidence < threshold) {
        step.reason = "low_confidence";
        return step;
    }
    step.accepted = true;
    return step;
}

}  // namespace

FilterVerdict langid_cascade(DocumentRecord& doc, const LangIdModel& coarse,
                             const LangIdModel& precise, const std::string& target,
                             double threshold) {
    CascadeStep first;
    try {
        first = run_langid_step(coarse, doc.text, target, threshold);
    } catch (const std::exception&) {
        auto v = FilterVerdict::drop(Stage::langid1, "langid_error");
        doc.verdicts.push_back(v);
        return v;
    }
    doc.lang_conf_stage1 = first.target_confidence;
    if (!first.accepted) {
        auto v = FilterVerdict::drop(Stage::langid1, first.reason, first.target_confidence);
        doc.verdicts.push_back(v);
        return v;
    }
    doc.verdicts.push_back(
        FilterVerdict::keep(Stage::langid1, "", first.target_confidence));

    CascadeStep second;
    try {
        second = run_langid_step(precise, doc.text, target, threshold);
    } catch (const std::exception&) {
        auto v = FilterVerdict::drop(Stage::langid2, "langid_error");
        doc.verdicts.push_back(v);
        return v;
    }
    doc.lang_conf_stage2 = second.target_confidence;
    if (!second.accepted) {
        auto v = FilterVerdict::drop(Stage::langid2, second.reason, second.target_confidence);
        doc.verdicts.push_back(v);
        return v;
    }
    doc.lang = target;
    auto v = FilterVerdict::keep(Stage::langid2, "", second.target_confidence);
    doc.verdicts.push_back(v);
    return v;
}

HeuristicOutcome heuristic_filter(const DocumentRecord& doc, const HeuristicConfig& cfg) {
    cfg.validate();
    const std::set<std::string>& stopwords =
        cfg.stopword_list.empty() ? default_hindi_stopwords() : cfg.stopword_list;

    auto words = split_words(doc.text);
    double word_count = static_cast<double>(words.size());

    std::vector<std::string_view> lines;
    for (auto line : split_lines(doc.text)) {
        if (!trimmed(line).empty()) lines.push_back(line);
    }
    double line_dup_fraction = 0.0;
    if (!lines.empty()) {
        std::unordered_set<std::string> unique_lines;
        for (auto line : lines) unique_lines.insert(trimmed(line));
        line_dup_fraction =
            1.0 - static_cast<double>(unique_lines.size()) / static_cast<double>(lines.size());
    }

    auto grams = char_ngrams(doc.text, cfg.char_ngram_size);
    double ngram_repetition = 0.0;
    if (!grams.empty()) {
        std::unordered_set<std::string> unique_grams(grams.begin(), grams.end());
        ngram_repetition =
            1.0 - static_cast<double>(unique_grams.size()) / static_cast<double>(grams.size());
    }

    double stopword_hits = 0.0;
    double length_sum = 0.0;
    for (auto word : words) {
        if (stopwords.count(std::string(word))) stopword_hits += 1.0;
        length_sum += static_cast<double>(word_length(word));
    }
    double stopword_fraction = words.empty() ? 0.0 : stopword_hits / word_count;
    double mean_word_length = words.empty() ? 0.0 : length_sum / word_count;

    double punct_lines = 0.0;
    for (auto line : lines) {
        if (ends_with_terminal_punct(line)) punct_lines += 1.0;
    }
    double punct_fraction =
        lines.empty() ? 0.0 : punct_lines / static_cast<double>(lines.size());

    HeuristicOutcome out;
    out.metrics = {
        {"word_count", word_count},
        {"line_dup_fraction", line_dup_fraction},
        {"char_ngram_repetition", ngram_repetition},
        {"stopword_fraction", stopword_fraction},
        {"mean_word_length", mean_word_length},
        {"terminal_punct_line_fraction", punct_fraction},
    };

    auto drop = [&](const char* reason, double metric) {
        out.verdict = FilterVerdict::drop(Stage::heuristic, reason, metric);
        return out;
    };
    if (words.size() < cfg.min_words) return drop("too_few_words", word_count);
    if (line_dup_fraction > cfg.max_line_dup_fraction) {
        return drop("line_dup", line_dup_fraction);
    }
    if (ngram_repetition > cfg.max_char_ngram_repetition) {
        return drop("char_ngram_repetition", ngram_repetition);
    }
    if (stopword_fraction < cfg.min_stopword_fraction) {
        return drop("low_stopword_fraction", stopword_fraction);
    }
    if (mean_word_length < cfg.mean_word_len_lo || mean_word_length > cfg.mean_word_len_hi) {
        return drop("word_length_out_of_range", mean_word_length);
    }
    if (punct_fraction < cfg.min_terminal_punct_line_fraction) {
        return drop("low_terminal_punct", punct_fraction);
    }
    out.verdict = FilterVerdict::keep(Stage::heuristic);
    return out;
}

std::string_view gate_outcome_name(GateOutcome g) {
    switch (g) {
        case GateOutcome::default_subset: return "default";
        case GateOutcome::excluded: return "excluded";
        case GateOutcome::dropped: return "dropped";
    }
    return "unknown";
}

GateOutcome final_gates(DocumentRecord& doc, int64_t min_tokens, int toxicity_cutoff) {
    if (!doc.token_count || !doc.toxicity_score) {
        throw std::runtime_error("unannotated_document: " + doc.id);
    }
    if (*doc.token_count < min_tokens) {
        doc.verdicts.push_back(FilterVerdict::drop(Stage::min_length, "below_min_tokens",
                                                   static_cast<double>(*doc.token_count)));
        return GateOutcome::dropped;
    }
    doc.verdicts.push_back(FilterVerdict::keep(Stage::min_length, "",
                                               static_cast<double>(*doc.token_count)));
    if (*doc.toxicity_score >= toxicity_cutoff) {
        doc.verdicts.push_back(FilterVerdict::keep(Stage::toxicity_gate, "excluded_toxicity",
                                                   static_cast<double>(*doc.toxicity_score)));
        return GateOutcome::excluded;
    }
    doc.verdicts.push_back(FilterVerdict::keep(Stage::toxicity_gate, "",
                                               static_cast<double>(*doc.toxicity_score)));
    return GateOutcome::default_subset;
}

GateOutcome run_pipeline_stages(DocumentRecord& doc, const PipelineConfig& cfg) {
    if (cfg.blocklist) {
        auto v = url_blocklist_filter(doc, *cfg.blocklist);
        doc.verdicts.push_back(v);
        if (v.decision == Decision::drop) return GateOutcome::dropped;
    }
    if (cfg.coarse && cfg.precise) {
        auto v = langid_cascade(doc, *cfg.coarse, *cfg.precise, cfg.target_lang,
                                cfg.langid_threshold);
        if (v.decision == Decision::drop) return GateOutcome::dropped;
    }
    if (cfg.heuristics) {
        auto outcome = heuristic_filter(doc, *cfg.heuristics);
        doc.verdicts.push_back(outcome.verdict);
        auto metrics = nlohmann::json::object();
        for (const auto& [k, v] : outcome.metrics) metrics[k] = v;
        doc.extra["heuristic_metrics"] = std::move(metrics);
        if (outcome.verdict.decision == Decision::drop) return GateOutcome::dropped;
    }
    if (cfg.apply_final_gates) {
        return final_gates(doc, cfg.min_tokens, cfg.toxicity_cutoff);
    }
    return GateOutcome::default_subset;
}

}  // namespace corpuskit
