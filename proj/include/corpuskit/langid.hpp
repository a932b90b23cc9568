#pragma once

#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace corpuskit {

struct LangPrediction {
    std::string lang;
    double confidence = 0.0;  // in [0,1]; sums to <= 1 across the label set
};

// Deterministic text classifier interface. Implementations return one
// prediction per known label, sorted by descending confidence (ties broken
// by label code so ordering is stable).
class LangIdModel {
public:
    virtual ~LangIdModel() = default;
    virtual std::vector<LangPrediction> classify(std::string_view text) const = 0;
    virtual std::string name() const = 0;
};

// Self-contained reference identifier: per-language character-trigram
// frequency profiles compared by cosine similarity, similarities normalized
// so confidences sum to 1. Production runs wrap external identifiers in
// LangIdModel instead; this exists so the cascade is testable end to end.
class TrigramLangId : public LangIdModel {
public:
    // Throws std::runtime_error("degenerate_model") when samples cover
    // fewer than two languages.
    static TrigramLangId train(const std::vector<std::pair<std::string, std::string>>& samples,
                               std::string model_name = "trigram");

    std::vector<LangPrediction> classify(std::string_view text) const override;
    std::string name() const override { return name_; }

    const std::vector<std::string>& languages() const { return languages_; }

private:
    TrigramLangId() = default;

    std::string name_;
    std::vector<std::string> languages_;
    // One L2-normalized trigram frequency profile per language, indexed
    // parallel to languages_.
    std::vector<std::unordered_map<std::string, double>> profiles_;
};

// Replays the outputs of an external classifier that was run offline: each
// record maps an exact document text to its prediction list. Texts without
// a recorded entry classify to nothing and fall out of the cascade.
class RecordedLangId : public LangIdModel {
public:
    // JSONL with {"text": ..., "predictions": [{"lang": ..., "conf": ...}]}
    // per line. Throws std::runtime_error on unreadable files or malformed
    // rows, with the line number in the message.
    static RecordedLangId load(const std::string& path);

    void add(std::string text, std::vector<LangPrediction> predictions);

    std::vector<LangPrediction> classify(std::string_view text) const override;
    std::string name() const override { return "recorded"; }

    size_t size() const { return recorded_.size(); }

private:
    std::map<std::string, std::vector<LangPrediction>, std::less<>> recorded_;
};

}  // namespace corpuskit
