#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace corpuskit {

enum class Stage {
    url_blocklist,
    langid1,
    langid2,
    heuristic,
    dedup,
    min_length,
    toxicity_gate,
};

enum class Decision { keep, drop };

std::string_view stage_name(Stage s);
Stage parse_stage(std::string_view name);
std::string_view decision_name(Decision d);
Decision parse_decision(std::string_view name);

struct FilterVerdict {
    Stage stage = Stage::url_blocklist;
    Decision decision = Decision::keep;
    std::string reason;
    std::optional<double> metric;

    static FilterVerdict keep(Stage stage, std::string reason = "",
                              std::optional<double> metric = std::nullopt);
    static FilterVerdict drop(Stage stage, std::string reason,
                              std::optional<double> metric = std::nullopt);
};

struct DocumentRecord {
    std::string id;
    std::string text;
    std::optional<std::string> url;
    std::string source;
    std::optional<std::string> lang;
    std::optional<double> lang_conf_stage1;
    std::optional<double> lang_conf_stage2;
    std::optional<int> edu_score;
    std::optional<int> toxicity_score;
    std::optional<int64_t> token_count;
    std::vector<FilterVerdict> verdicts;
    // Unknown input fields, preserved verbatim on write.
    nlohmann::json extra = nlohmann::json::object();

    bool dropped() const;
    // Throws std::invalid_argument when a field is out of its legal range
    // or a drop verdict has an empty reason.
    void validate() const;
};

nlohmann::json verdict_to_json(const FilterVerdict& v);
FilterVerdict verdict_from_json(const nlohmann::json& j);

nlohmann::json document_to_json(const DocumentRecord& doc);
DocumentRecord document_from_json(const nlohmann::json& j);

}  // namespace corpuskit
