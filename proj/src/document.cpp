#include "corpuskit/document.hpp"

#include <array>
#include <stdexcept>

namespace corpuskit {

namespace {

constexpr std::array<std::string_view, 7> kStageNames = {
    "url_blocklist", "langid1", "langid2", "heuristic",
    "dedup",         "min_length", "toxicity_gate",
};

// Known top-level field names; everything else round-trips through `extra`.
constexpr std::array<std::string_view, 12> kKnownFields = {
    "id",         "text",       "url",
    "source",     "lang",       "lang_conf_stage1",
    "lang_conf_stage2", "edu_score", "toxicity_score",
    "token_count", "verdicts",  "extra",
};

bool is_known_field(std::string_view name) {
    for (auto f : kKnownFields) {
        if (f == name) return true;
    }
    return false;
}

void check_score(const std::optional<int>& score, const char* field) {
    if (score && (*score < 1 || *score > 5)) {
        throw std::invalid_argument(std::string(field) + " must be in 1..5, got " +
                                    std::to_string(*score));
    }
}

void check_conf(const std::optional<double>& conf, const char* field) {
    if (conf && (*conf < 0.0 || *conf > 1.0)) {
        throw std::invalid_argument(std::string(field) + " must be in [0,1], got " +
                                    std::to_string(*conf));
    }
}

}  // namespace

std::string_view stage_name(Stage s) { return kStageNames[static_cast<size_t>(s)]; }

Stage parse_stage(std::string_view name) {
    for (size_t i = 0; i < kStageNames.size(); ++i) {
        if (kStageNames[i] == name) return static_cast<Stage>(i);
    }
    throw std::invalid_argument("unknown stage '" + std::string(name) + "'");
}

std::string_view decision_name(Decision d) { return d == Decision::keep ? "keep" : "drop"; }

Decision parse_decision(std::string_view name) {
    if (name == "keep") return Decision::keep;
    if (name == "drop") return Decision::drop;
    throw std::invalid_argument("unknown decision '" + std::string(name) + "'");
}

FilterVerdict FilterVerdict::keep(Stage stage, std::string reason, std::optional<double> metric) {
    return FilterVerdict{stage, Decision::keep, std::move(reason), metric};
}

FilterVerdict FilterVerdict::drop(Stage stage, std::string reason, std::optional<double> metric) {
    return FilterVerdict{stage, Decision::drop, std::move(reason), metric};
}

bool DocumentRecord::dropped() const {
    for (const auto& v : verdicts) {
        if (v.decision == Decision::drop) return true;
    }
    return false;
}

void DocumentRecord::validate() const {
    if (id.empty()) throw std::invalid_argument("document id must be non-empty");
    check_conf(lang_conf_stage1, "lang_conf_stage1");
    check_conf(lang_conf_stage2, "lang_conf_stage2");
    check_score(edu_score, "edu_score");
    check_score(toxicity_score, "toxicity_score");
    if (token_count && *token_count < 0) {
        throw std::invalid_argument("token_count must be non-negative");
    }
    for (const auto& v : verdicts) {
        if (v.decision == Decision::drop && v.reason.empty()) {
            throw std::invalid_argument("drop verdict at stage '" +
                                        std::string(stage_name(v.stage)) +
                                        "' has empty reason");
        }
    }
}

nlohmann::json verdict_to_json(const FilterVerdict& v) {
    nlohmann::json j{
        {"stage", std::string(stage_name(v.stage))},
        {"decision", std::string(decision_name(v.decision))},
    };
    if (!v.reason.empty()) j["reason"] = v.reason;
    if (v.metric) j["metric"] = *v.metric;
    return j;
}

FilterVerdict verdict_from_json(const nlohmann::json& j) {
    FilterVerdict v;
    v.stage = parse_stage(j.at("stage").get<std::string>());
    v.decision = parse_decision(j.at("decision").get<std::string>());
    if (j.contains("reason")) v.reason = j.at("reason").get<std::string>();
    if (j.contains("metric") && !j.at("metric").is_null()) v.metric = j.at("metric").get<double>();
    return v;
}

nlohmann::json document_to_json(const DocumentRecord& doc) {
    doc.validate();
    nlohmann::json j = nlohmann::json::object();
    j["id"] = doc.id;
    j["text"] = doc.text;
    if (doc.url) j["url"] = *doc.url;
    if (!doc.source.empty()) j["source"] = doc.source;
    if (doc.lang) j["lang"] = *doc.lang;
    if (doc.lang_conf_stage1) j["lang_conf_stage1"] = *doc.lang_conf_stage1;
    if (doc.lang_conf_stage2) j["lang_conf_stage2"] = *doc.lang_conf_stage2;
    if (doc.edu_score) j["edu_score"] = *doc.edu_score;
    if (doc.toxicity_score) j["toxicity_score"] = *doc.toxicity_score;
    if (doc.token_count) j["token_count"] = *doc.token_count;
    if (!doc.verdicts.empty()) {
        auto arr = nlohmann::json::array();
        for (const auto& v : doc.verdicts) arr.push_back(verdict_to_json(v));
        j["verdicts"] = std::move(arr);
    }
    for (const auto& [key, value] : doc.extra.items()) {
        if (!is_known_field(key)) j[key] = value;
    }
    return j;
}

DocumentRecord document_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("document must be a JSON object");
    DocumentRecord doc;
    doc.id = j.at("id").get<std::string>();
    doc.text = j.at("text").get<std::string>();
    if (j.contains("url") && !j.at("url").is_null()) doc.url = j.at("url").get<std::string>();
    if (j.contains("source") && !j.at("source").is_null()) {
        doc.source = j.at("source").get<std::string>();
    }
    if (j.contains("lang") && !j.at("lang").is_null()) doc.lang = j.at("lang").get<std::string>();
    if (j.contains("lang_conf_stage1") && !j.at("lang_conf_stage1").is_null()) {
        doc.lang_conf_stage1 = j.at("lang_conf_stage1").get<double>();
    }
    if (j.contains("lang_conf_stage2") && !j.at("lang_conf_stage2").is_null()) {
        doc.lang_conf_stage2 = j.at("lang_conf_stage2").get<double>();
    }
    if (j.contains("edu_score") && !j.at("edu_score").is_null()) {
        doc.edu_score = j.at("edu_score").get<int>();
    }
    if (j.contains("toxicity_score") && !j.at("toxicity_score").is_null()) {
        doc.toxicity_score = j.at("toxicity_score").get<int>();
    }
    if (j.contains("token_count") && !j.at("token_count").is_null()) {
        doc.token_count = j.at("token_count").get<int64_t>();
    }
    if (j.contains("verdicts")) {
        for (const auto& vj : j.at("verdicts")) doc.verdicts.push_back(verdict_from_json(vj));
    }
    for (const auto& [key, value] : j.items()) {
        if (!is_known_field(key)) doc.extra[key] = value;
    }
    doc.validate();
    return doc;
}

}  // namespace corpuskit
