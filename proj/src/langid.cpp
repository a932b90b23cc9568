#include "corpuskit/langid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "corpuskit/textutil.hpp"

namespace corpuskit {

namespace {

std::unordered_map<std::string, double> trigram_profile(std::string_view text) {
    std::unordered_map<std::string, double> counts;
    // Space padding lets single-word texts still produce boundary trigrams.
    std::string padded = " " + normalize_for_shingling(text) + " ";
    for (auto& gram : char_ngrams(padded, 3)) counts[std::move(gram)] += 1.0;
    double norm_sq = 0.0;
    for (const auto& [gram, c] : counts) norm_sq += c * c;
    if (norm_sq > 0.0) {
        double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& [gram, c] : counts) c *= inv;
    }
    return counts;
}

double cosine(const std::unordered_map<std::string, double>& a,
              const std::unordered_map<std::string, double>& b) {
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    double dot = 0.0;
    for (const auto& [gram, w] : small) {
        auto it = large.find(gram);
        if (it != large.end()) dot += w * it->second;
    }
    return dot;
}

}  // namespace

TrigramLangId TrigramLangId::train(
    const std::vector<std::pair<std::string, std::string>>& samples, std::string model_name) {
    std::map<std::string, std::string> concatenated;
    for (const auto& [lang, text] : samples) {
        auto& buf = concatenated[lang];
        buf += text;
        buf += ' ';
    }
    if (concatenated.size() < 2) throw std::runtime_error("degenerate_model");

    TrigramLangId model;
    model.name_ = std::move(model_name);
    for (const auto& [lang, text] : concatenated) {
        model.languages_.push_back(lang);
        model.profiles_.push_back(trigram_profile(text));
    }
    return model;
}

std::vector<LangPrediction> TrigramLangId::classify(std::string_view text) const {
    auto profile = trigram_profile(text);
    std::vector<LangPrediction> preds;
    preds.reserve(languages_.size());
    double total = 0.0;
    for (size_t i = 0; i < languages_.size(); ++i) {
        double sim = profile.empty() ? 0.0 : cosine(profile, profiles_[i]);
        preds.push_back({languages_[i], sim});
        total += sim;
    }
    if (total > 0.0) {
        for (auto& p : preds) p.confidence /= total;
    } else {
        for (auto& p : preds) p.confidence = 0.0;
    }
    std::sort(preds.begin(), preds.end(), [](const LangPrediction& x, const LangPrediction& y) {
        if (x.confidence != y.confidence) return x.confidence > y.confidence;
        return x.lang < y.lang;
    });
    return preds;
}

RecordedLangId RecordedLangId::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open recorded langid file: " + path);

    RecordedLangId model;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                                     e.what());
        }
        if (!j.contains("text") || !j.contains("predictions") ||
            !j["predictions"].is_array()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected text and predictions fields");
        }
        std::vector<LangPrediction> predictions;
        for (const auto& p : j["predictions"]) {
            LangPrediction pred;
            pred.lang = p.at("lang").get<std::string>();
            pred.confidence = p.at("conf").get<double>();
            predictions.push_back(std::move(pred));
        }
        model.add(j["text"].get<std::string>(), std::move(predictions));
    }
    return model;
}

void RecordedLangId::add(std::string text, std::vector<LangPrediction> predictions) {
    std::sort(predictions.begin(), predictions.end(),
              [](const LangPrediction& a, const LangPrediction& b) {
                  if (a.confidence != b.confidence) return a.confidence > b.confidence;
                  return a.lang < b.lang;
              });
    recorded_[std::move(text)] = std::move(predictions);
}

std::vector<LangPrediction> RecordedLangId::classify(std::string_view text) const {
    auto it = recorded_.find(text);
    if (it == recorded_.end()) return {};
    return it->second;
}

}  // namespace corpuskit
