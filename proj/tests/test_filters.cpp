#include <doctest.h>

#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "corpuskit/filters.hpp"

using namespace corpuskit;

namespace {

DocumentRecord doc_with(std::string id, std::string text) {
    DocumentRecord d;
    d.id = std::move(id);
    d.text = std::move(text);
    d.source = "unit";
    return d;
}

// Controllable stand-in for external identifiers.
class FixedLangId : public LangIdModel {
public:
    FixedLangId(std::vector<LangPrediction> preds, std::string model_name = "fixed")
        : preds_(std::move(preds)), name_(std::move(model_name)) {
        std::sort(preds_.begin(), preds_.end(),
                  [](const LangPrediction& a, const LangPrediction& b) {
                      if (a.confidence != b.confidence) return a.confidence > b.confidence;
                      return a.lang < b.lang;
                  });
    }

    std::vector<LangPrediction> classify(std::string_view) const override { return preds_; }
    std::string name() const override { return name_; }

private:
    std::vector<LangPrediction> preds_;
    std::string name_;
};

class ThrowingLangId : public LangIdModel {
public:
    std::vector<LangPrediction> classify(std::string_view) const override {
        throw std::runtime_error("backend unavailable");
    }
    std::string name() const override { return "throwing"; }
};

}  // namespace

TEST_CASE("extract_host parses common url shapes") {
    CHECK(extract_host("https://Example.COM/path?q=1") == "example.com");
    CHECK(extract_host("http://sub.example.com:8080/") == "sub.example.com");
    CHECK(extract_host("https://user:pw@host.org/x") == "host.org");
    CHECK(extract_host("example.com/path") == "example.com");
    CHECK(extract_host("ftp://files.example.net") == "files.example.net");
    CHECK_FALSE(extract_host("not a url with spaces").has_value());
    CHECK_FALSE(extract_host("").has_value());
    CHECK_FALSE(extract_host("://missing-scheme.com").has_value());
}

TEST_CASE("blocklist suffix matching covers subdomains only") {
    Blocklist list;
    list.add("example.com");
    list.add("Spam.ORG");
    CHECK(list.matches_host("example.com"));
    CHECK(list.matches_host("bad.example.com"));
    CHECK(list.matches_host("a.b.example.com"));
    CHECK(list.matches_host("EXAMPLE.COM"));
    CHECK(list.matches_host("spam.org"));
    CHECK_FALSE(list.matches_host("example.org"));
    CHECK_FALSE(list.matches_host("notexample.com"));
    CHECK_FALSE(list.matches_host("example.com.evil.net"));
}

TEST_CASE("url_blocklist_filter keeps absent and unparsable urls") {
    Blocklist list;
    list.add("example.com");

    auto keep_no_url = url_blocklist_filter(doc_with("a", "text"), list);
    CHECK(keep_no_url.decision == Decision::keep);

    auto d = doc_with("b", "text");
    d.url = "https://bad.example.com/page";
    auto dropped = url_blocklist_filter(d, list);
    CHECK(dropped.decision == Decision::drop);
    CHECK(dropped.stage == Stage::url_blocklist);

    d.url = "https://example.org/fine";
    CHECK(url_blocklist_filter(d, list).decision == Decision::keep);

    d.url = "definitely not a url!!";
    auto unparsable = url_blocklist_filter(d, list);
    CHECK(unparsable.decision == Decision::keep);
    CHECK(unparsable.reason == "url_unparsable");
}

TEST_CASE("langid cascade thresholds are inclusive and short-circuit") {
    FixedLangId coarse_below({{"hi", 0.68}, {"en", 0.30}});
    FixedLangId at_threshold({{"hi", 0.69}, {"en", 0.29}});
    FixedLangId confident({{"hi", 0.95}});
    FixedLangId wrong_lang({{"en", 0.95}, {"hi", 0.03}});

    SUBCASE("coarse below threshold drops at the first stage") {
        auto d = doc_with("a", "text");
        auto v = langid_cascade(d, coarse_below, confident, "hi");
        CHECK(v.decision == Decision::drop);
        CHECK(v.stage == Stage::langid1);
        CHECK(v.reason == "low_confidence");
        CHECK(d.lang_conf_stage1 == doctest::Approx(0.68));
        CHECK_FALSE(d.lang_conf_stage2.has_value());
        REQUIRE(d.verdicts.size() == 1);  // no stage-2 verdict after a drop
    }

    SUBCASE("boundary 0.69 on both models keeps") {
        auto d = doc_with("b", "text");
        auto v = langid_cascade(d, at_threshold, at_threshold, "hi");
        CHECK(v.decision == Decision::keep);
        CHECK(d.lang == "hi");
        CHECK(d.lang_conf_stage1 == doctest::Approx(0.69));
        CHECK(d.lang_conf_stage2 == doctest::Approx(0.69));
        REQUIRE(d.verdicts.size() == 2);
        CHECK(d.verdicts[0].stage == Stage::langid1);
        CHECK(d.verdicts[1].stage == Stage::langid2);
    }

    SUBCASE("wrong top language drops regardless of confidence") {
        auto d = doc_with("c", "text");
        auto v = langid_cascade(d, wrong_lang, confident, "hi");
        CHECK(v.decision == Decision::drop);
        CHECK(v.reason == "not_target_language");
    }

    SUBCASE("precise model rejection drops at the second stage") {
        auto d = doc_with("d", "text");
        auto v = langid_cascade(d, confident, coarse_below, "hi");
        CHECK(v.decision == Decision::drop);
        CHECK(v.stage == Stage::langid2);
        REQUIRE(d.verdicts.size() == 2);
        CHECK(d.verdicts[0].decision == Decision::keep);
    }

    SUBCASE("model failure maps to langid_error") {
        ThrowingLangId broken;
        auto d = doc_with("e", "text");
        auto v = langid_cascade(d, broken, confident, "hi");
        CHECK(v.decision == Decision::drop);
        CHECK(v.reason == "langid_error");
    }
}

TEST_CASE("raising the langid threshold never converts a drop into a keep") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        double hi1 = unif(rng), hi2 = unif(rng);
        FixedLangId coarse({{"hi", hi1}, {"en", 1.0 - hi1}});
        FixedLangId precise({{"hi", hi2}, {"en", 1.0 - hi2}});
        double t_low = unif(rng) * 0.5;
        double t_high = t_low + unif(rng) * 0.5;

        auto d_low = doc_with("p", "text");
        auto d_high = doc_with("p", "text");
        bool keep_low =
            langid_cascade(d_low, coarse, precise, "hi", t_low).decision == Decision::keep;
        bool keep_high =
            langid_cascade(d_high, coarse, precise, "hi", t_high).decision == Decision::keep;
        if (keep_high) CHECK(keep_low);
    }
}

TEST_CASE("heuristic filter applies rules in fixed order") {
    HeuristicConfig cfg;  // documented defaults

    SUBCASE("too few words fires before any other rule") {
        auto outcome = heuristic_filter(doc_with("a", "word"), cfg);
        CHECK(outcome.verdict.decision == Decision::drop);
        CHECK(outcome.verdict.reason == "too_few_words");
        CHECK(outcome.metrics.at("word_count") == 1.0);
    }

    SUBCASE("repeated lines fire line_dup with the 1 - unique/total metric") {
        std::string line = "यह एक ही वाक्य बार बार आता है।\n";
        std::string text;
        for (int i = 0; i < 10; ++i) text += line;
        auto outcome = heuristic_filter(doc_with("b", text), cfg);
        CHECK(outcome.verdict.reason == "line_dup");
        CHECK(outcome.verdict.metric == doctest::Approx(0.9));
        CHECK(outcome.metrics.at("line_dup_fraction") == doctest::Approx(1.0 - 1.0 / 10.0));
    }

    SUBCASE("char n-gram repetition catches copy-paste loops") {
        // Distinct lines, enough words, but one 40-char phrase repeated
        // drives 10-gram repetition far above 0.20.
        std::string phrase = "बिलकुल वही दोहराया हुआ अंश है";
        std::string text;
        for (int i = 0; i < 12; ++i) text += phrase + " ";
        auto outcome = heuristic_filter(doc_with("c", text), cfg);
        CHECK(outcome.verdict.decision == Decision::drop);
        CHECK(outcome.verdict.reason == "char_ngram_repetition");
        CHECK(outcome.metrics.at("char_ngram_repetition") > 0.2);
    }

    SUBCASE("missing stopwords fire low_stopword_fraction") {
        auto outcome = heuristic_filter(
            doc_with("d", "alpha beta gamma delta epsilon zeta eta theta iota kappa lambdaa mu."),
            cfg);
        CHECK(outcome.verdict.reason == "low_stopword_fraction");
        CHECK(outcome.metrics.at("stopword_fraction") == 0.0);
    }

    SUBCASE("overlong words fire word_length_out_of_range") {
        // One stopword keeps the stopword rule satisfied; the other 19
        // words are distinct random 16-char strings (distinct so the
        // n-gram rule stays quiet), pushing the mean length over 12.
        std::mt19937_64 rng(3);
        std::string text = "का ";
        for (int i = 0; i < 19; ++i) {
            for (int c = 0; c < 16; ++c) text += static_cast<char>('a' + rng() % 26);
            text += ' ';
        }
        auto outcome = heuristic_filter(doc_with("e", text), cfg);
        CHECK(outcome.verdict.reason == "word_length_out_of_range");
        CHECK(outcome.metrics.at("mean_word_length") > 12.0);
        CHECK(outcome.metrics.at("char_ngram_repetition") < 0.2);
    }

    SUBCASE("missing sentence punctuation fires low_terminal_punct") {
        std::string text = "का one two three four five six seven eight nine";
        auto outcome = heuristic_filter(doc_with("f", text), cfg);
        CHECK(outcome.verdict.reason == "low_terminal_punct");
        CHECK(outcome.metrics.at("terminal_punct_line_fraction") == 0.0);
    }

    SUBCASE("well-formed hindi paragraph passes every rule") {
        std::string text =
            "भारत एक विशाल देश है और यहाँ अनेक भाषाएँ बोली जाती हैं।\n"
            "हिन्दी भाषा का साहित्य बहुत समृद्ध माना जाता है।\n"
            "विद्यालय में बच्चे विज्ञान गणित और इतिहास पढ़ते हैं।\n"
            "लेखक ने अपने जीवन के अनुभव इस पुस्तक में लिखे हैं।\n";
        auto outcome = heuristic_filter(doc_with("g", text), cfg);
        CHECK(outcome.verdict.decision == Decision::keep);
        // Independent spot checks of the recorded metrics (word and line
        // counts tallied by hand on the fixture).
        CHECK(outcome.metrics.at("word_count") == 41.0);
        CHECK(outcome.metrics.at("line_dup_fraction") == 0.0);
        CHECK(outcome.metrics.at("terminal_punct_line_fraction") == doctest::Approx(1.0));
        CHECK(outcome.metrics.at("stopword_fraction") >= 0.15);
        CHECK(outcome.metrics.at("mean_word_length") > 2.0);
        CHECK(outcome.metrics.at("mean_word_length") < 12.0);
    }
}

TEST_CASE("heuristic filter is pure and deterministic") {
    HeuristicConfig cfg;
    auto d = doc_with("p", "का one two three four five six seven eight nine ten.\n");
    auto first = heuristic_filter(d, cfg);
    auto second = heuristic_filter(d, cfg);
    CHECK(first.verdict.decision == second.verdict.decision);
    CHECK(first.verdict.reason == second.verdict.reason);
    CHECK(first.metrics == second.metrics);
}

TEST_CASE("heuristic config validation and toml loading") {
    HeuristicConfig bad;
    bad.max_line_dup_fraction = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    HeuristicConfig inverted;
    inverted.mean_word_len_lo = 12;
    inverted.mean_word_len_hi = 2;
    CHECK_THROWS_AS(inverted.validate(), std::invalid_argument);

    auto root = toml::parse(R"(
[heuristics]
min_words = 5
max_line_dup_fraction = 0.5
max_char_ngram_repetition = 0.25
min_stopword_fraction = 0.02
mean_word_len_range = [1.5, 20.0]
min_terminal_punct_line_fraction = 0.0
stopword_list = ["foo", "bar"]
)");
    auto cfg = HeuristicConfig::from_toml(root);
    CHECK(cfg.min_words == 5);
    CHECK(cfg.max_line_dup_fraction == doctest::Approx(0.5));
    CHECK(cfg.max_char_ngram_repetition == doctest::Approx(0.25));
    CHECK(cfg.mean_word_len_lo == doctest::Approx(1.5));
    CHECK(cfg.mean_word_len_hi == doctest::Approx(20.0));
    CHECK(cfg.stopword_list.count("foo") == 1);

    // Defaults apply when the table is absent.
    auto defaults = HeuristicConfig::from_toml(toml::parse(""));
    CHECK(defaults.min_words == 10);
    CHECK(defaults.max_char_ngram_repetition == doctest::Approx(0.20));
}

TEST_CASE("bundled stopword file matches the embedded default list") {
    auto from_file =
        load_stopwords_file(std::string(CORPUSKIT_SOURCE_DIR) + "/data/hindi_stopwords.txt");
    CHECK(from_file == default_hindi_stopwords());
}

TEST_CASE("final gates order length before toxicity") {
    SUBCASE("token_count 49 drops") {
        auto d = doc_with("a", "t");
        d.token_count = 49;
        d.toxicity_score = 1;
        CHECK(final_gates(d) == GateOutcome::dropped);
        REQUIRE(d.verdicts.size() == 1);
        CHECK(d.verdicts[0].stage == Stage::min_length);
        CHECK(d.verdicts[0].reason == "below_min_tokens");
    }

    SUBCASE("token_count 50 with toxicity 4 is excluded, not dropped") {
        auto d = doc_with("b", "t");
        d.token_count = 50;
        d.toxicity_score = 4;
        CHECK(final_gates(d) == GateOutcome::excluded);
        REQUIRE(d.verdicts.size() == 2);
        CHECK(d.verdicts[1].stage == Stage::toxicity_gate);
        CHECK(d.verdicts[1].decision == Decision::keep);
    }

    SUBCASE("token_count 50 with toxicity 3 lands in the default subset") {
        auto d = doc_with("c", "t");
        d.token_count = 50;
        d.toxicity_score = 3;
        CHECK(final_gates(d) == GateOutcome::default_subset);
    }

    SUBCASE("short and toxic prefers the length drop") {
        auto d = doc_with("d", "t");
        d.token_count = 10;
        d.toxicity_score = 5;
        CHECK(final_gates(d) == GateOutcome::dropped);
    }

    SUBCASE("missing annotations raise unannotated_document") {
        auto d = doc_with("e", "t");
        d.token_count = 60;
        try {
            final_gates(d);
            FAIL("expected unannotated_document");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("unannotated_document") != std::string::npos);
        }
    }
}

TEST_CASE("final gates partition annotated documents exhaustively") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        auto d = doc_with("p", "t");
        d.token_count = static_cast<int64_t>(rng() % 120);
        d.toxicity_score = 1 + static_cast<int>(rng() % 5);
        auto outcome = final_gates(d);
        int matched = 0;
        if (outcome == GateOutcome::dropped) ++matched;
        if (outcome == GateOutcome::excluded) ++matched;
        if (outcome == GateOutcome::default_subset) ++matched;
        CHECK(matched == 1);
        if (*d.token_count < 50) {
            CHECK(outcome == GateOutcome::dropped);
        } else if (*d.toxicity_score >= 4) {
            CHECK(outcome == GateOutcome::excluded);
        } else {
            CHECK(outcome == GateOutcome::default_subset);
        }
    }
}

TEST_CASE("pipeline stops at the first dropping stage") {
    Blocklist list;
    list.add("blocked.com");
    FixedLangId always_hi({{"hi", 0.95}});
    HeuristicConfig heuristics;

    PipelineConfig cfg;
    cfg.blocklist = &list;
    cfg.coarse = &always_hi;
    cfg.precise = &always_hi;
    cfg.heuristics = heuristics;

    auto d = doc_with("a", "tiny");
    d.url = "https://blocked.com/x";
    CHECK(run_pipeline_stages(d, cfg) == GateOutcome::dropped);
    REQUIRE(d.verdicts.size() == 1);
    CHECK(d.verdicts[0].stage == Stage::url_blocklist);

    auto good = doc_with("b",
                         "भारत एक विशाल देश है और यहाँ अनेक भाषाएँ बोली जाती हैं।\n"
                         "हिन्दी भाषा का साहित्य बहुत समृद्ध माना जाता है।\n");
    good.url = "https://fine.org/x";
    CHECK(run_pipeline_stages(good, cfg) == GateOutcome::default_subset);
    CHECK(good.verdicts.size() == 4);  // blocklist + langid1 + langid2 + heuristic
    CHECK(good.extra.contains("heuristic_metrics"));
    CHECK_FALSE(good.dropped());
}
