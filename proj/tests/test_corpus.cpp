#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "corpuskit/corpus_io.hpp"
#include "corpuskit/document.hpp"

using namespace corpuskit;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "corpuskit_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

DocumentRecord make_doc(std::string id, std::string text) {
    DocumentRecord d;
    d.id = std::move(id);
    d.text = std::move(text);
    d.source = "unit";
    return d;
}

}  // namespace

TEST_CASE("document json round-trip preserves fields and unknown passthrough") {
    DocumentRecord d = make_doc("doc-1", "some text");
    d.url = "https://example.com/page";
    d.lang = "hi";
    d.lang_conf_stage1 = 0.91;
    d.lang_conf_stage2 = 0.88;
    d.edu_score = 3;
    d.toxicity_score = 1;
    d.token_count = 120;
    d.verdicts.push_back(FilterVerdict::keep(Stage::url_blocklist));
    d.verdicts.push_back(FilterVerdict::drop(Stage::heuristic, "line_dup", 0.9));
    d.extra["crawl_date"] = "2023-11-01";
    d.extra["quality_probs"] = {0.1, 0.9};

    auto j = document_to_json(d);
    auto back = document_from_json(j);

    CHECK(back.id == d.id);
    CHECK(back.text == d.text);
    CHECK(back.url == d.url);
    CHECK(back.lang == d.lang);
    CHECK(back.lang_conf_stage1 == d.lang_conf_stage1);
    CHECK(back.edu_score == d.edu_score);
    CHECK(back.token_count == d.token_count);
    REQUIRE(back.verdicts.size() == 2);
    CHECK(back.verdicts[1].stage == Stage::heuristic);
    CHECK(back.verdicts[1].decision == Decision::drop);
    CHECK(back.verdicts[1].reason == "line_dup");
    CHECK(back.verdicts[1].metric == doctest::Approx(0.9));
    CHECK(back.extra["crawl_date"] == "2023-11-01");
    CHECK(back.extra["quality_probs"][1] == doctest::Approx(0.9));
}

TEST_CASE("document validation rejects out-of-range fields") {
    auto d = make_doc("x", "t");
    d.edu_score = 6;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d.edu_score = 0;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d.edu_score = 5;
    d.lang_conf_stage1 = 1.5;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d.lang_conf_stage1 = 1.0;
    d.verdicts.push_back(FilterVerdict{Stage::dedup, Decision::drop, "", {}});
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d.verdicts.back().reason = "near_duplicate";
    CHECK_NOTHROW(d.validate());
}

TEST_CASE("stage and decision names round-trip") {
    for (auto s : {Stage::url_blocklist, Stage::langid1, Stage::langid2, Stage::heuristic,
                   Stage::dedup, Stage::min_length, Stage::toxicity_gate}) {
        CHECK(parse_stage(stage_name(s)) == s);
    }
    CHECK_THROWS(parse_stage("bogus"));
    CHECK(parse_decision("keep") == Decision::keep);
    CHECK(parse_decision("drop") == Decision::drop);
}

TEST_CASE("jsonl reader yields records in order and empty file yields none") {
    auto path = temp_file("basic.jsonl");
    write_text(path,
               R"({"id":"a","text":"first"})"
               "\n"
               R"({"id":"b","text":"second","token_count":7})"
               "\n"
               R"({"id":"c","text":"third"})"
               "\n");
    JsonlReader reader(path.string());
    auto docs = reader.read_all();
    REQUIRE(docs.size() == 3);
    CHECK(docs[0].id == "a");
    CHECK(docs[1].token_count == 7);
    CHECK(docs[2].id == "c");

    auto empty_path = temp_file("empty.jsonl");
    write_text(empty_path, "");
    JsonlReader empty_reader(empty_path.string());
    CHECK(empty_reader.read_all().empty());
}

TEST_CASE("jsonl malformed line: skip collects error, abort throws with line number") {
    auto path = temp_file("malformed.jsonl");
    write_text(path,
               R"({"id":"a","text":"ok"})"
               "\n"
               "{not json at all\n"
               R"({"id":"c","text":"ok"})"
               "\n");
    JsonlReader skipper(path.string(), MalformedLinePolicy::skip);
    auto docs = skipper.read_all();
    CHECK(docs.size() == 2);
    REQUIRE(skipper.errors().size() == 1);
    CHECK(skipper.errors()[0].line == 2);

    JsonlReader aborter(path.string(), MalformedLinePolicy::abort);
    try {
        aborter.read_all();
        FAIL("expected abort");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
}

TEST_CASE("jsonl writer round-trips through reader") {
    auto path = temp_file("roundtrip.jsonl");
    {
        JsonlWriter writer(path.string());
        auto d = make_doc("w-1", "written text");
        d.toxicity_score = 4;
        writer.write(d);
        writer.write(make_doc("w-2", "second"));
        CHECK(writer.written() == 2);
    }
    JsonlReader reader(path.string());
    auto docs = reader.read_all();
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].id == "w-1");
    CHECK(docs[0].toxicity_score == 4);
}

TEST_CASE("corpus_stats partitions by toxicity and sums exactly") {
    std::vector<DocumentRecord> docs;
    auto add = [&](std::string id, std::string text, int tox, int64_t tokens) {
        auto d = make_doc(std::move(id), std::move(text));
        d.toxicity_score = tox;
        d.token_count = tokens;
        docs.push_back(std::move(d));
    };
    add("a", "aaaa", 2, 10);
    add("b", "bb", 4, 20);
    add("c", "cccccc", 1, 30);
    add("d", "dd", 5, 40);

    auto stats = corpus_stats(docs);
    CHECK(stats.default_subset.documents == 2);
    CHECK(stats.excluded_subset.documents == 2);
    CHECK(stats.total.documents == 4);
    CHECK(stats.default_subset.tokens == 40);
    CHECK(stats.excluded_subset.tokens == 60);
    CHECK(stats.total.tokens == 100);
    CHECK(stats.default_subset.bytes == 10);
    CHECK(stats.excluded_subset.bytes == 4);
    CHECK(stats.total.bytes == 14);
    CHECK(stats.tokens_complete);

    // Totals always equal the sum of the two subsets.
    CHECK(stats.total.documents ==
          stats.default_subset.documents + stats.excluded_subset.documents);
    CHECK(stats.total.bytes == stats.default_subset.bytes + stats.excluded_subset.bytes);
    CHECK(stats.total.tokens == stats.default_subset.tokens + stats.excluded_subset.tokens);
}

TEST_CASE("corpus_stats is order-invariant") {
    std::vector<DocumentRecord> docs;
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        auto d = make_doc("d" + std::to_string(i), std::string(i % 13, 'x'));
        d.toxicity_score = 1 + static_cast<int>(rng() % 5);
        d.token_count = static_cast<int64_t>(rng() % 1000);
        docs.push_back(std::move(d));
    }
    auto before = corpus_stats(docs);
    std::shuffle(docs.begin(), docs.end(), rng);
    auto after = corpus_stats(docs);
    CHECK(before.total.documents == after.total.documents);
    CHECK(before.total.bytes == after.total.bytes);
    CHECK(before.total.tokens == after.total.tokens);
    CHECK(before.default_subset.documents == after.default_subset.documents);
    CHECK(before.excluded_subset.tokens == after.excluded_subset.tokens);
}

TEST_CASE("missing token_count marks tokens incomplete") {
    std::vector<DocumentRecord> docs = {make_doc("a", "x"), make_doc("b", "y")};
    docs[0].token_count = 5;
    auto stats = corpus_stats(docs);
    CHECK_FALSE(stats.tokens_complete);
    auto table = stats_table(stats);
    CHECK(table.find('-') != std::string::npos);
    auto j = stats_to_json(stats);
    CHECK(j["total"]["tokens"].is_null());
}

TEST_CASE("stats table uses digit grouping") {
    CHECK(with_thousands(0) == "0");
    CHECK(with_thousands(999) == "999");
    CHECK(with_thousands(1000) == "1,000");
    CHECK(with_thousands(83081507) == "83,081,507");
    CHECK(with_thousands(1234567890123ULL) == "1,234,567,890,123");

    CorpusStats stats;
    stats.default_subset = {83081507, 260680000000ULL, 42000000000ULL};
    stats.total = stats.default_subset;
    auto table = stats_table(stats);
    CHECK(table.find("83,081,507") != std::string::npos);
    CHECK(table.find("260.68") != std::string::npos);
    CHECK(table.find("Documents") != std::string::npos);
    CHECK(table.find("Tokens") != std::string::npos);
}
