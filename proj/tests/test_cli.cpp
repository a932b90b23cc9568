#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "corpuskit/corpus_io.hpp"
#include "corpuskit/document.hpp"

using namespace corpuskit;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int invocation_counter = 0;

CliResult run_cli(const std::string& args, const fs::path& dir) {
    fs::create_directories(dir);
    fs::path out = dir / ("stdout_" + std::to_string(invocation_counter) + ".txt");
    fs::path err = dir / ("stderr_" + std::to_string(invocation_counter) + ".txt");
    ++invocation_counter;

    std::string cmd = std::string(CORPUSKIT_CLI_PATH) + " " + args + " > " +
                      out.string() + " 2> " + err.string();
    int status = std::system(cmd.c_str());

    CliResult result;
    result.code = status == -1 ? -1 : WEXITSTATUS(status);
    result.out = slurp(out);
    result.err = slurp(err);
    return result;
}

const std::vector<std::string>& word_bank() {
    static const std::vector<std::string> bank = {
        "नदी",  "पहाड़", "आकाश", "पुस्तक", "विद्यालय", "गांव",  "शहर",
        "इतिहास", "विज्ञान", "संगीत", "यात्रा", "भोजन",  "परिवार", "बाज़ार",
        "खेल",  "कहानी", "भाषा",  "समुद्र", "मौसम",  "त्योहार"};
    return bank;
}

// Twelve varied words with stopwords and a terminal danda, so the default
// heuristics accept it; index variation keeps n-gram repetition low.
std::string good_text(size_t index) {
    const auto& bank = word_bank();
    std::string text;
    for (size_t k = 0; k < 9; ++k) {
        text += bank[(index * 7 + k * 3 + index / 31) % bank.size()];
        text += " ";
    }
    text += "और यह है क्रमांक" + std::to_string(index) + "।";
    return text;
}

nlohmann::json recorded_entry(const std::string& text, const std::string& top_lang,
                              double top_conf) {
    nlohmann::json predictions = nlohmann::json::array();
    predictions.push_back({{"lang", top_lang}, {"conf", top_conf}});
    predictions.push_back(
        {{"lang", top_lang == "hi" ? "en" : "hi"}, {"conf", 1.0 - top_conf}});
    return {{"text", text}, {"predictions", predictions}};
}

void write_filter_config(const fs::path& config_path, const fs::path& recorded_path) {
    std::ofstream out(config_path);
    out << "[filter]\n";
    out << "target_lang = \"hi\"\n";
    out << "langid_threshold = 0.69\n\n";
    out << "[langid]\n";
    out << "mode = \"recorded\"\n";
    out << "file = \"" << recorded_path.string() << "\"\n";
}

struct FilterFixture {
    fs::path corpus;
    fs::path config;
    size_t expected_kept = 0;
};

FilterFixture build_determinism_fixture(const fs::path& dir) {
    fs::create_directories(dir);
    FilterFixture fixture;
    fixture.corpus = dir / "corpus.jsonl";
    fixture.config = dir / "filter.toml";
    fs::path recorded = dir / "recorded.jsonl";

    JsonlWriter corpus_writer(fixture.corpus.string());
    std::ofstream recorded_out(recorded);
    for (size_t i = 0; i < 1000; ++i) {
        DocumentRecord doc;
        doc.id = "doc" + std::to_string(i);
        doc.source = i % 2 == 0 ? "web" : "news";
        doc.token_count = static_cast<int64_t>(60 + i % 90);

        bool short_doc = i % 7 == 0;
        bool wrong_lang = i % 11 == 0;
        bool low_conf = i % 13 == 0;
        doc.text = short_doc ? "छोटा पाठ।" : good_text(i);

        double conf = low_conf ? 0.55 : 0.70 + static_cast<double>(i % 29) / 100.0;
        std::string top = wrong_lang ? "en" : "hi";
        recorded_out << recorded_entry(doc.text, top, conf).dump() << "\n";
        corpus_writer.write(doc);

        if (!short_doc && !wrong_lang && !low_conf) ++fixture.expected_kept;
    }
    write_filter_config(fixture.config, recorded);
    return fixture;
}

}  // namespace

TEST_CASE("filter output is byte identical across thread counts") {
    fs::path dir = fs::temp_directory_path() / "corpuskit_cli_determinism";
    fs::remove_all(dir);
    FilterFixture fixture = build_determinism_fixture(dir);

    auto run_at = [&](int threads, const std::string& tag) {
        std::string args = "--seed 11 --threads " + std::to_string(threads) +
                           " --config " + fixture.config.string() + " --manifest " +
                           (dir / ("manifest_" + tag + ".json")).string() +
                           " filter --input " + fixture.corpus.string() + " --kept " +
                           (dir / ("kept_" + tag + ".jsonl")).string() +
                           " --rejected " + (dir / ("rejected_" + tag + ".jsonl")).string() +
                           " --stats " + (dir / ("stats_" + tag + ".txt")).string();
        return run_cli(args, dir);
    };

    CliResult serial = run_at(1, "t1");
    CliResult parallel = run_at(8, "t8");
    REQUIRE(serial.code == 0);
    REQUIRE(parallel.code == 0);

    std::string kept1 = slurp(dir / "kept_t1.jsonl");
    std::string kept8 = slurp(dir / "kept_t8.jsonl");
    CHECK(!kept1.empty());
    CHECK(kept1 == kept8);
    CHECK(slurp(dir / "rejected_t1.jsonl") == slurp(dir / "rejected_t8.jsonl"));
    CHECK(slurp(dir / "stats_t1.txt") == slurp(dir / "stats_t8.txt"));

    size_t kept_lines = static_cast<size_t>(
        std::count(kept1.begin(), kept1.end(), '\n'));
    CHECK(kept_lines == fixture.expected_kept);

    nlohmann::json manifest =
        nlohmann::json::parse(slurp(dir / "manifest_t1.json"));
    CHECK(manifest["subcommand"] == "filter");
    CHECK(manifest["counts"]["input_documents"] == 1000);
    CHECK(manifest["counts"]["kept"] == fixture.expected_kept);
    CHECK(manifest["config_xxh64"].get<std::string>().size() == 16);
    CHECK(manifest["seed"] == 11);
    fs::remove_all(dir);
}

TEST_CASE("filter threshold flag reaches the language cascade") {
    fs::path dir = fs::temp_directory_path() / "corpuskit_cli_threshold";
    fs::remove_all(dir);
    fs::create_directories(dir);

    fs::path corpus = dir / "corpus.jsonl";
    fs::path recorded = dir / "recorded.jsonl";
    fs::path config = dir / "filter.toml";

    std::vector<std::string> texts = {good_text(1), good_text(2), good_text(3)};
    {
        JsonlWriter writer(corpus.string());
        std::ofstream recorded_out(recorded);
        for (size_t i = 0; i < texts.size(); ++i) {
            DocumentRecord doc;
            doc.id = "doc" + std::to_string(i);
            doc.source = "web";
            doc.text = texts[i];
            writer.write(doc);
        }
        recorded_out << recorded_entry(texts[0], "hi", 0.68).dump() << "\n";
        recorded_out << recorded_entry(texts[1], "hi", 0.69).dump() << "\n";
        recorded_out << recorded_entry(texts[2], "en", 0.95).dump() << "\n";
    }
    write_filter_config(config, recorded);

    auto kept_count_at = [&](const std::string& threshold, const std::string& tag) {
        fs::path kept = dir / ("kept_" + tag + ".jsonl");
        CliResult result = run_cli(
            "--config " + config.string() + " --manifest " +
                (dir / ("m_" + tag + ".json")).string() + " filter --threshold " +
                threshold + " --input " + corpus.string() + " --kept " + kept.string() +
                " --rejected " + (dir / ("rejected_" + tag + ".jsonl")).string(),
            dir);
        REQUIRE(result.code == 0);
        std::string content = slurp(kept);
        return std::count(content.begin(), content.end(), '\n');
    };

    CHECK(kept_count_at("0.69", "strict") == 1);
    CHECK(kept_count_at("0.5", "loose") == 2);
    fs::remove_all(dir);
}

TEST_CASE("stats on an empty corpus reports zeros and succeeds") {
    fs::path dir = fs::temp_directory_path() / "corpuskit_cli_stats";
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::path empty = dir / "empty.jsonl";
    std::ofstream(empty).close();

    CliResult result = run_cli("--manifest " + (dir / "m.json").string() +
                                   " stats --input " + empty.string(),
                               dir);
    CHECK(result.code == 0);
    CHECK(result.out.find("Total") != std::string::npos);
    CHECK(result.out.find("0") != std::string::npos);

    nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "m.json"));
    CHECK(manifest["counts"]["documents"] == 0);
    fs::remove_all(dir);
}

TEST_CASE("dedupe drops the non-survivor of an exact pair") {
    fs::path dir = fs::temp_directory_path() / "corpuskit_cli_dedupe";
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::path corpus = dir / "corpus.jsonl";

    std::string repeated;
    for (int k = 0; k < 30; ++k) repeated += word_bank()[k % word_bank().size()] + " ";
    {
        JsonlWriter writer(corpus.string());
        for (int i = 0; i < 12; ++i) {
            DocumentRecord doc;
            doc.id = "doc" + std::to_string(i);
            doc.source = "web";
            if (i == 3 || i == 9) {
                doc.text = repeated;
            } else {
                doc.text = good_text(static_cast<size_t>(i)) + " " +
                           good_text(static_cast<size_t>(i + 40));
            }
            writer.write(doc);
        }
    }

    CliResult result = run_cli(
        "--seed 5 --manifest " + (dir / "m.json").string() + " dedupe --input " +
            corpus.string() + " --output " + (dir / "survivors.jsonl").string() +
            " --duplicates " + (dir / "dups.jsonl").string(),
        dir);
    REQUIRE(result.code == 0);

    std::string survivors = slurp(dir / "survivors.jsonl");
    std::string duplicates = slurp(dir / "dups.jsonl");
    CHECK(std::count(survivors.begin(), survivors.end(), '\n') == 11);
    CHECK(std::count(duplicates.begin(), duplicates.end(), '\n') == 1);
    CHECK(duplicates.find("doc9") != std::string::npos);
    CHECK(survivors.find("doc3") != std::string::npos);

    nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "m.json"));
    CHECK(manifest["counts"]["dropped"] == 1);
    fs::remove_all(dir);
}

TEST_CASE("tokstats renders the comparison table and json") {
    fs::path dir = fs::temp_directory_path() / "corpuskit_cli_tokstats";
    fs::remove_all(dir);
    fs::create_directories(dir);

    fs::path words = dir / "words.txt";
    {
        std::ofstream out(words);
        out << "abc\nab\nxyz\nabab\n";
    }
    fs::path vocab = dir / "vocab.txt";
    {
        std::ofstream out(vocab);
        out << "ab\nabc\nx\ny\nz\n";
    }

    CliResult result = run_cli(
        "--manifest " + (dir / "m.json").string() + " tokstats --words " +
            words.string() + " --vocab toy=" + vocab.string() + " --json " +
            (dir / "report.json").string(),
        dir);
    REQUIRE(result.code == 0);
    CHECK(result.out.find("toy") != std::string::npos);
    CHECK(result.out.find("Fertility") != std::string::npos);

    nlohmann::json report = nlohmann::json::parse(slurp(dir / "report.json"));
    REQUIRE(report.size() == 1);
    CHECK(report[0]["tokenizer"] == "toy");
    CHECK(report[0]["word_count"] == 4);
    fs::remove_all(dir);
}

TEST_CASE("plan emits the derived hyperparameters as json") {
    fs::path dir = fs::temp_directory_path() / "corpuskit_cli_plan";
    fs::remove_all(dir);
    fs::create_directories(dir);

    CliResult result = run_cli(
        "--config " + std::string(CORPUSKIT_SOURCE_DIR) +
            "/data/plan_v02.toml --manifest " + (dir / "m.json").string() +
            " plan --json " + (dir / "plan.json").string(),
        dir);
    REQUIRE(result.code == 0);

    nlohmann::json plan = nlohmann::json::parse(slurp(dir / "plan.json"));
    CHECK(plan["peak_lr"] == 7e-4);
    CHECK(plan["batch_size_tokens"] == 2097152);
    CHECK(plan["stages"].size() == 3);
    fs::remove_all(dir);
}

TEST_CASE("schedule-dump writes one row per step") {
    fs::path dir = fs::temp_directory_path() / "corpuskit_cli_schedule";
    fs::remove_all(dir);
    fs::create_directories(dir);

    CliResult result = run_cli(
        "--config " + std::string(CORPUSKIT_SOURCE_DIR) +
            "/data/plan_v02.toml --manifest " + (dir / "m.json").string() +
            " schedule-dump --output " + (dir / "schedule.csv").string(),
        dir);
    REQUIRE(result.code == 0);

    std::string csv = slurp(dir / "schedule.csv");
    CHECK(csv.rfind("step,lr", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 170002);
    CHECK(csv.find("\n0,0\n") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("evalagg writes report json and charts") {
    fs::path dir = fs::temp_directory_path() / "corpuskit_cli_evalagg";
    fs::remove_all(dir);
    fs::path series_dir = dir / "series";
    fs::create_directories(series_dir);

    {
        std::ofstream out(series_dir / "hellaswag.csv");
        out << "step,tokens,score\n";
        out << "5000,10490000000,0.311\n";
        out << "10000,20970000000,0.318\n";
        out << "15000,31460000000,0.325\n";
    }
    {
        std::ofstream out(series_dir / "milu.csv");
        out << "step,tokens,score\n";
        out << "5000,10490000000,0.251\n";
        out << "10000,20970000000,0.256\n";
        out << "15000,31460000000,0.254\n";
    }

    CliResult result = run_cli(
        "--manifest " + (dir / "m.json").string() + " evalagg --series-dir " +
            series_dir.string() + " --baselines " +
            std::string(CORPUSKIT_SOURCE_DIR) + "/data/baselines.toml --json " +
            (dir / "report.json").string() + " --charts " +
            (dir / "charts").string(),
        dir);
    REQUIRE(result.code == 0);
    CHECK(result.out.find("NPM trajectory") != std::string::npos);

    nlohmann::json report = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(report["npm_trajectory"].size() == 3);
    CHECK(report["surpass"][0]["benchmark"] == "hellaswag");
    CHECK(report["surpass"][0]["first_step"] == 5000);
    CHECK(report["surpass"][1]["first_step"].is_null());

    std::string chart = slurp(dir / "charts" / "hellaswag.svg");
    CHECK(chart.rfind("<svg", 0) == 0);
    CHECK(slurp(dir / "charts" / "npm.svg").rfind("<svg", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("sidecar-apply merges scores and respects conflict modes") {
    fs::path dir = fs::temp_directory_path() / "corpuskit_cli_sidecar";
    fs::remove_all(dir);
    fs::create_directories(dir);

    fs::path corpus = dir / "corpus.jsonl";
    {
        JsonlWriter writer(corpus.string());
        for (int i = 0; i < 3; ++i) {
            DocumentRecord doc;
            doc.id = "doc" + std::to_string(i);
            doc.source = "web";
            doc.text = good_text(static_cast<size_t>(i));
            writer.write(doc);
        }
    }
    fs::path sidecar = dir / "scores.jsonl";
    {
        std::ofstream out(sidecar);
        out << R"({"id":"doc0","edu_score":4,"toxicity_score":1})" << "\n";
        out << R"({"id":"doc2","edu_score":2,"toxicity_score":5})" << "\n";
    }

    fs::path merged = dir / "merged.jsonl";
    CliResult result = run_cli("--manifest " + (dir / "m1.json").string() +
                                   " sidecar-apply --input " + corpus.string() +
                                   " --sidecar " + sidecar.string() + " --output " +
                                   merged.string(),
                               dir);
    REQUIRE(result.code == 0);

    JsonlReader reader(merged.string());
    std::vector<DocumentRecord> docs = reader.read_all();
    REQUIRE(docs.size() == 3);
    CHECK(docs[0].edu_score == 4);
    CHECK(docs[1].edu_score == std::nullopt);
    CHECK(docs[2].toxicity_score == 5);

    fs::path conflicting = dir / "conflicting.jsonl";
    {
        std::ofstream out(conflicting);
        out << R"({"id":"doc0","edu_score":1,"toxicity_score":1})" << "\n";
    }
    CliResult conflict = run_cli("--manifest " + (dir / "m2.json").string() +
                                     " sidecar-apply --input " + merged.string() +
                                     " --sidecar " + conflicting.string() +
                                     " --output " + (dir / "again.jsonl").string(),
                                 dir);
    CHECK(conflict.code == 2);
    CHECK(conflict.err.find("score_conflict") != std::string::npos);

    CliResult keep = run_cli("--manifest " + (dir / "m3.json").string() +
                                 " sidecar-apply --conflict keep --input " +
                                 merged.string() + " --sidecar " +
                                 conflicting.string() + " --output " +
                                 (dir / "kept.jsonl").string(),
                             dir);
    CHECK(keep.code == 0);
    fs::remove_all(dir);
}

TEST_CASE("default manifest lands in the working directory") {
    fs::path dir = fs::temp_directory_path() / "corpuskit_cli_cwd";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "empty.jsonl").close();

    std::string cmd = "cd " + dir.string() + " && " + CORPUSKIT_CLI_PATH +
                      " stats --input empty.jsonl > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(dir / "manifest.json"));
    fs::remove_all(dir);
}

TEST_CASE("usage and runtime failures use distinct exit codes") {
    fs::path dir = fs::temp_directory_path() / "corpuskit_cli_exit";
    fs::remove_all(dir);

    CHECK(run_cli("--help", dir).code == 0);
    CHECK(run_cli("no-such-subcommand", dir).code == 1);
    CHECK(run_cli("stats", dir).code == 1);
    CHECK(run_cli("--manifest " + (dir / "m.json").string() + " stats --input " +
                      (dir / "absent.jsonl").string(),
                  dir)
              .code == 2);

    CliResult unknown_flag = run_cli("stats --input x --frobnicate", dir);
    CHECK(unknown_flag.code == 1);
    CHECK(!unknown_flag.err.empty());
    fs::remove_all(dir);
}
