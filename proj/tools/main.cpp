#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "corpuskit/corpus_io.hpp"
#include "corpuskit/dedup.hpp"
#include "corpuskit/evalagg.hpp"
#include "corpuskit/filters.hpp"
#include "corpuskit/judge.hpp"
#include "corpuskit/langid.hpp"
#include "corpuskit/manifest.hpp"
#include "corpuskit/parallel.hpp"
#include "corpuskit/recipe.hpp"
#include "corpuskit/tokeval.hpp"

namespace {

using namespace corpuskit;

struct GlobalOpts {
    uint64_t seed = 0;
    std::string config_path;
    size_t threads = 0;
    std::string manifest_path = "manifest.json";

    size_t effective_threads() const {
        return threads == 0 ? default_thread_count() : threads;
    }
};

class ManifestScope {
public:
    ManifestScope(const GlobalOpts& global, std::string subcommand)
        : global_(global), start_(std::chrono::steady_clock::now()) {
        manifest_.subcommand = std::move(subcommand);
        manifest_.seed = global.seed;
        manifest_.threads = global.effective_threads();
        if (!global.config_path.empty()) {
            manifest_.config_path = global.config_path;
            manifest_.config_hash = hash_file_bytes(global.config_path);
        }
    }

    RunManifest& manifest() { return manifest_; }

    void finish() {
        auto elapsed = std::chrono::steady_clock::now() - start_;
        manifest_.wall_seconds =
            std::chrono::duration<double>(elapsed).count();
        write_manifest(manifest_, global_.manifest_path);
    }

private:
    const GlobalOpts& global_;
    RunManifest manifest_;
    std::chrono::steady_clock::time_point start_;
};

toml::Table load_config(const GlobalOpts& global) {
    if (global.config_path.empty()) {
        throw std::runtime_error("this subcommand needs --config");
    }
    return toml::parse_file(global.config_path);
}

std::vector<DocumentRecord> read_corpus(const std::string& path, bool skip_malformed,
                                        RunManifest& manifest) {
    JsonlReader reader(path, skip_malformed ? MalformedLinePolicy::skip
                                            : MalformedLinePolicy::abort);
    std::vector<DocumentRecord> docs = reader.read_all();
    manifest.inputs.push_back(path);
    manifest.counts["input_documents"] = static_cast<int64_t>(docs.size());
    if (!reader.errors().empty()) {
        manifest.counts["malformed_skipped"] =
            static_cast<int64_t>(reader.errors().size());
        for (const LineError& error : reader.errors()) {
            std::cerr << path << ":" << error.line << ": skipped: " << error.message
                      << "\n";
        }
    }
    return docs;
}

std::vector<std::pair<std::string, std::string>> load_langid_samples(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open langid samples: " + path);
    std::vector<std::pair<std::string, std::string>> samples;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected lang<TAB>text");
        }
        samples.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return samples;
}

struct FilterArgs {
    std::string input;
    std::string kept;
    std::string rejected;
    double threshold = 0.69;
    bool threshold_given = false;
    std::string stats_path;
    bool skip_malformed = false;
};

int run_filter(const FilterArgs& args, const GlobalOpts& global) {
    ManifestScope scope(global, "filter");

    toml::Table config;
    if (!global.config_path.empty()) config = toml::parse_file(global.config_path);

    PipelineConfig pipeline;
    Blocklist blocklist;
    std::unique_ptr<LangIdModel> coarse;
    std::unique_ptr<LangIdModel> precise;
    std::optional<HeuristicConfig> heuristics;

    bool run_heuristics = true;
    if (config.has_table("filter")) {
        const toml::Table& filter_table = config.table("filter");
        pipeline.target_lang = filter_table.get_string("target_lang", "hi");
        pipeline.langid_threshold = filter_table.get_double("langid_threshold", 0.69);
        pipeline.apply_final_gates = filter_table.get_bool("apply_final_gates", false);
        pipeline.min_tokens = filter_table.get_int("min_tokens", 50);
        pipeline.toxicity_cutoff =
            static_cast<int>(filter_table.get_int("toxicity_cutoff", 4));
        run_heuristics = filter_table.get_bool("run_heuristics", true);
    }
    if (args.threshold_given) pipeline.langid_threshold = args.threshold;

    if (config.has_table("blocklist")) {
        blocklist = Blocklist::from_file(config.table("blocklist").get_string("file"));
        pipeline.blocklist = &blocklist;
    }
    if (config.has_table("langid")) {
        const toml::Table& langid_table = config.table("langid");
        std::string mode = langid_table.get_string("mode", "trigram");
        if (mode == "recorded") {
            RecordedLangId recorded =
                RecordedLangId::load(langid_table.get_string("file"));
            coarse = std::make_unique<RecordedLangId>(recorded);
            precise = std::make_unique<RecordedLangId>(std::move(recorded));
        } else if (mode == "trigram") {
            coarse = std::make_unique<TrigramLangId>(TrigramLangId::train(
                load_langid_samples(langid_table.get_string("coarse_samples")),
                "trigram_coarse"));
            precise = std::make_unique<TrigramLangId>(TrigramLangId::train(
                load_langid_samples(langid_table.get_string("precise_samples")),
                "trigram_precise"));
        } else {
            throw std::runtime_error("unknown langid mode: " + mode);
        }
        pipeline.coarse = coarse.get();
        pipeline.precise = precise.get();
    }
    if (run_heuristics) {
        heuristics = HeuristicConfig::from_toml(config);
        heuristics->validate();
        pipeline.heuristics = heuristics;
    }

    std::vector<DocumentRecord> docs =
        read_corpus(args.input, args.skip_malformed, scope.manifest());

    parallel_for_each(
        docs, [&pipeline](DocumentRecord& doc) { run_pipeline_stages(doc, pipeline); },
        global.effective_threads());

    JsonlWriter kept_writer(args.kept);
    JsonlWriter rejected_writer(args.rejected);
    CorpusStats stats;
    for (const DocumentRecord& doc : docs) {
        if (doc.dropped()) {
            rejected_writer.write(doc);
        } else {
            kept_writer.write(doc);
            corpus_stats_accumulate(stats, doc);
        }
    }

    std::string table = stats_table(stats);
    std::cout << table;
    if (!args.stats_path.empty()) {
        std::ofstream out(args.stats_path);
        if (!out) throw std::runtime_error("cannot write stats: " + args.stats_path);
        out << table;
        scope.manifest().outputs.push_back(args.stats_path);
    }

    scope.manifest().outputs.push_back(args.kept);
    scope.manifest().outputs.push_back(args.rejected);
    scope.manifest().counts["kept"] = static_cast<int64_t>(kept_writer.written());
    scope.manifest().counts["rejected"] =
        static_cast<int64_t>(rejected_writer.written());
    scope.finish();
    return 0;
}

struct DedupeArgs {
    std::string input;
    std::string output;
    std::string duplicates;
    size_t shingle_words = 5;
    double verify_jaccard = -1.0;
    std::string scope = "global";
    bool skip_malformed = false;
};

int run_dedupe(const DedupeArgs& args, const GlobalOpts& global) {
    ManifestScope scope(global, "dedupe");

    std::vector<DocumentRecord> docs =
        read_corpus(args.input, args.skip_malformed, scope.manifest());

    DedupOptions options;
    options.shingle_words = args.shingle_words;
    options.run_seed = global.seed;
    if (args.verify_jaccard >= 0.0) options.verify_jaccard = args.verify_jaccard;
    options.scope = args.scope == "source" ? DedupOptions::Scope::per_source
                                           : DedupOptions::Scope::global;
    options.threads = global.effective_threads();

    DedupReport report = dedupe_documents(docs, options);

    JsonlWriter survivor_writer(args.output);
    std::unique_ptr<JsonlWriter> duplicate_writer;
    if (!args.duplicates.empty()) {
        duplicate_writer = std::make_unique<JsonlWriter>(args.duplicates);
    }
    for (const DocumentRecord& doc : docs) {
        if (doc.dropped()) {
            if (duplicate_writer) duplicate_writer->write(doc);
        } else {
            survivor_writer.write(doc);
        }
    }

    scope.manifest().outputs.push_back(args.output);
    if (!args.duplicates.empty()) scope.manifest().outputs.push_back(args.duplicates);
    scope.manifest().counts["survivors"] =
        static_cast<int64_t>(survivor_writer.written());
    scope.manifest().counts["dropped"] = static_cast<int64_t>(report.dropped);
    scope.manifest().counts["bypassed_short"] = static_cast<int64_t>(report.bypassed);
    scope.manifest().counts["candidate_pairs"] =
        static_cast<int64_t>(report.candidate_pairs);
    scope.manifest().counts["duplicate_clusters"] =
        static_cast<int64_t>(report.clusters_with_duplicates);
    scope.finish();
    return 0;
}

struct AnnotateArgs {
    std::string input;
    std::string output;
    std::string scores_path;
    std::string endpoint;
    std::string api_path = "/v1/chat/completions";
    std::string model = "judge";
    size_t sample_size = 0;
    int retries = 3;
    int backoff_ms = 100;
    size_t max_in_flight = 8;
    size_t truncate_chars = 8000;
    int timeout_seconds = 30;
    bool skip_malformed = false;
};

int run_annotate(const AnnotateArgs& args, const GlobalOpts& global) {
    ManifestScope scope(global, "annotate");

    std::vector<DocumentRecord> docs =
        read_corpus(args.input, args.skip_malformed, scope.manifest());

    JudgeClientConfig config;
    config.endpoint = args.endpoint;
    config.path = args.api_path;
    config.model = args.model;
    config.sample_size = args.sample_size == 0 ? docs.size() : args.sample_size;
    config.seed = global.seed;
    config.retries = args.retries;
    config.backoff_initial_ms = args.backoff_ms;
    config.max_in_flight = args.max_in_flight;
    config.truncate_chars = args.truncate_chars;
    config.timeout_seconds = args.timeout_seconds;

    AnnotationRun run = annotate_sample(docs, config);

    JsonlWriter writer(args.output);
    for (const DocumentRecord& doc : docs) writer.write(doc);
    scope.manifest().outputs.push_back(args.output);

    if (!args.scores_path.empty()) {
        JsonlWriter scores_writer(args.scores_path);
        for (const DocumentRecord& doc : docs) {
            if (!doc.edu_score || !doc.toxicity_score) continue;
            scores_writer.write_json({{"id", doc.id},
                                      {"edu_score", *doc.edu_score},
                                      {"toxicity_score", *doc.toxicity_score}});
        }
        scope.manifest().outputs.push_back(args.scores_path);
    }

    scope.manifest().counts["scored"] =
        run.manifest.value("scored_documents", int64_t{0});
    scope.manifest().counts["failed"] =
        static_cast<int64_t>(run.failed_ids.size());
    scope.manifest().extra["judge"] = run.manifest;
    scope.finish();
    return run.failed_ids.empty() ? 0 : 2;
}

struct SidecarArgs {
    std::string input;
    std::string sidecar;
    std::string output;
    std::string conflict = "error";
    bool skip_malformed = false;
};

int run_sidecar_apply(const SidecarArgs& args, const GlobalOpts& global) {
    ManifestScope scope(global, "sidecar-apply");

    ConflictMode mode;
    if (args.conflict == "error") {
        mode = ConflictMode::error;
    } else if (args.conflict == "overwrite") {
        mode = ConflictMode::overwrite;
    } else if (args.conflict == "keep") {
        mode = ConflictMode::keep;
    } else {
        throw std::runtime_error("unknown conflict mode: " + args.conflict);
    }

    std::vector<DocumentRecord> docs =
        read_corpus(args.input, args.skip_malformed, scope.manifest());
    ScoreSidecar sidecar = ScoreSidecar::load(args.sidecar);
    scope.manifest().inputs.push_back(args.sidecar);

    size_t updated = apply_sidecar(docs, sidecar, mode);

    JsonlWriter writer(args.output);
    for (const DocumentRecord& doc : docs) writer.write(doc);

    scope.manifest().outputs.push_back(args.output);
    scope.manifest().counts["sidecar_entries"] = static_cast<int64_t>(sidecar.size());
    scope.manifest().counts["updated"] = static_cast<int64_t>(updated);
    scope.finish();
    return 0;
}

struct StatsArgs {
    std::string input;
    std::string json_path;
    bool skip_malformed = false;
};

int run_stats(const StatsArgs& args, const GlobalOpts& global) {
    ManifestScope scope(global, "stats");

    std::vector<DocumentRecord> docs =
        read_corpus(args.input, args.skip_malformed, scope.manifest());
    CorpusStats stats = corpus_stats(docs);

    std::cout << stats_table(stats);
    if (!args.json_path.empty()) {
        std::ofstream out(args.json_path);
        if (!out) throw std::runtime_error("cannot write json: " + args.json_path);
        out << stats_to_json(stats).dump(2) << "\n";
        scope.manifest().outputs.push_back(args.json_path);
    }

    scope.manifest().counts["documents"] =
        static_cast<int64_t>(stats.total.documents);
    scope.finish();
    return 0;
}

struct TokstatsArgs {
    std::string words_path;
    std::vector<std::string> vocabs;  // name=path
    std::string unk = "[UNK]";
    bool no_byte_fallback = false;
    std::string json_path;
};

int run_tokstats(const TokstatsArgs& args, const GlobalOpts& global) {
    ManifestScope scope(global, "tokstats");

    std::vector<std::string> words = load_word_list(args.words_path);
    scope.manifest().inputs.push_back(args.words_path);

    VocabTokenizer::Options options;
    options.unk = args.unk;
    options.byte_fallback = !args.no_byte_fallback;

    std::vector<VocabTokenizer> tokenizers;
    tokenizers.reserve(args.vocabs.size());
    for (const std::string& spec : args.vocabs) {
        size_t eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 >= spec.size()) {
            throw std::runtime_error("expected --vocab name=path, got: " + spec);
        }
        std::string path = spec.substr(eq + 1);
        tokenizers.push_back(
            VocabTokenizer::from_file(spec.substr(0, eq), path, options));
        scope.manifest().inputs.push_back(path);
    }
    std::vector<const TokenizerAdapter*> adapters;
    for (const VocabTokenizer& tokenizer : tokenizers) adapters.push_back(&tokenizer);

    std::vector<TokEvalReport> reports =
        compare_tokenizers(words, adapters, global.effective_threads());

    std::cout << comparison_table(reports);
    if (!args.json_path.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (const TokEvalReport& report : reports) j.push_back(report_to_json(report));
        std::ofstream out(args.json_path);
        if (!out) throw std::runtime_error("cannot write json: " + args.json_path);
        out << j.dump(2) << "\n";
        scope.manifest().outputs.push_back(args.json_path);
    }

    scope.manifest().counts["words"] = static_cast<int64_t>(words.size());
    scope.manifest().counts["tokenizers"] = static_cast<int64_t>(reports.size());
    scope.finish();
    return 0;
}

struct PlanArgs {
    std::string json_path;
    std::string schedule_csv;
};

int run_plan(const PlanArgs& args, const GlobalOpts& global) {
    ManifestScope scope(global, "plan");

    RecipePlan plan = plan_recipe(load_config(global));

    std::cout << plan_report(plan);
    if (!args.json_path.empty()) {
        std::ofstream out(args.json_path);
        if (!out) throw std::runtime_error("cannot write json: " + args.json_path);
        out << plan_to_json(plan).dump(2) << "\n";
        scope.manifest().outputs.push_back(args.json_path);
    }
    if (!args.schedule_csv.empty()) {
        std::ofstream out(args.schedule_csv);
        if (!out) {
            throw std::runtime_error("cannot write schedule csv: " + args.schedule_csv);
        }
        write_schedule_csv(plan.schedule, out);
        scope.manifest().outputs.push_back(args.schedule_csv);
    }

    scope.manifest().counts["stages"] = static_cast<int64_t>(plan.stages.size());
    scope.manifest().counts["total_steps"] = plan.schedule.total_steps;
    scope.finish();
    return 0;
}

struct ScheduleDumpArgs {
    std::string output;
};

int run_schedule_dump(const ScheduleDumpArgs& args, const GlobalOpts& global) {
    ManifestScope scope(global, "schedule-dump");

    toml::Table config = load_config(global);
    if (!config.has_table("schedule")) {
        throw std::runtime_error("config needs a [schedule] table");
    }
    ScheduleSpec spec = parse_schedule_config(config.table("schedule"));

    if (args.output.empty()) {
        write_schedule_csv(spec, std::cout);
    } else {
        std::ofstream out(args.output);
        if (!out) throw std::runtime_error("cannot write schedule csv: " + args.output);
        write_schedule_csv(spec, out);
        scope.manifest().outputs.push_back(args.output);
    }

    scope.manifest().counts["total_steps"] = spec.total_steps;
    scope.finish();
    return 0;
}

struct EvalaggArgs {
    std::string series_dir;
    std::string baselines;
    double margin = 0.05;
    std::string json_path;
    std::string charts_dir;
};

int run_evalagg(const EvalaggArgs& args, const GlobalOpts& global) {
    ManifestScope scope(global, "evalagg");

    BaselineTable baselines = load_baselines_file(args.baselines);
    std::vector<BenchmarkSeries> series = load_series_dir(args.series_dir, baselines);
    scope.manifest().inputs.push_back(args.baselines);
    scope.manifest().inputs.push_back(args.series_dir);

    AggregateReport report = aggregate_report(series, args.margin);

    std::cout << report_text(report);
    if (!args.json_path.empty()) {
        std::ofstream out(args.json_path);
        if (!out) throw std::runtime_error("cannot write json: " + args.json_path);
        out << report_to_json(report).dump(2) << "\n";
        scope.manifest().outputs.push_back(args.json_path);
    }
    if (!args.charts_dir.empty()) {
        std::filesystem::create_directories(args.charts_dir);
        for (const BenchmarkSeries& one : series) {
            ChartSpec chart;
            chart.title = one.name;
            chart.x_label = "step";
            chart.y_label = "score";
            chart.threshold = one.baseline + args.margin;
            ChartSeries line;
            line.label = one.name;
            for (const EvalPoint& point : one.points) {
                line.points.emplace_back(static_cast<double>(point.step), point.score);
            }
            chart.series.push_back(std::move(line));
            std::string path = args.charts_dir + "/" + one.name + ".svg";
            std::ofstream out(path);
            if (!out) throw std::runtime_error("cannot write chart: " + path);
            out << line_chart_svg(chart);
            scope.manifest().outputs.push_back(path);
        }
        ChartSpec npm_chart;
        npm_chart.title = "NPM trajectory";
        npm_chart.x_label = "step";
        npm_chart.y_label = "NPM";
        ChartSeries line;
        line.label = "npm";
        for (const NpmPoint& point : report.npm_trajectory) {
            line.points.emplace_back(static_cast<double>(point.step), point.npm);
        }
        npm_chart.series.push_back(std::move(line));
        std::string path = args.charts_dir + "/npm.svg";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write chart: " + path);
        out << line_chart_svg(npm_chart);
        scope.manifest().outputs.push_back(path);
    }

    scope.manifest().counts["benchmarks"] = static_cast<int64_t>(series.size());
    scope.manifest().counts["checkpoints"] =
        static_cast<int64_t>(report.npm_trajectory.size());
    scope.manifest().counts["warnings"] =
        static_cast<int64_t>(report.warnings.size());
    scope.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Corpus curation, training recipe, and evaluation toolkit"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    GlobalOpts global;
    app.add_option("--seed", global.seed, "Run seed; all randomness derives from it");
    app.add_option("--config", global.config_path, "TOML config file");
    app.add_option("--threads", global.threads, "Worker threads (0 = all cores)");
    app.add_option("--manifest", global.manifest_path, "Run manifest output path");

    FilterArgs filter_args;
    CLI::App* filter_cmd =
        app.add_subcommand("filter", "Run the quality pipeline over a corpus");
    filter_cmd->add_option("--input", filter_args.input, "Input JSONL")->required();
    filter_cmd->add_option("--kept", filter_args.kept, "Kept documents JSONL")
        ->required();
    filter_cmd->add_option("--rejected", filter_args.rejected, "Dropped documents JSONL")
        ->required();
    CLI::Option* threshold_opt = filter_cmd->add_option(
        "--threshold", filter_args.threshold, "Language id confidence threshold");
    filter_cmd->add_option("--stats", filter_args.stats_path, "Stats table output");
    filter_cmd->add_flag("--skip-malformed", filter_args.skip_malformed,
                         "Skip malformed input lines instead of aborting");

    DedupeArgs dedupe_args;
    CLI::App* dedupe_cmd =
        app.add_subcommand("dedupe", "Drop near-duplicate documents");
    dedupe_cmd->add_option("--input", dedupe_args.input, "Input JSONL")->required();
    dedupe_cmd->add_option("--output", dedupe_args.output, "Survivors JSONL")
        ->required();
    dedupe_cmd->add_option("--duplicates", dedupe_args.duplicates,
                           "Dropped duplicates JSONL");
    dedupe_cmd->add_option("--shingle-words", dedupe_args.shingle_words,
                           "Words per shingle");
    dedupe_cmd->add_option("--verify-jaccard", dedupe_args.verify_jaccard,
                           "Confirm candidates at this exact Jaccard before dropping");
    dedupe_cmd->add_option("--scope", dedupe_args.scope,
                           "Deduplicate globally or within each source")
        ->check(CLI::IsMember({"global", "source"}));
    dedupe_cmd->add_flag("--skip-malformed", dedupe_args.skip_malformed,
                         "Skip malformed input lines instead of aborting");

    AnnotateArgs annotate_args;
    CLI::App* annotate_cmd =
        app.add_subcommand("annotate", "Score documents with a judge endpoint");
    annotate_cmd->add_option("--input", annotate_args.input, "Input JSONL")->required();
    annotate_cmd->add_option("--output", annotate_args.output, "Annotated JSONL")
        ->required();
    annotate_cmd->add_option("--endpoint", annotate_args.endpoint,
                             "Judge endpoint, e.g. http://127.0.0.1:8080")
        ->required();
    annotate_cmd->add_option("--scores", annotate_args.scores_path,
                             "Score sidecar JSONL output");
    annotate_cmd->add_option("--api-path", annotate_args.api_path,
                             "Chat completions route");
    annotate_cmd->add_option("--model", annotate_args.model, "Judge model name");
    annotate_cmd->add_option("--sample-size", annotate_args.sample_size,
                             "Documents to sample (0 = all)");
    annotate_cmd->add_option("--retries", annotate_args.retries,
                             "Max total attempts per request");
    annotate_cmd->add_option("--backoff-ms", annotate_args.backoff_ms,
                             "Initial retry backoff");
    annotate_cmd->add_option("--max-in-flight", annotate_args.max_in_flight,
                             "Concurrent requests");
    annotate_cmd->add_option("--truncate-chars", annotate_args.truncate_chars,
                             "Prompt text limit in codepoints");
    annotate_cmd->add_option("--timeout-seconds", annotate_args.timeout_seconds,
                             "Per-request timeout");
    annotate_cmd->add_flag("--skip-malformed", annotate_args.skip_malformed,
                           "Skip malformed input lines instead of aborting");

    SidecarArgs sidecar_args;
    CLI::App* sidecar_cmd = app.add_subcommand(
        "sidecar-apply", "Merge a score sidecar into a corpus");
    sidecar_cmd->add_option("--input", sidecar_args.input, "Input JSONL")->required();
    sidecar_cmd->add_option("--sidecar", sidecar_args.sidecar, "Score sidecar JSONL")
        ->required();
    sidecar_cmd->add_option("--output", sidecar_args.output, "Output JSONL")
        ->required();
    sidecar_cmd->add_option("--conflict", sidecar_args.conflict,
                            "On differing scores: error, overwrite, or keep");
    sidecar_cmd->add_flag("--skip-malformed", sidecar_args.skip_malformed,
                          "Skip malformed input lines instead of aborting");

    StatsArgs stats_args;
    CLI::App* stats_cmd = app.add_subcommand("stats", "Corpus size summary");
    stats_cmd->add_option("--input", stats_args.input, "Input JSONL")->required();
    stats_cmd->add_option("--json", stats_args.json_path, "JSON stats output");
    stats_cmd->add_flag("--skip-malformed", stats_args.skip_malformed,
                        "Skip malformed input lines instead of aborting");

    TokstatsArgs tokstats_args;
    CLI::App* tokstats_cmd =
        app.add_subcommand("tokstats", "Compare tokenizers over a word list");
    tokstats_cmd->add_option("--words", tokstats_args.words_path, "Word list file")
        ->required();
    tokstats_cmd
        ->add_option("--vocab", tokstats_args.vocabs,
                     "Tokenizer as name=vocab_path; repeatable")
        ->required();
    tokstats_cmd->add_option("--unk", tokstats_args.unk, "Unknown piece string");
    tokstats_cmd->add_flag("--no-byte-fallback", tokstats_args.no_byte_fallback,
                           "Map unmatched words to the unknown piece");
    tokstats_cmd->add_option("--json", tokstats_args.json_path, "JSON report output");

    PlanArgs plan_args;
    CLI::App* plan_cmd =
        app.add_subcommand("plan", "Derive a training recipe from --config");
    plan_cmd->add_option("--json", plan_args.json_path, "Plan JSON output");
    plan_cmd->add_option("--schedule-csv", plan_args.schedule_csv,
                         "Per-step learning rate CSV output");

    ScheduleDumpArgs schedule_args;
    CLI::App* schedule_cmd = app.add_subcommand(
        "schedule-dump", "Write the per-step learning rate table from --config");
    schedule_cmd->add_option("--output", schedule_args.output,
                             "CSV path (stdout when omitted)");

    EvalaggArgs evalagg_args;
    CLI::App* evalagg_cmd =
        app.add_subcommand("evalagg", "Aggregate benchmark score series");
    evalagg_cmd
        ->add_option("--series-dir", evalagg_args.series_dir,
                     "Directory of per-benchmark CSVs")
        ->required();
    evalagg_cmd
        ->add_option("--baselines", evalagg_args.baselines, "Baselines TOML")
        ->required();
    evalagg_cmd->add_option("--margin", evalagg_args.margin,
                            "Absolute surpass margin over baseline");
    evalagg_cmd->add_option("--json", evalagg_args.json_path, "JSON report output");
    evalagg_cmd->add_option("--charts", evalagg_args.charts_dir,
                            "Directory for SVG charts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    filter_args.threshold_given = threshold_opt->count() > 0;

    try {
        if (filter_cmd->parsed()) return run_filter(filter_args, global);
        if (dedupe_cmd->parsed()) return run_dedupe(dedupe_args, global);
        if (annotate_cmd->parsed()) return run_annotate(annotate_args, global);
        if (sidecar_cmd->parsed()) return run_sidecar_apply(sidecar_args, global);
        if (stats_cmd->parsed()) return run_stats(stats_args, global);
        if (tokstats_cmd->parsed()) return run_tokstats(tokstats_args, global);
        if (plan_cmd->parsed()) return run_plan(plan_args, global);
        if (schedule_cmd->parsed()) return run_schedule_dump(schedule_args, global);
        if (evalagg_cmd->parsed()) return run_evalagg(evalagg_args, global);
    } catch (const std::exception& e) {
        std::cerr << "corpuskit: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
