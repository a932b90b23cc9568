#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "corpuskit/toml.hpp"

namespace corpuskit {

// Benchmark scores arrive either as fractions in [0, 1] or as percentages.
// Every series declares its unit explicitly; all internal math runs on
// fractions so mixed-unit inputs cannot silently skew the aggregate.
enum class ScoreScale { fraction, percent };

ScoreScale parse_score_scale(std::string_view text);

struct EvalPoint {
    int64_t step = 0;
    double tokens = 0.0;
    double score = 0.0;
};

struct BenchmarkSeries {
    std::string name;
    double baseline = 0.0;
    double max_score = 1.0;
    int n_shot = 0;
    std::vector<EvalPoint> points;

    void validate() const;
};

// baseline and max_score are always stored as fractions; scale records the
// unit the benchmark's CSV scores (and its TOML entry) are declared in.
struct BaselineSpec {
    double baseline = 0.0;
    double max_score = 1.0;
    ScoreScale scale = ScoreScale::fraction;
    int n_shot = 0;
};

using BaselineTable = std::map<std::string, BaselineSpec>;

BaselineTable load_baselines(const toml::Table& config);
BaselineTable load_baselines_file(const std::string& path);

// Reads a per-benchmark CSV with a "step,tokens,score" header, applying the
// spec's scale so the returned series is always in fractions.
BenchmarkSeries load_series_csv(const std::string& path, const std::string& name,
                                const BaselineSpec& spec);

// Loads every "<name>.csv" under dir, matched against the baseline table by
// file stem. A CSV without a baseline entry is an error.
std::vector<BenchmarkSeries> load_series_dir(const std::string& dir,
                                             const BaselineTable& baselines);

// Mean of per-task scores normalized against random and maximum performance,
// in percentage points. Below-random scores yield negative contributions.
double npm(const std::map<std::string, double>& scores, const BaselineTable& baselines);

// Average absolute difference between successive evaluation points.
double mean_abs_change(const BenchmarkSeries& series);

struct SnrResult {
    double value = 0.0;
    bool infinite = false;

    std::string display() const;
};

// Mean score over its sample standard deviation. A constant series has zero
// deviation and is flagged infinite rather than dividing by zero.
SnrResult snr(const BenchmarkSeries& series);

// Spearman rank correlation of score against step, with average ranks for
// ties. A series whose scores are all identical correlates 0 by convention.
double spearman(const BenchmarkSeries& series);

struct SurpassResult {
    int64_t first_step = 0;
    double tokens = 0.0;
    double score = 0.0;
    double delta = 0.0;
};

// First point at or above baseline + margin, absent when never reached.
std::optional<SurpassResult> surpass_analysis(const BenchmarkSeries& series,
                                              double margin = 0.05);

struct NoiseRow {
    std::string benchmark;
    double mac = 0.0;
    SnrResult snr;
    double spearman = 0.0;
};

struct NpmPoint {
    int64_t step = 0;
    double tokens = 0.0;
    double npm = 0.0;
    std::size_t covered = 0;
    std::size_t total = 0;
};

struct SurpassRow {
    std::string benchmark;
    double baseline = 0.0;
    double threshold = 0.0;
    std::optional<SurpassResult> result;
};

struct AggregateReport {
    double margin = 0.05;
    std::vector<NpmPoint> npm_trajectory;
    std::vector<NoiseRow> noise;
    std::vector<SurpassRow> surpass;
    std::vector<std::string> warnings;
};

// Builds the full report: NPM across the union of checkpoint steps (with
// coverage warnings where a benchmark is missing a step), noise statistics
// for every series with enough points, and the surpass table.
AggregateReport aggregate_report(std::vector<BenchmarkSeries> series,
                                 double margin = 0.05);

nlohmann::json report_to_json(const AggregateReport& report);
std::string npm_table(const AggregateReport& report);
std::string noise_table(const AggregateReport& report);
std::string surpass_table(const AggregateReport& report);
std::string report_text(const AggregateReport& report);

struct ChartSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<ChartSeries> series;
    std::optional<double> threshold;
};

// Renders a self-contained SVG line chart; no plotting dependency needed for
// the handful of diagnostic figures this tool emits.
std::string line_chart_svg(const ChartSpec& spec);

}  // namespace corpuskit
