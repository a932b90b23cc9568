#include "corpuskit/evalagg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "corpuskit/parallel.hpp"

namespace corpuskit {

namespace {

std::string fmt(const char* format, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, value);
    return buf;
}

std::string trim(std::string_view text) {
    size_t begin = text.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return "";
    size_t end = text.find_last_not_of(" \t\r");
    return std::string(text.substr(begin, end - begin + 1));
}

std::vector<std::string> split_csv_row(std::string_view line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    size_t n = x.size();
    double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double cov = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dx = x[i] - mean_x;
        double dy = y[i] - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if (var_x == 0.0 || var_y == 0.0) return 0.0;
    return cov / std::sqrt(var_x * var_y);
}

std::string render_table(const std::vector<std::string>& headers,
                         const std::vector<std::vector<std::string>>& rows) {
    std::vector<size_t> widths(headers.size());
    for (size_t c = 0; c < headers.size(); ++c) {
        widths[c] = headers[c].size();
        for (const auto& row : rows) widths[c] = std::max(widths[c], row[c].size());
    }

    auto emit_row = [&](const std::vector<std::string>& cells, std::string& out) {
        for (size_t c = 0; c < cells.size(); ++c) {
            if (c > 0) out += "  ";
            if (c == 0) {
                out += cells[c];
                out.append(widths[c] - cells[c].size(), ' ');
            } else {
                out.append(widths[c] - cells[c].size(), ' ');
                out += cells[c];
            }
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    };

    std::string out;
    emit_row(headers, out);
    std::vector<std::string> dashes;
    for (size_t width : widths) dashes.emplace_back(width, '-');
    emit_row(dashes, out);
    for (const auto& row : rows) emit_row(row, out);
    return out;
}

std::string xml_escape(std::string_view text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace

ScoreScale parse_score_scale(std::string_view text) {
    if (text == "fraction") return ScoreScale::fraction;
    if (text == "percent") return ScoreScale::percent;
    throw std::invalid_argument("unknown score scale: " + std::string(text));
}

void BenchmarkSeries::validate() const {
    if (name.empty()) throw std::invalid_argument("benchmark name is empty");
    if (!(baseline >= 0.0) || !(baseline < max_score)) {
        throw std::invalid_argument("benchmark " + name +
                                    ": baseline must lie in [0, max_score)");
    }
    for (size_t i = 0; i < points.size(); ++i) {
        if (i > 0 && points[i].step <= points[i - 1].step) {
            throw std::invalid_argument("benchmark " + name +
                                        ": steps must be strictly increasing");
        }
        if (points[i].score < 0.0 || points[i].score > max_score) {
            throw std::invalid_argument("benchmark " + name + ": score " +
                                        fmt("%g", points[i].score) +
                                        " outside [0, max_score]");
        }
    }
}

BaselineTable load_baselines(const toml::Table& config) {
    BaselineTable table;
    for (const auto& [name, sub] : config.tables()) {
        BaselineSpec spec;
        spec.scale = parse_score_scale(sub.get_string("scale", "fraction"));
        double divisor = spec.scale == ScoreScale::percent ? 100.0 : 1.0;
        spec.baseline = sub.get_double("baseline") / divisor;
        spec.max_score =
            sub.get_double("max", spec.scale == ScoreScale::percent ? 100.0 : 1.0) /
            divisor;
        spec.n_shot = static_cast<int>(sub.get_int("n_shot", 0));
        if (!(spec.baseline >= 0.0) || !(spec.baseline < spec.max_score)) {
            throw std::runtime_error("baseline table entry " + name +
                                     ": baseline must lie in [0, max)");
        }
        table.emplace(name, spec);
    }
    if (table.empty()) throw std::runtime_error("baseline table has no entries");
    return table;
}

BaselineTable load_baselines_file(const std::string& path) {
    return load_baselines(toml::parse_file(path));
}

BenchmarkSeries load_series_csv(const std::string& path, const std::string& name,
                                const BaselineSpec& spec) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open series csv: " + path);

    BenchmarkSeries series;
    series.name = name;
    series.baseline = spec.baseline;
    series.max_score = spec.max_score;
    series.n_shot = spec.n_shot;
    double divisor = spec.scale == ScoreScale::percent ? 100.0 : 1.0;

    std::string line;
    size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        std::vector<std::string> fields = split_csv_row(trimmed);
        if (!saw_header) {
            if (fields != std::vector<std::string>{"step", "tokens", "score"}) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": expected header step,tokens,score");
            }
            saw_header = true;
            continue;
        }
        if (fields.size() != 3) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 3 fields, got " +
                                     std::to_string(fields.size()));
        }
        EvalPoint point;
        try {
            point.step = std::stoll(fields[0]);
            point.tokens = std::stod(fields[1]);
            point.score = std::stod(fields[2]) / divisor;
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": malformed numeric field");
        }
        series.points.push_back(point);
    }
    if (!saw_header) throw std::runtime_error(path + ": missing header row");
    series.validate();
    return series;
}

std::vector<BenchmarkSeries> load_series_dir(const std::string& dir,
                                             const BaselineTable& baselines) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no csv files under " + dir);

    std::vector<BenchmarkSeries> series;
    for (const auto& file : files) {
        std::string name = file.stem().string();
        auto it = baselines.find(name);
        if (it == baselines.end()) {
            throw std::runtime_error("missing baseline: " + name);
        }
        series.push_back(load_series_csv(file.string(), name, it->second));
    }
    return series;
}

double npm(const std::map<std::string, double>& scores, const BaselineTable& baselines) {
    if (scores.empty()) throw std::invalid_argument("npm needs at least one score");
    double sum = 0.0;
    for (const auto& [name, score] : scores) {
        auto it = baselines.find(name);
        if (it == baselines.end()) throw std::runtime_error("missing baseline: " + name);
        const BaselineSpec& spec = it->second;
        if (!(spec.baseline < spec.max_score)) {
            throw std::invalid_argument("baseline for " + name + " is not below max");
        }
        sum += 100.0 * (score - spec.baseline) / (spec.max_score - spec.baseline);
    }
    return sum / static_cast<double>(scores.size());
}

double mean_abs_change(const BenchmarkSeries& series) {
    if (series.points.size() < 2) {
        throw std::invalid_argument("mean_abs_change needs at least 2 points");
    }
    double sum = 0.0;
    for (size_t i = 1; i < series.points.size(); ++i) {
        sum += std::abs(series.points[i].score - series.points[i - 1].score);
    }
    return sum / static_cast<double>(series.points.size() - 1);
}

std::string SnrResult::display() const {
    if (infinite) return "∞";
    return fmt("%.2f", value);
}

SnrResult snr(const BenchmarkSeries& series) {
    size_t n = series.points.size();
    if (n < 2) throw std::invalid_argument("snr needs at least 2 points");
    double mean = 0.0;
    for (const EvalPoint& point : series.points) mean += point.score;
    mean /= static_cast<double>(n);
    double sq = 0.0;
    for (const EvalPoint& point : series.points) {
        double d = point.score - mean;
        sq += d * d;
    }
    double std_dev = std::sqrt(sq / static_cast<double>(n - 1));
    SnrResult result;
    if (std_dev == 0.0) {
        result.infinite = true;
    } else {
        result.value = mean / std_dev;
    }
    return result;
}

double spearman(const BenchmarkSeries& series) {
    size_t n = series.points.size();
    if (n < 3) throw std::invalid_argument("spearman needs at least 3 points");
    std::vector<double> steps(n);
    std::vector<double> scores(n);
    for (size_t i = 0; i < n; ++i) {
        steps[i] = static_cast<double>(series.points[i].step);
        scores[i] = series.points[i].score;
    }
    return pearson(average_ranks(steps), average_ranks(scores));
}

std::optional<SurpassResult> surpass_analysis(const BenchmarkSeries& series,
                                              double margin) {
    double threshold = series.baseline + margin;
    for (const EvalPoint& point : series.points) {
        if (point.score >= threshold) {
            SurpassResult result;
            result.first_step = point.step;
            result.tokens = point.tokens;
            result.score = point.score;
            result.delta = point.score - series.baseline;
            return result;
        }
    }
    return std::nullopt;
}

AggregateReport aggregate_report(std::vector<BenchmarkSeries> series, double margin) {
    if (series.empty()) throw std::invalid_argument("no benchmark series given");
    std::sort(series.begin(), series.end(),
              [](const BenchmarkSeries& a, const BenchmarkSeries& b) {
                  return a.name < b.name;
              });
    for (const BenchmarkSeries& one : series) {
        one.validate();
        if (one.points.empty()) {
            throw std::invalid_argument("benchmark " + one.name + " has no points");
        }
    }

    AggregateReport report;
    report.margin = margin;

    std::set<int64_t> step_union;
    for (const BenchmarkSeries& one : series) {
        for (const EvalPoint& point : one.points) step_union.insert(point.step);
    }

    for (int64_t step : step_union) {
        std::map<std::string, double> scores;
        BaselineTable baselines;
        double tokens = 0.0;
        bool have_tokens = false;
        for (const BenchmarkSeries& one : series) {
            auto it = std::find_if(
                one.points.begin(), one.points.end(),
                [step](const EvalPoint& point) { return point.step == step; });
            if (it == one.points.end()) continue;
            scores[one.name] = it->score;
            BaselineSpec spec;
            spec.baseline = one.baseline;
            spec.max_score = one.max_score;
            baselines.emplace(one.name, spec);
            if (!have_tokens) {
                tokens = it->tokens;
                have_tokens = true;
            }
        }
        NpmPoint point;
        point.step = step;
        point.tokens = tokens;
        point.npm = npm(scores, baselines);
        point.covered = scores.size();
        point.total = series.size();
        if (point.covered < point.total) {
            report.warnings.push_back("step " + std::to_string(step) + ": npm covers " +
                                      std::to_string(point.covered) + "/" +
                                      std::to_string(point.total) + " benchmarks");
        }
        report.npm_trajectory.push_back(point);
    }

    std::vector<const BenchmarkSeries*> noise_ready;
    for (const BenchmarkSeries& one : series) {
        if (one.points.size() >= 3) {
            noise_ready.push_back(&one);
        } else {
            report.warnings.push_back(one.name +
                                      ": too few points for noise statistics");
        }
    }
    report.noise = parallel_map(
        noise_ready,
        [](const BenchmarkSeries* one) {
            NoiseRow row;
            row.benchmark = one->name;
            row.mac = mean_abs_change(*one);
            row.snr = snr(*one);
            row.spearman = spearman(*one);
            return row;
        },
        default_thread_count());

    for (const BenchmarkSeries& one : series) {
        SurpassRow row;
        row.benchmark = one.name;
        row.baseline = one.baseline;
        row.threshold = one.baseline + margin;
        row.result = surpass_analysis(one, margin);
        report.surpass.push_back(row);
    }
    return report;
}

nlohmann::json report_to_json(const AggregateReport& report) {
    nlohmann::json j;
    j["margin"] = report.margin;
    j["npm_trajectory"] = nlohmann::json::array();
    for (const NpmPoint& point : report.npm_trajectory) {
        j["npm_trajectory"].push_back({{"step", point.step},
                                       {"tokens", point.tokens},
                                       {"npm", point.npm},
                                       {"covered", point.covered},
                                       {"total", point.total}});
    }
    j["noise"] = nlohmann::json::array();
    for (const NoiseRow& row : report.noise) {
        nlohmann::json entry = {{"benchmark", row.benchmark},
                                {"mac", row.mac},
                                {"spearman", row.spearman}};
        if (row.snr.infinite) {
            entry["snr"] = "inf";
        } else {
            entry["snr"] = row.snr.value;
        }
        j["noise"].push_back(entry);
    }
    j["surpass"] = nlohmann::json::array();
    for (const SurpassRow& row : report.surpass) {
        nlohmann::json entry = {{"benchmark", row.benchmark},
                                {"baseline", row.baseline},
                                {"threshold", row.threshold}};
        if (row.result) {
            entry["first_step"] = row.result->first_step;
            entry["tokens"] = row.result->tokens;
            entry["score"] = row.result->score;
            entry["delta"] = row.result->delta;
        } else {
            entry["first_step"] = nullptr;
        }
        j["surpass"].push_back(entry);
    }
    j["warnings"] = report.warnings;
    return j;
}

std::string npm_table(const AggregateReport& report) {
    std::vector<std::vector<std::string>> rows;
    for (const NpmPoint& point : report.npm_trajectory) {
        rows.push_back({std::to_string(point.step), fmt("%.3f", point.tokens / 1e9),
                        fmt("%.2f", point.npm),
                        std::to_string(point.covered) + "/" +
                            std::to_string(point.total)});
    }
    return render_table({"Step", "Tokens (B)", "NPM", "Coverage"}, rows);
}

std::string noise_table(const AggregateReport& report) {
    std::vector<std::vector<std::string>> rows;
    for (const NoiseRow& row : report.noise) {
        rows.push_back({row.benchmark, fmt("%.4f", row.mac), row.snr.display(),
                        fmt("%.3f", row.spearman)});
    }
    return render_table({"Benchmark", "MAC", "SNR", "Spearman"}, rows);
}

std::string surpass_table(const AggregateReport& report) {
    std::vector<std::vector<std::string>> rows;
    for (const SurpassRow& row : report.surpass) {
        if (row.result) {
            rows.push_back({row.benchmark, fmt("%.3f", row.baseline),
                            fmt("%.3f", row.threshold),
                            std::to_string(row.result->first_step),
                            fmt("%.3f", row.result->tokens / 1e9),
                            fmt("%.3f", row.result->score),
                            "+" + fmt("%.3f", row.result->delta)});
        } else {
            rows.push_back({row.benchmark, fmt("%.3f", row.baseline),
                            fmt("%.3f", row.threshold), "Not Reached", "-", "-", "-"});
        }
    }
    return render_table({"Benchmark", "Baseline", "Threshold", "First Step",
                         "Tokens (B)", "Score", "Delta"},
                        rows);
}

std::string report_text(const AggregateReport& report) {
    std::string out;
    out += "NPM trajectory\n";
    out += npm_table(report);
    out += "\nNoise statistics\n";
    out += noise_table(report);
    out += "\nBaseline surpass (margin " + fmt("%.2f", report.margin) + ")\n";
    out += surpass_table(report);
    if (!report.warnings.empty()) {
        out += "\nWarnings\n";
        for (const std::string& warning : report.warnings) {
            out += "  " + warning + "\n";
        }
    }
    return out;
}

std::string line_chart_svg(const ChartSpec& spec) {
    const double width = 640.0;
    const double height = 400.0;
    const double margin_left = 70.0;
    const double margin_right = 20.0;
    const double margin_top = 40.0;
    const double margin_bottom = 50.0;
    const double plot_w = width - margin_left - margin_right;
    const double plot_h = height - margin_top - margin_bottom;

    double min_x = 0.0;
    double max_x = 1.0;
    double min_y = 0.0;
    double max_y = 1.0;
    bool any = false;
    for (const ChartSeries& one : spec.series) {
        for (const auto& [x, y] : one.points) {
            if (!any) {
                min_x = max_x = x;
                min_y = max_y = y;
                any = true;
            } else {
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
            }
        }
    }
    if (spec.threshold) {
        min_y = std::min(min_y, *spec.threshold);
        max_y = std::max(max_y, *spec.threshold);
    }
    if (max_x == min_x) max_x = min_x + 1.0;
    if (max_y == min_y) max_y = min_y + 1.0;
    double pad_y = 0.05 * (max_y - min_y);
    min_y -= pad_y;
    max_y += pad_y;

    auto to_px = [&](double x, double y) {
        double px = margin_left + (x - min_x) / (max_x - min_x) * plot_w;
        double py = margin_top + (max_y - y) / (max_y - min_y) * plot_h;
        return std::pair<double, double>(px, py);
    };

    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
        << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << xml_escape(spec.title)
        << "</text>\n";

    svg << "<line x1=\"" << margin_left << "\" y1=\"" << margin_top + plot_h
        << "\" x2=\"" << margin_left + plot_w << "\" y2=\"" << margin_top + plot_h
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << margin_left << "\" y1=\"" << margin_top << "\" x2=\""
        << margin_left << "\" y2=\"" << margin_top + plot_h
        << "\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        double fx = min_x + (max_x - min_x) * i / 4.0;
        double fy = min_y + (max_y - min_y) * i / 4.0;
        auto [px, py_bottom] = to_px(fx, min_y);
        auto [px_left, py] = to_px(min_x, fy);
        svg << "<text x=\"" << px << "\" y=\"" << margin_top + plot_h + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
            << "font-size=\"11\">" << fmt("%g", fx) << "</text>\n";
        svg << "<text x=\"" << px_left - 8 << "\" y=\"" << py + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt("%g", fy) << "</text>\n";
    }
    svg << "<text x=\"" << margin_left + plot_w / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << xml_escape(spec.x_label) << "</text>\n";
    svg << "<text x=\"16\" y=\"" << margin_top + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << margin_top + plot_h / 2 << ")\">"
        << xml_escape(spec.y_label) << "</text>\n";

    if (spec.threshold) {
        auto [x1, y] = to_px(min_x, *spec.threshold);
        auto [x2, y2] = to_px(max_x, *spec.threshold);
        svg << "<line x1=\"" << x1 << "\" y1=\"" << y << "\" x2=\"" << x2
            << "\" y2=\"" << y2 << "\" stroke=\"#888\" stroke-dasharray=\"6 4\"/>\n";
    }

    for (size_t s = 0; s < spec.series.size(); ++s) {
        const ChartSeries& one = spec.series[s];
        if (one.points.empty()) continue;
        const char* color = kPalette[s % 4];
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : one.points) {
            auto [px, py] = to_px(x, y);
            svg << fmt("%.1f", px) << "," << fmt("%.1f", py) << " ";
        }
        svg << "\"/>\n";
        if (spec.series.size() > 1) {
            svg << "<text x=\"" << margin_left + 8 << "\" y=\""
                << margin_top + 16 + 16 * static_cast<double>(s)
                << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color
                << "\">" << xml_escape(one.label) << "</text>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace corpuskit
