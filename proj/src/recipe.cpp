#include "corpuskit/recipe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "corpuskit/corpus_io.hpp"

namespace corpuskit {

namespace {

const double kPi = std::acos(-1.0);

void require_positive(double value, const char* what) {
    if (!(value > 0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

std::string fmt_double(const char* format, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, value);
    return buf;
}

std::string fmt_tokens(double tokens) {
    return fmt_double("%.1f", tokens / 1e9) + "B";
}

std::string fmt_pct(double share) {
    return fmt_double("%.1f", share * 100.0) + "%";
}

}  // namespace

void ModelDims::validate() const {
    if (n_layer <= 0 || d_model <= 0 || seq_len <= 0 || n_params_total <= 0 ||
        n_params_nonembed <= 0) {
        throw std::invalid_argument("model dims must all be positive");
    }
    if (n_params_nonembed > n_params_total) {
        throw std::invalid_argument("non-embedding params exceed total params");
    }
}

double compute_budget_6nd(double n_params, double tokens) {
    require_positive(n_params, "n_params");
    require_positive(tokens, "tokens");
    return 6.0 * n_params * tokens;
}

double compute_budget_nonembed(const ModelDims& dims, double tokens) {
    if (dims.n_layer <= 0 || dims.d_model <= 0 || dims.seq_len < 0) {
        throw std::invalid_argument("model dims must be positive (seq_len may be zero)");
    }
    require_positive(tokens, "tokens");
    double d = static_cast<double>(dims.d_model);
    double l = static_cast<double>(dims.n_layer);
    double seq = static_cast<double>(dims.seq_len);
    double per_token = 72.0 * l * d * d + 12.0 * l * d * seq;
    return per_token * tokens;
}

int64_t nearest_power_of_two(double value) {
    require_positive(value, "value");
    double exponent = std::log2(value);
    int64_t k = std::llround(exponent);
    if (k < 0) k = 0;
    return int64_t{1} << k;
}

ScalingHParams scaling_law_hparams(double compute_flops) {
    require_positive(compute_flops, "compute budget");
    ScalingHParams out;
    out.peak_lr = 0.3118 * std::pow(compute_flops, -0.125);
    out.raw_batch_tokens = 0.2920 * std::pow(compute_flops, 0.3271);
    out.batch_size_tokens = nearest_power_of_two(out.raw_batch_tokens);
    return out;
}

double repetition_factor(double total_tokens, double unique_tokens) {
    if (!(unique_tokens > 0)) throw std::invalid_argument("unique token count must be positive");
    return std::max(total_tokens / unique_tokens - 1.0, 0.0);
}

void enforce_repetition_cap(double factor, double cap, bool allow_override) {
    if (factor <= cap || allow_override) return;
    throw std::runtime_error("repetition_cap_exceeded: factor " + fmt_double("%.3f", factor) +
                             " over cap " + fmt_double("%.3f", cap));
}

std::string_view schedule_kind_name(ScheduleKind kind) {
    return kind == ScheduleKind::cosine_wsd_v01 ? "cosine_wsd_v01" : "wsd_sqrt_v02";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
    if (name == "cosine_wsd_v01") return ScheduleKind::cosine_wsd_v01;
    if (name == "wsd_sqrt_v02") return ScheduleKind::wsd_sqrt_v02;
    throw std::invalid_argument("unknown schedule kind: " + std::string(name));
}

void ScheduleSpec::validate() const {
    if (warmup_steps < 0 || stable_steps < 0 || decay_steps < 0 || hold_steps < 0) {
        throw std::invalid_argument("schedule phases must be non-negative");
    }
    if (total_steps <= 0) throw std::invalid_argument("schedule needs positive total steps");
    if (warmup_steps + stable_steps + decay_steps + hold_steps != total_steps) {
        throw std::invalid_argument("schedule phases do not sum to total steps");
    }
    if (!(peak_lr > 0)) throw std::invalid_argument("peak lr must be positive");
    if (min_lr < 0 || min_lr > peak_lr) {
        throw std::invalid_argument("min lr must lie in [0, peak lr]");
    }
}

ScheduleSpec make_cosine_schedule(int64_t total_steps, int64_t warmup_steps, double peak_lr,
                                  double min_lr, double hold_fraction) {
    if (hold_fraction < 0 || hold_fraction >= 1) {
        throw std::invalid_argument("hold fraction must lie in [0, 1)");
    }
    ScheduleSpec spec;
    spec.kind = ScheduleKind::cosine_wsd_v01;
    spec.total_steps = total_steps;
    spec.warmup_steps = warmup_steps;
    spec.hold_steps = std::llround(hold_fraction * static_cast<double>(total_steps));
    spec.stable_steps = 0;
    spec.decay_steps = total_steps - warmup_steps - spec.hold_steps;
    spec.peak_lr = peak_lr;
    spec.min_lr = min_lr;
    spec.validate();
    if (spec.decay_steps <= 0) throw std::invalid_argument("cosine span is empty");
    return spec;
}

ScheduleSpec make_wsd_sqrt_schedule(int64_t warmup_steps, int64_t stable_steps,
                                    int64_t decay_steps, double peak_lr, double min_lr) {
    ScheduleSpec spec;
    spec.kind = ScheduleKind::wsd_sqrt_v02;
    spec.warmup_steps = warmup_steps;
    spec.stable_steps = stable_steps;
    spec.decay_steps = decay_steps;
    spec.hold_steps = 0;
    spec.total_steps = warmup_steps + stable_steps + decay_steps;
    spec.peak_lr = peak_lr;
    spec.min_lr = min_lr;
    spec.validate();
    return spec;
}

double lr_at_step(const ScheduleSpec& spec, int64_t step) {
    spec.validate();
    if (step < 0 || step > spec.total_steps) {
        throw std::out_of_range("step " + std::to_string(step) + " outside schedule [0, " +
                                std::to_string(spec.total_steps) + "]");
    }

    if (step <= spec.warmup_steps) {
        if (spec.warmup_steps == 0) return spec.peak_lr;
        return spec.peak_lr * static_cast<double>(step) / static_cast<double>(spec.warmup_steps);
    }
    int64_t stable_end = spec.warmup_steps + spec.stable_steps;
    if (step <= stable_end) return spec.peak_lr;

    int64_t decay_end = stable_end + spec.decay_steps;
    if (step <= decay_end) {
        double tau = static_cast<double>(step - stable_end) /
                     static_cast<double>(spec.decay_steps);
        double range = spec.peak_lr - spec.min_lr;
        if (spec.kind == ScheduleKind::cosine_wsd_v01) {
            return spec.min_lr + range * 0.5 * (1.0 + std::cos(kPi * tau));
        }
        return spec.min_lr + range * (1.0 - std::sqrt(tau));
    }
    return spec.min_lr;
}

void write_schedule_csv(const ScheduleSpec& spec, std::ostream& out) {
    out << "step,lr\n";
    char buf[64];
    for (int64_t step = 0; step <= spec.total_steps; ++step) {
        std::snprintf(buf, sizeof(buf), "%lld,%.10g\n", static_cast<long long>(step),
                      lr_at_step(spec, step));
        out << buf;
    }
}

StagePlan build_stage_plan(std::string name, const std::vector<MixtureComponent>& sources,
                           const std::map<std::string, double>& target_shares,
                           double tolerance_pp) {
    if (sources.empty()) throw std::invalid_argument("stage has no sources");

    StagePlan stage;
    stage.name = std::move(name);
    for (const MixtureComponent& component : sources) {
        require_positive(component.unique_tokens, "unique token count");
        if (component.repetition < 0) {
            throw std::invalid_argument("repetition multiplier must be non-negative");
        }
        StageSource source;
        source.component = component;
        source.budget_tokens = component.unique_tokens * component.repetition;
        stage.total_tokens += source.budget_tokens;
        stage.sources.push_back(std::move(source));
    }
    if (!(stage.total_tokens > 0)) throw std::invalid_argument("stage has no token budget");

    for (const StageSource& source : stage.sources) {
        stage.language_shares[source.component.language] +=
            source.budget_tokens / stage.total_tokens;
    }

    if (!target_shares.empty()) {
        std::string message;
        bool violated = false;
        for (const auto& [lang, target] : target_shares) {
            auto it = stage.language_shares.find(lang);
            double actual = it == stage.language_shares.end() ? 0.0 : it->second;
            double delta_pp = (actual - target) * 100.0;
            if (std::abs(delta_pp) > tolerance_pp) violated = true;
            if (!message.empty()) message += "; ";
            message += lang + " actual " + fmt_pct(actual) + " target " + fmt_pct(target) +
                       " delta " + fmt_double("%+.2f", delta_pp) + "pp";
        }
        if (violated) throw std::runtime_error("mixture_imbalance: " + message);
    }
    return stage;
}

void scale_stage_budget(StagePlan& stage, double stage_budget_tokens) {
    require_positive(stage_budget_tokens, "stage budget");
    if (!(stage.total_tokens > 0)) throw std::invalid_argument("stage has no token budget");
    double factor = stage_budget_tokens / stage.total_tokens;
    for (StageSource& source : stage.sources) source.budget_tokens *= factor;
    stage.total_tokens = stage_budget_tokens;
}

double co2_from_energy(double energy_kwh, double intensity_kg_per_kwh) {
    require_positive(energy_kwh, "energy");
    require_positive(intensity_kg_per_kwh, "carbon intensity");
    return energy_kwh * intensity_kg_per_kwh;
}

ResourceEstimate resource_estimate(double flops, int64_t n_gpu, double peak_flops_per_gpu,
                                   double mfu, double avg_node_power_kw,
                                   double carbon_intensity_kg_per_kwh) {
    require_positive(flops, "flops");
    require_positive(static_cast<double>(n_gpu), "gpu count");
    require_positive(peak_flops_per_gpu, "peak flops");
    require_positive(avg_node_power_kw, "node power");
    require_positive(carbon_intensity_kg_per_kwh, "carbon intensity");
    if (!(mfu > 0) || mfu > 1) throw std::invalid_argument("mfu must lie in (0, 1]");

    ResourceEstimate out;
    out.wall_hours =
        flops / (static_cast<double>(n_gpu) * peak_flops_per_gpu * mfu * 3600.0);
    out.gpu_hours = out.wall_hours * static_cast<double>(n_gpu);
    out.energy_kwh = out.wall_hours * avg_node_power_kw;
    out.co2_kg = co2_from_energy(out.energy_kwh, carbon_intensity_kg_per_kwh);
    return out;
}

ResourceEstimate resource_estimate(double flops, const HardwareSpec& hw) {
    return resource_estimate(flops, hw.n_gpu, hw.peak_flops_per_gpu, hw.mfu,
                             hw.avg_node_power_kw, hw.carbon_intensity_kg_per_kwh);
}

namespace {

ModelDims read_model(const toml::Table& table) {
    ModelDims dims;
    dims.n_layer = table.get_int("n_layer");
    dims.d_model = table.get_int("d_model");
    dims.seq_len = table.get_int("seq_len");
    dims.n_params_total = std::llround(table.get_double("n_params_total"));
    dims.n_params_nonembed = std::llround(table.get_double("n_params_nonembed"));
    dims.validate();
    return dims;
}

struct DatasetEntry {
    std::string language;
    std::string subset;
    double unique_tokens = 0.0;
};

std::map<std::string, DatasetEntry> read_datasets(const toml::Table& config) {
    if (!config.has_table("dataset")) throw std::runtime_error("config needs [dataset.*] tables");
    std::map<std::string, DatasetEntry> datasets;
    for (const auto& [id, table] : config.table("dataset").tables()) {
        DatasetEntry entry;
        entry.unique_tokens = table.get_double("unique_tokens");
        entry.language = table.get_string("language");
        entry.subset = table.get_string("subset", "all");
        require_positive(entry.unique_tokens, "unique_tokens");
        datasets.emplace(id, std::move(entry));
    }
    return datasets;
}

ScheduleSpec read_schedule(const toml::Table& table, double peak_lr) {
    ScheduleKind kind = parse_schedule_kind(table.get_string("kind"));
    if (kind == ScheduleKind::cosine_wsd_v01) {
        return make_cosine_schedule(table.get_int("total_steps"), table.get_int("warmup_steps"),
                                    peak_lr, table.get_double("min_lr"),
                                    table.get_double("hold_fraction", 0.10));
    }
    return make_wsd_sqrt_schedule(table.get_int("warmup_steps"), table.get_int("stable_steps"),
                                  table.get_int("decay_steps"), peak_lr,
                                  table.get_double("min_lr", 0.0));
}

}  // namespace

ScheduleSpec parse_schedule_config(const toml::Table& schedule_table) {
    return read_schedule(schedule_table, schedule_table.get_double("peak_lr"));
}

RecipePlan plan_recipe(const toml::Table& config) {
    RecipePlan plan;
    plan.dims = read_model(config.table("model"));

    const toml::Table& budget = config.table("budget");
    plan.target_tokens = budget.get_double("target_tokens");
    require_positive(plan.target_tokens, "target_tokens");
    double cap = budget.get_double("repetition_cap", kDefaultRepetitionCap);
    bool allow_override = budget.get_bool("allow_cap_override", false);
    double tolerance_pp = budget.get_double("share_tolerance_pp", 2.0);

    plan.compute_budget_flops =
        compute_budget_6nd(static_cast<double>(plan.dims.n_params_nonembed), plan.target_tokens);
    plan.compute_budget_nonembed_flops = compute_budget_nonembed(plan.dims, plan.target_tokens);
    plan.law = scaling_law_hparams(plan.compute_budget_flops);

    const toml::Table& schedule_table = config.table("schedule");
    plan.peak_lr = schedule_table.get_double("peak_lr", plan.law.peak_lr);
    plan.batch_size_tokens =
        schedule_table.get_int("batch_size_tokens", plan.law.batch_size_tokens);
    require_positive(static_cast<double>(plan.batch_size_tokens), "batch size");
    plan.schedule = read_schedule(schedule_table, plan.peak_lr);

    std::map<std::string, DatasetEntry> datasets = read_datasets(config);

    if (!config.has_table("stage")) throw std::runtime_error("config needs [stage.*] tables");
    std::vector<std::pair<int64_t, std::string>> stage_order;
    for (const auto& [name, table] : config.table("stage").tables()) {
        stage_order.emplace_back(table.get_int("order", 0), name);
    }
    std::sort(stage_order.begin(), stage_order.end());

    int64_t steps_sum = 0;
    for (const auto& [order, name] : stage_order) {
        const toml::Table& stage_table = config.table("stage").table(name);
        int64_t steps = stage_table.get_int("steps");
        require_positive(static_cast<double>(steps), "stage steps");

        std::vector<MixtureComponent> components;
        for (const auto& [dataset_id, value] : stage_table.table("mixture").values()) {
            auto it = datasets.find(dataset_id);
            if (it == datasets.end()) {
                throw std::runtime_error("stage " + name + " references unknown dataset " +
                                         dataset_id);
            }
            MixtureComponent component;
            component.dataset = dataset_id;
            component.subset = it->second.subset;
            component.language = it->second.language;
            component.unique_tokens = it->second.unique_tokens;
            component.repetition = value.as_double();
            enforce_repetition_cap(component.repetition - 1.0, cap, allow_override);
            components.push_back(std::move(component));
        }

        std::map<std::string, double> targets;
        if (stage_table.has_table("targets")) {
            for (const auto& [lang, value] : stage_table.table("targets").values()) {
                targets[lang] = value.as_double();
            }
        }

        StagePlan stage = build_stage_plan(name, components, targets, tolerance_pp);
        stage.steps = steps;
        steps_sum += steps;
        plan.stages.push_back(std::move(stage));
    }

    if (steps_sum != plan.schedule.total_steps) {
        throw std::runtime_error("stage steps sum to " + std::to_string(steps_sum) +
                                 " but the schedule runs " +
                                 std::to_string(plan.schedule.total_steps) + " steps");
    }

    for (StagePlan& stage : plan.stages) {
        double stage_budget = static_cast<double>(stage.steps) *
                              static_cast<double>(plan.batch_size_tokens);
        scale_stage_budget(stage, stage_budget);
        for (const StageSource& source : stage.sources) {
            enforce_repetition_cap(source.applied_repetition() - 1.0, cap, allow_override);
        }
    }
    plan.total_tokens = static_cast<double>(plan.schedule.total_steps) *
                        static_cast<double>(plan.batch_size_tokens);

    if (config.has_table("hardware")) {
        const toml::Table& hw_table = config.table("hardware");
        HardwareSpec hw;
        hw.n_gpu = hw_table.get_int("n_gpu");
        hw.peak_flops_per_gpu = hw_table.get_double("peak_flops_per_gpu");
        hw.mfu = hw_table.get_double("mfu");
        hw.avg_node_power_kw = hw_table.get_double("avg_node_power_kw");
        hw.carbon_intensity_kg_per_kwh = hw_table.get_double("carbon_intensity_kg_per_kwh");
        plan.hardware = hw;
        plan.resources = resource_estimate(plan.compute_budget_flops, hw);
    }
    return plan;
}

RecipePlan plan_recipe_file(const std::string& path) {
    return plan_recipe(toml::parse_file(path));
}

nlohmann::json plan_to_json(const RecipePlan& plan) {
    nlohmann::json stages = nlohmann::json::array();
    for (const StagePlan& stage : plan.stages) {
        nlohmann::json sources = nlohmann::json::array();
        for (const StageSource& source : stage.sources) {
            sources.push_back({
                {"dataset", source.component.dataset},
                {"subset", source.component.subset},
                {"language", source.component.language},
                {"unique_tokens", source.component.unique_tokens},
                {"repetition", source.component.repetition},
                {"applied_repetition", source.applied_repetition()},
                {"budget_tokens", source.budget_tokens},
            });
        }
        stages.push_back({
            {"name", stage.name},
            {"steps", stage.steps},
            {"total_tokens", stage.total_tokens},
            {"language_shares", stage.language_shares},
            {"sources", std::move(sources)},
        });
    }

    nlohmann::json j = {
        {"model",
         {{"n_layer", plan.dims.n_layer},
          {"d_model", plan.dims.d_model},
          {"seq_len", plan.dims.seq_len},
          {"n_params_total", plan.dims.n_params_total},
          {"n_params_nonembed", plan.dims.n_params_nonembed}}},
        {"target_tokens", plan.target_tokens},
        {"compute_budget_flops", plan.compute_budget_flops},
        {"compute_budget_nonembed_flops", plan.compute_budget_nonembed_flops},
        {"scaling_law",
         {{"peak_lr", plan.law.peak_lr},
          {"raw_batch_tokens", plan.law.raw_batch_tokens},
          {"batch_size_tokens", plan.law.batch_size_tokens}}},
        {"peak_lr", plan.peak_lr},
        {"batch_size_tokens", plan.batch_size_tokens},
        {"total_tokens", plan.total_tokens},
        {"schedule",
         {{"kind", std::string(schedule_kind_name(plan.schedule.kind))},
          {"warmup_steps", plan.schedule.warmup_steps},
          {"stable_steps", plan.schedule.stable_steps},
          {"decay_steps", plan.schedule.decay_steps},
          {"hold_steps", plan.schedule.hold_steps},
          {"total_steps", plan.schedule.total_steps},
          {"peak_lr", plan.schedule.peak_lr},
          {"min_lr", plan.schedule.min_lr}}},
        {"stages", std::move(stages)},
    };
    if (plan.hardware) {
        j["hardware"] = {
            {"n_gpu", plan.hardware->n_gpu},
            {"peak_flops_per_gpu", plan.hardware->peak_flops_per_gpu},
            {"mfu", plan.hardware->mfu},
            {"avg_node_power_kw", plan.hardware->avg_node_power_kw},
            {"carbon_intensity_kg_per_kwh", plan.hardware->carbon_intensity_kg_per_kwh},
        };
    }
    if (plan.resources) {
        j["resources"] = {
            {"wall_hours", plan.resources->wall_hours},
            {"gpu_hours", plan.resources->gpu_hours},
            {"energy_kwh", plan.resources->energy_kwh},
            {"co2_kg", plan.resources->co2_kg},
        };
    }
    return j;
}

std::string plan_report(const RecipePlan& plan) {
    std::string out;
    out += "Training recipe plan (" + std::string(schedule_kind_name(plan.schedule.kind)) +
           ")\n";
    out += "Model: " + std::to_string(plan.dims.n_layer) + " layers, d_model " +
           std::to_string(plan.dims.d_model) + ", seq len " +
           std::to_string(plan.dims.seq_len) + ", params " +
           with_thousands(static_cast<uint64_t>(plan.dims.n_params_total)) + " total / " +
           with_thousands(static_cast<uint64_t>(plan.dims.n_params_nonembed)) +
           " non-embedding\n";
    out += "Compute budget: " + fmt_double("%.4g", plan.compute_budget_flops) +
           " FLOPs (6ND on " + fmt_tokens(plan.target_tokens) + " target tokens); " +
           fmt_double("%.4g", plan.compute_budget_nonembed_flops) +
           " FLOPs by the non-embedding formula\n";
    out += "Scaling law: peak lr " + fmt_double("%.4g", plan.law.peak_lr) + ", raw batch " +
           fmt_double("%.4g", plan.law.raw_batch_tokens) + " tokens -> " +
           with_thousands(static_cast<uint64_t>(plan.law.batch_size_tokens)) + "\n";
    out += "Applied: peak lr " + fmt_double("%.4g", plan.peak_lr) + ", batch " +
           with_thousands(static_cast<uint64_t>(plan.batch_size_tokens)) + " tokens\n";
    out += "Schedule: warmup " + with_thousands(static_cast<uint64_t>(plan.schedule.warmup_steps)) +
           ", stable " + with_thousands(static_cast<uint64_t>(plan.schedule.stable_steps)) +
           ", decay " + with_thousands(static_cast<uint64_t>(plan.schedule.decay_steps)) +
           ", hold " + with_thousands(static_cast<uint64_t>(plan.schedule.hold_steps)) +
           ", total " + with_thousands(static_cast<uint64_t>(plan.schedule.total_steps)) +
           " steps; min lr " + fmt_double("%.4g", plan.schedule.min_lr) + "\n";
    out += "Planned tokens: " + fmt_tokens(plan.total_tokens) + "\n";

    for (const StagePlan& stage : plan.stages) {
        out += "Stage " + stage.name + ": " +
               with_thousands(static_cast<uint64_t>(stage.steps)) + " steps, " +
               fmt_tokens(stage.total_tokens) + "; shares";
        for (const auto& [lang, share] : stage.language_shares) {
            out += " " + lang + " " + fmt_pct(share);
        }
        out += "\n";
        for (const StageSource& source : stage.sources) {
            out += "  - " + source.component.dataset + " (" + source.component.language + ", " +
                   source.component.subset + "): unique " +
                   fmt_tokens(source.component.unique_tokens) + ", x" +
                   fmt_double("%.2f", source.applied_repetition()) + ", budget " +
                   fmt_tokens(source.budget_tokens) + "\n";
        }
    }

    if (plan.resources) {
        out += "Resources: wall " + fmt_double("%.1f", plan.resources->wall_hours) +
               " h, GPU-hours " + fmt_double("%.1f", plan.resources->gpu_hours) + ", energy " +
               fmt_double("%.2f", plan.resources->energy_kwh) + " kWh, CO2 " +
               fmt_double("%.2f", plan.resources->co2_kg) + " kg\n";
    }
    return out;
}

}  // namespace corpuskit
