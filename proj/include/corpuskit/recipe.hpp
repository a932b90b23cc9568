#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpuskit/toml.hpp"

namespace corpuskit {

struct ModelDims {
    int64_t n_layer = 0;
    int64_t d_model = 0;
    int64_t seq_len = 0;
    int64_t n_params_total = 0;
    int64_t n_params_nonembed = 0;

    void validate() const;
};

// C = 6 N D.
double compute_budget_6nd(double n_params, double tokens);

// C = (72 L d^2 + 12 L d l_seq) D, counting non-embedding FLOPs only.
double compute_budget_nonembed(const ModelDims& dims, double tokens);

struct ScalingHParams {
    double peak_lr = 0.0;
    double raw_batch_tokens = 0.0;
    int64_t batch_size_tokens = 0;  // nearest power of two in log-space
};

// peak_lr = 0.3118 C^-0.125, batch = 0.2920 C^0.3271 rounded to the
// nearest power of two in log-space.
ScalingHParams scaling_law_hparams(double compute_flops);

int64_t nearest_power_of_two(double value);

// R_D = max(D / U - 1, 0). Throws std::invalid_argument when U <= 0.
double repetition_factor(double total_tokens, double unique_tokens);

// Guards the diminishing-returns regime. Throws std::runtime_error
// ("repetition_cap_exceeded") unless allow_override is set.
void enforce_repetition_cap(double factor, double cap, bool allow_override);

inline constexpr double kDefaultRepetitionCap = 4.0;

enum class ScheduleKind { cosine_wsd_v01, wsd_sqrt_v02 };

std::string_view schedule_kind_name(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);

struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::cosine_wsd_v01;
    int64_t warmup_steps = 0;
    int64_t stable_steps = 0;
    int64_t decay_steps = 0;
    int64_t hold_steps = 0;
    int64_t total_steps = 0;
    double peak_lr = 0.0;
    double min_lr = 0.0;

    void validate() const;
};

// Single-stage shape: linear warmup, cosine decay to min_lr, then min_lr
// held for the final hold_fraction of all steps.
ScheduleSpec make_cosine_schedule(int64_t total_steps, int64_t warmup_steps, double peak_lr,
                                  double min_lr, double hold_fraction = 0.10);

// Multi-stage shape: linear warmup, flat peak, then a negative-sqrt
// cooldown lr(tau) = min + (peak - min)(1 - sqrt(tau)) down to min_lr.
ScheduleSpec make_wsd_sqrt_schedule(int64_t warmup_steps, int64_t stable_steps,
                                    int64_t decay_steps, double peak_lr, double min_lr = 0.0);

// Piecewise learning rate, exact at phase boundaries. Throws
// std::out_of_range when step is outside [0, total_steps].
double lr_at_step(const ScheduleSpec& spec, int64_t step);

// Per-step "step,lr" CSV for trainer ingestion, header included.
void write_schedule_csv(const ScheduleSpec& spec, std::ostream& out);

// Builds a schedule from a standalone [schedule] table; peak_lr must be
// given explicitly since there is no scaling law to default from here.
ScheduleSpec parse_schedule_config(const toml::Table& schedule_table);

struct MixtureComponent {
    std::string dataset;
    std::string subset;
    std::string language;
    double unique_tokens = 0.0;
    // Epoch multiplier applied to unique_tokens; R_D = repetition - 1.
    double repetition = 1.0;
};

struct StageSource {
    MixtureComponent component;
    double budget_tokens = 0.0;

    double applied_repetition() const { return budget_tokens / component.unique_tokens; }
};

struct StagePlan {
    std::string name;
    int64_t steps = 0;
    std::vector<StageSource> sources;
    std::map<std::string, double> language_shares;
    double total_tokens = 0.0;
};

// Budgets each source at unique_tokens x repetition and derives language
// shares. When target_shares is non-empty, each language's share must land
// within tolerance_pp percentage points or the plan is rejected with
// std::runtime_error("mixture_imbalance: ...") listing per-language deltas.
StagePlan build_stage_plan(std::string name, const std::vector<MixtureComponent>& sources,
                           const std::map<std::string, double>& target_shares,
                           double tolerance_pp = 2.0);

// Rescales source budgets so the stage totals stage_budget_tokens while
// keeping within-stage proportions; shares are unchanged.
void scale_stage_budget(StagePlan& stage, double stage_budget_tokens);

struct HardwareSpec {
    int64_t n_gpu = 0;
    double peak_flops_per_gpu = 0.0;
    double mfu = 0.0;
    double avg_node_power_kw = 0.0;
    double carbon_intensity_kg_per_kwh = 0.0;
};

struct ResourceEstimate {
    double wall_hours = 0.0;
    double gpu_hours = 0.0;
    double energy_kwh = 0.0;
    double co2_kg = 0.0;
};

double co2_from_energy(double energy_kwh, double intensity_kg_per_kwh);

// wall_hours = flops / (n_gpu * peak * mfu * 3600); energy follows the
// node power model. Throws std::invalid_argument on mfu outside (0,1] or
// non-positive inputs.
ResourceEstimate resource_estimate(double flops, int64_t n_gpu, double peak_flops_per_gpu,
                                   double mfu, double avg_node_power_kw,
                                   double carbon_intensity_kg_per_kwh);
ResourceEstimate resource_estimate(double flops, const HardwareSpec& hw);

struct RecipePlan {
    ModelDims dims;
    double target_tokens = 0.0;
    // Both budget conventions are reported; the 6ND budget on the
    // non-embedding parameter count drives the scaling-law lookups.
    double compute_budget_flops = 0.0;
    double compute_budget_nonembed_flops = 0.0;
    ScalingHParams law;
    double peak_lr = 0.0;
    int64_t batch_size_tokens = 0;
    double total_tokens = 0.0;  // total_steps x batch
    std::vector<StagePlan> stages;
    ScheduleSpec schedule;
    std::optional<HardwareSpec> hardware;
    std::optional<ResourceEstimate> resources;
};

// Builds a full plan from a TOML config with [model], [budget],
// [dataset.<id>], [stage.<name>] (mixture plus optional targets), a
// [schedule] table, and an optional [hardware] table. Stage step counts
// must add up to the schedule's total; stage budgets are steps x batch
// with within-stage mixture proportions preserved.
RecipePlan plan_recipe(const toml::Table& config);
RecipePlan plan_recipe_file(const std::string& path);

nlohmann::json plan_to_json(const RecipePlan& plan);
std::string plan_report(const RecipePlan& plan);

}  // namespace corpuskit
