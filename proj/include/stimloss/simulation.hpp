#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stimloss/population.hpp"
#include "stimloss/strategy.hpp"

namespace stimloss {

/// Parameters of one Monte Carlo run.
struct SimulationPlan {
    std::vector<StrategySpec> strategies = default_strategies();
    double yield = 0.75;
    std::size_t n_repeats = 1000;
    std::map<std::string, std::size_t> subset_size_overrides;  ///< application -> M
    std::uint64_t seed = 0;
    std::size_t population_size = kDefaultPopulationSize;
    unsigned workers = 1;
    /// Abort instead of excluding subjects that cannot fill a subset.
    bool strict = false;
};

/// Throws ValidationError on an empty strategy list, duplicate strategies,
/// n_repeats == 0, yield outside (0, 1] or a zero population size.
void validate(const SimulationPlan& plan);

/// Profile with the plan's subset-size override applied.
ApplicationProfile effective_profile(const ApplicationProfile& profile, const SimulationPlan& plan);

struct RepeatResult {
    std::string subject_id;
    std::string strategy;
    std::size_t repeat_index = 0;
    double mean_p_loss = 0.0;  ///< W per channel
    double mean_efficiency = 1.0;
    /// sum(P_load) / sum(P_load + P_loss) over the subset.
    double energy_weighted_efficiency = 1.0;
    /// Highest supply voltage any channel of the subset was connected to.
    double supply_used = 0.0;
    /// Hash of the subset the strategy was evaluated on.
    std::uint64_t subset_hash = 0;
};

/// Runs plan.n_repeats subset draws for one subject. Each repeat draws M
/// channels without replacement from the entries with v_load <= v_fixed,
/// using a stream keyed by (subject, repeat index), and evaluates every
/// strategy on that same subset. Output is repeat-major, strategies in plan
/// order. Throws InsufficientChannels if fewer than M channels fit.
std::vector<RepeatResult> run_subject(const ChannelPopulation& population,
                                      const ApplicationProfile& profile,
                                      const SimulationPlan& plan, double v_fixed);

enum class Grouping { Subject, Application };

struct LossSummary {
    std::string group;
    Grouping grouping = Grouping::Subject;
    std::string strategy;
    double median_p_loss = 0.0;  ///< W
    double iqr_p_loss = 0.0;     ///< W
    double median_efficiency = 0.0;
    double iqr_efficiency = 0.0;
    double median_energy_weighted_efficiency = 0.0;
    double achieved_yield = 0.0;
    std::size_t n_repeats = 0;
};

/// One summary per strategy (first-seen order) over the repeat-level means
/// in `results`. achieved_yield is left at 0 for the caller to fill in.
std::vector<LossSummary> aggregate(std::span<const RepeatResult> results, Grouping grouping,
                                   const std::string& group);

struct NormalizedRow {
    std::string application;
    std::string strategy;
    double efficiency_ratio = 1.0;  ///< eta / eta_fixed
    double loss_ratio = 1.0;        ///< P_loss / P_loss,fixed
};

/// Ratios of application-level medians to the Fixed strategy of the same
/// application. Ideal is omitted. Throws ValidationError when an application
/// lacks a Fixed summary.
std::vector<NormalizedRow> normalize_to_fixed(std::span<const LossSummary> summaries);

struct SystemLoss {
    double median_w = 0.0;
    double iqr_w = 0.0;
};

/// Per-channel median and IQR scaled by the number of simultaneously active
/// channels.
SystemLoss total_system_loss(const LossSummary& summary, const ApplicationProfile& profile);

struct ApplicationResult {
    ApplicationProfile profile;  ///< effective subset size
    double v_fixed = 0.0;
    double achieved_yield = 0.0;
    std::vector<std::string> subjects;           ///< evaluated
    std::vector<std::string> excluded_subjects;  ///< could not fill a subset
    std::vector<LossSummary> summaries;          ///< application grouping
    std::vector<LossSummary> subject_summaries;
    std::vector<RepeatResult> repeats;           ///< empty unless kept

    const LossSummary& summary(std::string_view strategy) const;
};

struct YieldRun {
    double yield = 0.0;
    std::vector<ApplicationResult> applications;
    std::vector<NormalizedRow> normalized;
    std::vector<std::string> warnings;

    const ApplicationResult& application(std::string_view name) const;
};

/// One population per subject, synthesized with plan.seed. Subjects are
/// independent streams, so the result does not depend on plan.workers.
std::vector<ChannelPopulation> synthesize_all(const Dataset& dataset, const SimulationPlan& plan);

/// The full pipeline at one yield: V_fixed per application from the pooled
/// population, per-subject Monte Carlo, aggregation and normalization.
YieldRun run_at_yield(std::span<const ChannelPopulation> populations,
                      std::span<const ApplicationProfile> profiles, const SimulationPlan& plan,
                      double yield, bool keep_repeats = true);

/// run_at_yield for every yield (repeat-level data dropped).
std::vector<YieldRun> yield_sweep(std::span<const ChannelPopulation> populations,
                                  std::span<const ApplicationProfile> profiles,
                                  const SimulationPlan& plan, std::span<const double> yields);

}  // namespace stimloss
