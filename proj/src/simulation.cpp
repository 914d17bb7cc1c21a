#include "stimloss/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_set>

#include "stimloss/errors.hpp"
#include "stimloss/quantile.hpp"

namespace stimloss {

namespace {

// Runs fn(i) for i in [0, count) on `workers` threads. Output slots are
// indexed by i, so scheduling never affects results. The exception from the
// lowest failing index is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::size_t err_index = std::numeric_limits<std::size_t>::max();
    std::exception_ptr err;
    auto body = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (i < err_index) {
                    err_index = i;
                    err = std::current_exception();
                }
            }
        }
    };
    const unsigned n = std::min<std::size_t>(workers, count);
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(body);
    pool.clear();  // joins
    if (err) std::rethrow_exception(err);
}

// Floyd's algorithm: m distinct indices out of [0, n).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, SeededRng& rng) {
    std::vector<std::size_t> picked;
    picked.reserve(m);
    std::unordered_set<std::size_t> seen;
    seen.reserve(m * 2);
    for (std::size_t j = n - m; j < n; ++j) {
        const auto t = static_cast<std::size_t>(rng.uniform_index(j + 1));
        const std::size_t chosen = seen.contains(t) ? j : t;
        seen.insert(chosen);
        picked.push_back(chosen);
    }
    return picked;
}

std::uint64_t hash_subset(std::span<const ChannelEntry> subset) {
    return fnv1a64(std::as_bytes(subset));
}

double fraction_within(std::span<const ChannelEntry> entries, double v_fixed) {
    if (entries.empty()) return 0.0;
    const auto n = std::count_if(entries.begin(), entries.end(),
                                 [&](const ChannelEntry& e) { return e.v_load <= v_fixed; });
    return static_cast<double>(n) / static_cast<double>(entries.size());
}

}  // namespace

void validate(const SimulationPlan& plan) {
    if (plan.strategies.empty()) throw ValidationError("plan has no strategies");
    std::set<std::string> labels;
    for (const auto& s : plan.strategies) {
        validate(s);
        if (!labels.insert(s.label()).second)
            throw ValidationError("strategy '" + s.label() + "' listed twice");
    }
    if (plan.n_repeats == 0) throw ValidationError("n_repeats must be >= 1");
    if (!(plan.yield > 0.0 && plan.yield <= 1.0)) throw ValidationError("yield must lie in (0, 1]");
    if (plan.population_size == 0) throw ValidationError("population size must be >= 1");
    for (const auto& [app, m] : plan.subset_size_overrides)
        if (m == 0) throw ValidationError("subset size override for '" + app + "' must be >= 1");
}

ApplicationProfile effective_profile(const ApplicationProfile& profile, const SimulationPlan& plan) {
    ApplicationProfile p = profile;
    if (auto it = plan.subset_size_overrides.find(p.application);
        it != plan.subset_size_overrides.end())
        p.subset_size = it->second;
    return p;
}

std::vector<RepeatResult> run_subject(const ChannelPopulation& population,
                                      const ApplicationProfile& profile,
                                      const SimulationPlan& plan, double v_fixed) {
    validate(plan);
    const std::size_t m = effective_profile(profile, plan).subset_size;
    if (m == 0) throw ValidationError("subset size must be >= 1");

    std::vector<ChannelEntry> eligible;
    eligible.reserve(population.entries.size());
    for (const auto& e : population.entries)
        if (e.v_load <= v_fixed) eligible.push_back(e);
    if (eligible.size() < m) throw InsufficientChannels(population.subject_id, eligible.size(), m);

    std::vector<SupplyContext> supplies;
    supplies.reserve(plan.strategies.size());
    for (const auto& s : plan.strategies) {
        supplies.push_back(make_supply(s, v_fixed));
        if (supplies.back().rails.back() < v_fixed)
            throw ValidationError("strategy '" + s.label() + "': top rail is below V_fixed");
    }

    const std::size_t n_strategies = plan.strategies.size();
    std::vector<RepeatResult> results(plan.n_repeats * n_strategies);
    const std::uint64_t subset_key = subject_stream(population.subject_id, "subset");

    parallel_for(plan.n_repeats, plan.workers, [&](std::size_t r) {
        SeededRng rng(plan.seed, combine_keys(subset_key, r));
        std::vector<ChannelEntry> subset;
        subset.reserve(m);
        for (std::size_t idx : sample_without_replacement(eligible.size(), m, rng))
            subset.push_back(eligible[idx]);

        for (std::size_t s = 0; s < n_strategies; ++s) {
            const std::span<const ChannelEntry> view(subset);
            const auto losses = evaluate_strategy(plan.strategies[s], view, supplies[s]);
            double loss_sum = 0.0, eff_sum = 0.0, load_sum = 0.0, supply_max = 0.0;
            for (std::size_t k = 0; k < losses.size(); ++k) {
                loss_sum += losses[k].p_loss;
                eff_sum += losses[k].efficiency;
                load_sum += view[k].p_load;
                supply_max = std::max(supply_max, losses[k].v_supply_used);
            }
            const auto count = static_cast<double>(losses.size());
            RepeatResult& out = results[r * n_strategies + s];
            out.subject_id = population.subject_id;
            out.strategy = plan.strategies[s].label();
            out.repeat_index = r;
            out.mean_p_loss = loss_sum / count;
            out.mean_efficiency = eff_sum / count;
            out.energy_weighted_efficiency = load_sum / (load_sum + loss_sum);
            out.supply_used = supply_max;
            out.subset_hash = hash_subset(view);
        }
    });
    return results;
}

std::vector<LossSummary> aggregate(std::span<const RepeatResult> results, Grouping grouping,
                                   const std::string& group) {
    if (results.empty()) throw InvalidArgument("aggregate: no results for '" + group + "'");
    struct Columns {
        std::vector<double> loss, eff, weighted;
    };
    std::vector<std::string> order;
    std::map<std::string, Columns> by_strategy;
    for (const auto& r : results) {
        auto [it, inserted] = by_strategy.try_emplace(r.strategy);
        if (inserted) order.push_back(r.strategy);
        it->second.loss.push_back(r.mean_p_loss);
        it->second.eff.push_back(r.mean_efficiency);
        it->second.weighted.push_back(r.energy_weighted_efficiency);
    }
    std::vector<LossSummary> out;
    for (const auto& name : order) {
        const Columns& c = by_strategy.at(name);
        LossSummary s;
        s.group = group;
        s.grouping = grouping;
        s.strategy = name;
        s.median_p_loss = median(c.loss);
        s.iqr_p_loss = iqr(c.loss);
        s.median_efficiency = median(c.eff);
        s.iqr_efficiency = iqr(c.eff);
        s.median_energy_weighted_efficiency = median(c.weighted);
        s.n_repeats = c.loss.size();
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<NormalizedRow> normalize_to_fixed(std::span<const LossSummary> summaries) {
    std::vector<std::string> apps;
    for (const auto& s : summaries)
        if (std::find(apps.begin(), apps.end(), s.group) == apps.end()) apps.push_back(s.group);

    std::vector<NormalizedRow> rows;
    for (const auto& app : apps) {
        const auto ref = std::find_if(summaries.begin(), summaries.end(), [&](const auto& s) {
            return s.group == app && s.strategy == "fixed";
        });
        if (ref == summaries.end())
            throw ValidationError("application '" + app + "' has no fixed-supply baseline");
        for (const auto& s : summaries) {
            if (s.group != app || s.strategy == "ideal") continue;
            NormalizedRow row{app, s.strategy, 1.0, 1.0};
            if (s.strategy != "fixed") {
                row.efficiency_ratio = s.median_efficiency / ref->median_efficiency;
                row.loss_ratio = s.median_p_loss / ref->median_p_loss;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

SystemLoss total_system_loss(const LossSummary& summary, const ApplicationProfile& profile) {
    const auto m = static_cast<double>(profile.subset_size);
    return {summary.median_p_loss * m, summary.iqr_p_loss * m};
}

const LossSummary& ApplicationResult::summary(std::string_view strategy) const {
    for (const auto& s : summaries)
        if (s.strategy == strategy) return s;
    throw InvalidArgument("no summary for strategy '" + std::string(strategy) + "'");
}

const ApplicationResult& YieldRun::application(std::string_view name) const {
    for (const auto& a : applications)
        if (a.profile.application == name) return a;
    throw InvalidArgument("no result for application '" + std::string(name) + "'");
}

std::vector<ChannelPopulation> synthesize_all(const Dataset& dataset, const SimulationPlan& plan) {
    validate(plan);
    std::vector<ChannelPopulation> pops(dataset.subjects.size());
    const SeededRng root(plan.seed, 0);
    parallel_for(pops.size(), plan.workers, [&](std::size_t i) {
        pops[i] = synthesize_population(dataset.subjects[i], plan.population_size, root);
    });
    return pops;
}

YieldRun run_at_yield(std::span<const ChannelPopulation> populations,
                      std::span<const ApplicationProfile> profiles, const SimulationPlan& plan,
                      double yield, bool keep_repeats) {
    SimulationPlan at = plan;
    at.yield = yield;
    validate(at);

    YieldRun run;
    run.yield = yield;
    const PooledEntries pooled = pool_by_application(populations, profiles, &run.warnings);

    std::vector<LossSummary> app_summaries;
    for (const auto& base : profiles) {
        auto pool_it = pooled.find(base.application);
        if (pool_it == pooled.end()) continue;

        ApplicationResult app;
        app.profile = effective_profile(base, at);
        app.v_fixed = fixed_supply_for_yield(pool_it->second, yield);
        app.achieved_yield = fraction_within(pool_it->second, app.v_fixed);

        std::vector<RepeatResult> all;
        std::exception_ptr last_failure;
        for (const auto& pop : populations) {
            if (pop.application != base.application) continue;
            try {
                auto repeats = run_subject(pop, app.profile, at, app.v_fixed);
                auto subj = aggregate(repeats, Grouping::Subject, pop.subject_id);
                const double subject_yield = fraction_within(pop.entries, app.v_fixed);
                for (auto& s : subj) s.achieved_yield = subject_yield;
                app.subject_summaries.insert(app.subject_summaries.end(), subj.begin(), subj.end());
                all.insert(all.end(), std::make_move_iterator(repeats.begin()),
                           std::make_move_iterator(repeats.end()));
                app.subjects.push_back(pop.subject_id);
            } catch (const InsufficientChannels& e) {
                if (at.strict) throw;
                last_failure = std::current_exception();
                app.excluded_subjects.push_back(pop.subject_id);
                run.warnings.push_back(std::string(e.what()) + "; subject excluded at yield " +
                                       std::to_string(yield));
            }
        }
        if (app.subjects.empty()) std::rethrow_exception(last_failure);

        app.summaries = aggregate(all, Grouping::Application, app.profile.application);
        for (auto& s : app.summaries) s.achieved_yield = app.achieved_yield;
        app_summaries.insert(app_summaries.end(), app.summaries.begin(), app.summaries.end());
        if (keep_repeats) app.repeats = std::move(all);
        run.applications.push_back(std::move(app));
    }

    const bool has_fixed = std::any_of(at.strategies.begin(), at.strategies.end(), [](const auto& s) {
        return s.kind == StrategyKind::Fixed;
    });
    if (has_fixed)
        run.normalized = normalize_to_fixed(app_summaries);
    else
        run.warnings.push_back("no fixed strategy in plan; normalized table not produced");
    return run;
}

std::vector<YieldRun> yield_sweep(std::span<const ChannelPopulation> populations,
                                  std::span<const ApplicationProfile> profiles,
                                  const SimulationPlan& plan, std::span<const double> yields) {
    if (yields.empty()) throw ValidationError("yield sweep needs at least one yield");
    std::vector<YieldRun> runs;
    runs.reserve(yields.size());
    for (double y : yields) runs.push_back(run_at_yield(populations, profiles, plan, y, false));
    return runs;
}

}  // namespace stimloss
