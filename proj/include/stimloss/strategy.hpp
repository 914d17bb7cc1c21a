#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stimloss/population.hpp"

namespace stimloss {

enum class StrategyKind { Fixed, Global, Stepped, Ideal };
enum class RailPlacement { Uniform, Explicit };

struct StrategySpec {
    StrategyKind kind = StrategyKind::Fixed;
    std::size_t rail_count = 1;  ///< Stepped only
    RailPlacement placement = RailPlacement::Uniform;
    std::vector<double> explicit_rails;  ///< V, strictly ascending

    static StrategySpec fixed() { return {StrategyKind::Fixed, 1, RailPlacement::Uniform, {}}; }
    static StrategySpec global() { return {StrategyKind::Global, 1, RailPlacement::Uniform, {}}; }
    static StrategySpec ideal() { return {StrategyKind::Ideal, 1, RailPlacement::Uniform, {}}; }
    static StrategySpec stepped(std::size_t n) {
        return {StrategyKind::Stepped, n, RailPlacement::Uniform, {}};
    }
    static StrategySpec stepped_explicit(std::vector<double> rails);

    /// "fixed", "global", "stepped:4", "stepped:explicit", "ideal".
    std::string label() const;

    friend bool operator==(const StrategySpec&, const StrategySpec&) = default;
};

/// Parses the labels produced by StrategySpec::label (except the explicit
/// form, which needs its rails). Throws ValidationError.
StrategySpec parse_strategy(std::string_view token);

/// Fixed, Global, Stepped 2/4/8, Ideal.
std::vector<StrategySpec> default_strategies();

/// Throws ValidationError on rail_count 0 or non-ascending / non-positive
/// explicit rails.
void validate(const StrategySpec& spec);

struct SupplyContext {
    double v_fixed = 0.0;
    std::vector<double> rails;  ///< ascending, V
};

/// Supply context a strategy runs under for a given application V_fixed.
SupplyContext make_supply(const StrategySpec& spec, double v_fixed);

struct ChannelLoss {
    double v_supply_used = 0.0;  ///< V
    double p_loss = 0.0;         ///< W
    double efficiency = 1.0;
};

/// V_fixed at a channel yield: the `yield` quantile of pooled load voltages.
double fixed_supply_for_yield(std::span<const ChannelEntry> pooled, double yield);

/// Uniform rails k * v_fixed / N for k = 1..N; the top rail is exactly v_fixed.
std::vector<double> make_rails(double v_fixed, std::size_t n);

/// p_load / (p_load + p_loss). Throws InvalidArgument unless p_load > 0.
double efficiency(double p_load, double p_loss);

ChannelLoss loss_fixed(const ChannelEntry& entry, double v_fixed);
std::vector<ChannelLoss> loss_global(std::span<const ChannelEntry> subset);
ChannelLoss loss_stepped(const ChannelEntry& entry, std::span<const double> rails);
ChannelLoss loss_ideal(const ChannelEntry& entry);

/// Evaluates one strategy on a subset; output is index-aligned with `subset`.
std::vector<ChannelLoss> evaluate_strategy(const StrategySpec& spec,
                                           std::span<const ChannelEntry> subset,
                                           const SupplyContext& supply);

}  // namespace stimloss
