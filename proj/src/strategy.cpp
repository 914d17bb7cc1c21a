#include "stimloss/strategy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "stimloss/errors.hpp"
#include "stimloss/quantile.hpp"

namespace stimloss {

namespace {

// Shared by every strategy so Fixed and single-rail Stepped agree bit for bit.
ChannelLoss overhead(const ChannelEntry& entry, double v_supply) {
    const double p_loss = (v_supply - entry.v_load) * entry.i_th * 1e-6;
    return {v_supply, p_loss, efficiency(entry.p_load, p_loss)};
}

std::string volts(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v << " V";
    return ss.str();
}

}  // namespace

StrategySpec StrategySpec::stepped_explicit(std::vector<double> rails) {
    const std::size_t n = rails.size();
    return {StrategyKind::Stepped, n, RailPlacement::Explicit, std::move(rails)};
}

std::string StrategySpec::label() const {
    switch (kind) {
        case StrategyKind::Fixed: return "fixed";
        case StrategyKind::Global: return "global";
        case StrategyKind::Ideal: return "ideal";
        case StrategyKind::Stepped:
            return placement == RailPlacement::Explicit ? "stepped:explicit"
                                                        : "stepped:" + std::to_string(rail_count);
    }
    return "unknown";
}

StrategySpec parse_strategy(std::string_view token) {
    if (token == "fixed") return StrategySpec::fixed();
    if (token == "global") return StrategySpec::global();
    if (token == "ideal") return StrategySpec::ideal();
    if (token.starts_with("stepped:")) {
        const std::string_view num = token.substr(8);
        std::size_t n = 0;
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), n);
        if (ec == std::errc{} && ptr == num.data() + num.size() && n >= 1)
            return StrategySpec::stepped(n);
    }
    throw ValidationError("unknown strategy '" + std::string(token) +
                          "' (expected fixed, global, ideal or stepped:<N>)");
}

std::vector<StrategySpec> default_strategies() {
    return {StrategySpec::fixed(),      StrategySpec::global(),     StrategySpec::stepped(2),
            StrategySpec::stepped(4), StrategySpec::stepped(8), StrategySpec::ideal()};
}

void validate(const StrategySpec& spec) {
    if (spec.kind != StrategyKind::Stepped) return;
    if (spec.placement == RailPlacement::Uniform) {
        if (spec.rail_count == 0) throw ValidationError("stepped strategy needs at least 1 rail");
        return;
    }
    if (spec.explicit_rails.empty()) throw ValidationError("explicit rail list is empty");
    for (std::size_t k = 0; k < spec.explicit_rails.size(); ++k) {
        const double r = spec.explicit_rails[k];
        if (!(r > 0.0) || !std::isfinite(r))
            throw ValidationError("explicit rails must be finite and > 0");
        if (k > 0 && !(r > spec.explicit_rails[k - 1]))
            throw ValidationError("explicit rails must be strictly ascending");
    }
}

SupplyContext make_supply(const StrategySpec& spec, double v_fixed) {
    validate(spec);
    SupplyContext ctx{v_fixed, {}};
    if (spec.kind == StrategyKind::Stepped) {
        ctx.rails = spec.placement == RailPlacement::Explicit ? spec.explicit_rails
                                                              : make_rails(v_fixed, spec.rail_count);
    } else {
        ctx.rails = {v_fixed};
    }
    return ctx;
}

double fixed_supply_for_yield(std::span<const ChannelEntry> pooled, double yield) {
    if (pooled.empty()) throw InvalidArgument("fixed_supply_for_yield: empty pool");
    if (!(yield > 0.0 && yield <= 1.0)) throw InvalidArgument("yield must lie in (0, 1]");
    std::vector<double> v(pooled.size());
    std::transform(pooled.begin(), pooled.end(), v.begin(),
                   [](const ChannelEntry& e) { return e.v_load; });
    return quantile(v, yield);
}

std::vector<double> make_rails(double v_fixed, std::size_t n) {
    if (n == 0) throw InvalidArgument("rail count must be >= 1");
    if (!(v_fixed > 0.0)) throw InvalidArgument("v_fixed must be > 0");
    std::vector<double> rails(n);
    for (std::size_t k = 1; k < n; ++k)
        rails[k - 1] = static_cast<double>(k) * v_fixed / static_cast<double>(n);
    rails[n - 1] = v_fixed;
    return rails;
}

double efficiency(double p_load, double p_loss) {
    if (!(p_load > 0.0)) throw InvalidArgument("efficiency: load power must be > 0");
    return p_load / (p_load + p_loss);
}

ChannelLoss loss_fixed(const ChannelEntry& entry, double v_fixed) {
    if (entry.v_load > v_fixed)
        throw ComplianceViolation("load voltage " + volts(entry.v_load) +
                                  " exceeds fixed supply " + volts(v_fixed));
    return overhead(entry, v_fixed);
}

std::vector<ChannelLoss> loss_global(std::span<const ChannelEntry> subset) {
    if (subset.empty()) throw InvalidArgument("loss_global: empty subset");
    const double v_max =
        std::max_element(subset.begin(), subset.end(), [](const auto& a, const auto& b) {
            return a.v_load < b.v_load;
        })->v_load;
    std::vector<ChannelLoss> out;
    out.reserve(subset.size());
    for (const auto& e : subset) out.push_back(overhead(e, v_max));
    return out;
}

ChannelLoss loss_stepped(const ChannelEntry& entry, std::span<const double> rails) {
    if (rails.empty()) throw InvalidArgument("loss_stepped: no rails");
    // First rail >= v_load; an exact match picks the equal rail.
    const auto it = std::lower_bound(rails.begin(), rails.end(), entry.v_load);
    if (it == rails.end())
        throw ComplianceViolation("load voltage " + volts(entry.v_load) + " exceeds top rail " +
                                  volts(rails.back()));
    return overhead(entry, *it);
}

ChannelLoss loss_ideal(const ChannelEntry& entry) { return {entry.v_load, 0.0, 1.0}; }

std::vector<ChannelLoss> evaluate_strategy(const StrategySpec& spec,
                                           std::span<const ChannelEntry> subset,
                                           const SupplyContext& supply) {
    std::vector<ChannelLoss> out;
    out.reserve(subset.size());
    switch (spec.kind) {
        case StrategyKind::Fixed:
            for (const auto& e : subset) out.push_back(loss_fixed(e, supply.v_fixed));
            break;
        case StrategyKind::Global: return loss_global(subset);
        case StrategyKind::Stepped:
            for (const auto& e : subset) out.push_back(loss_stepped(e, supply.rails));
            break;
        case StrategyKind::Ideal:
            for (const auto& e : subset) out.push_back(loss_ideal(e));
            break;
    }
    return out;
}

}  // namespace stimloss
