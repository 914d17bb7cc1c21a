// Command-line front end: `stimloss run --config <file> ...`

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stimloss/errors.hpp"
#include "stimloss/pipeline.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 2, kValidationError = 3, kSimulationError = 4 };

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) parts.push_back(item);
    return parts;
}

double parse_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size()) throw stimloss::ValidationError(what + ": not a number: '" + s + "'");
    return v;
}

std::string human_power(double watts) {
    char buf[32];
    if (watts >= 1e-3)
        std::snprintf(buf, sizeof buf, "%8.3f mW", watts * 1e3);
    else
        std::snprintf(buf, sizeof buf, "%8.1f uW", watts * 1e6);
    return buf;
}

void print_console_summary(const stimloss::PipelineOutput& out) {
    for (const auto& app : out.main.applications) {
        std::printf("%s  V_fixed %.2f V  (yield %.2f, M = %zu, %zu subjects",
                    app.profile.application.c_str(), app.v_fixed, app.achieved_yield,
                    app.profile.subset_size, app.subjects.size());
        if (!app.excluded_subjects.empty())
            std::printf(", %zu excluded", app.excluded_subjects.size());
        std::printf(")\n");
        for (const auto& s : app.summaries)
            std::printf("  %-17s loss/channel %s   efficiency %5.1f %%\n", s.strategy.c_str(),
                        human_power(s.median_p_loss).c_str(), s.median_efficiency * 100.0);
    }
}

struct RunOptions {
    std::string config;
    double yield = 0.75;
    std::size_t repeats = 1000;
    std::uint64_t seed = 0;
    std::size_t population_size = stimloss::kDefaultPopulationSize;
    std::string strategies = "fixed,global,stepped:2,stepped:4,stepped:8,ideal";
    std::string rails_explicit;
    std::vector<std::string> subset_sizes;
    std::string yield_sweep = "0.75,0.8,0.85,0.9,0.95,1.0";
    std::string out_dir = "stimloss_out";
    std::string format = "csv";
    bool dump_samples = false;
    bool strict = false;
    bool quiet = false;
    unsigned workers = 1;
};

stimloss::SimulationPlan build_plan(const RunOptions& o) {
    stimloss::SimulationPlan plan;
    plan.yield = o.yield;
    plan.n_repeats = o.repeats;
    plan.seed = o.seed;
    plan.population_size = o.population_size;
    plan.workers = o.workers;
    plan.strict = o.strict;
    plan.strategies.clear();
    for (const auto& tok : split(o.strategies, ','))
        plan.strategies.push_back(stimloss::parse_strategy(tok));
    if (!o.rails_explicit.empty()) {
        std::vector<double> rails;
        for (const auto& tok : split(o.rails_explicit, ','))
            rails.push_back(parse_double(tok, "--rails-explicit"));
        plan.strategies.push_back(stimloss::StrategySpec::stepped_explicit(std::move(rails)));
    }
    for (const auto& item : o.subset_sizes) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw stimloss::ValidationError("--subset-size expects app=M, got '" + item + "'");
        const std::string m = item.substr(eq + 1);
        if (m.empty() || m.find_first_not_of("0123456789") != std::string::npos)
            throw stimloss::ValidationError("--subset-size: '" + m + "' is not a count");
        plan.subset_size_overrides[item.substr(0, eq)] = std::stoull(m);
    }
    stimloss::validate(plan);
    return plan;
}

int run(const RunOptions& o) {
    const stimloss::SimulationPlan plan = build_plan(o);
    const auto format = stimloss::parse_output_format(o.format);
    std::vector<double> sweep;
    for (const auto& tok : split(o.yield_sweep, ','))
        sweep.push_back(parse_double(tok, "--yield-sweep"));

    const auto out = stimloss::run_pipeline(o.config, plan, sweep);
    for (const auto& w : out.main.warnings) std::cerr << "warning: " << w << '\n';

    const std::filesystem::path dir = o.out_dir;
    stimloss::emit_tables(out.bundle, dir, format);
    stimloss::emit_plot_data(out.bundle, dir);
    if (o.dump_samples) stimloss::dump_samples(out.populations, out.main, dir);
    stimloss::write_manifest(out.bundle.manifest, dir);
    if (!o.quiet) print_console_summary(out);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Output-stage power losses of multichannel stimulators under supply strategies"};
    app.require_subcommand(1);
    RunOptions o;
    auto* cmd = app.add_subcommand("run", "Simulate every application in a dataset config");
    cmd->add_option("--config", o.config, "Dataset config (JSON)")->required();
    cmd->add_option("--yield", o.yield, "Channel yield that sets V_fixed, in (0, 1]");
    cmd->add_option("--repeats", o.repeats, "Monte Carlo repeats per subject");
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--population-size", o.population_size, "Channels synthesized per subject");
    cmd->add_option("--strategies", o.strategies,
                    "Comma list of fixed, global, ideal, stepped:<N>");
    cmd->add_option("--rails-explicit", o.rails_explicit,
                    "Comma list of ascending rail voltages (adds stepped:explicit)");
    cmd->add_option("--subset-size", o.subset_sizes, "Override M per application: app=M");
    cmd->add_option("--yield-sweep", o.yield_sweep, "Comma list of yields for the sweep");
    cmd->add_option("--out", o.out_dir, "Output directory");
    cmd->add_option("--format", o.format, "csv, json or both");
    cmd->add_flag("--dump-samples", o.dump_samples, "Also write per-subject channel samples");
    cmd->add_option("--workers", o.workers, "Worker threads (results do not depend on it)");
    cmd->add_flag("--strict", o.strict,
                  "Fail instead of excluding subjects that cannot fill a subset");
    cmd->add_flag("--quiet", o.quiet, "No console summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidationError;
    }

    try {
        return run(o);
    } catch (const stimloss::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const stimloss::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidationError;
    } catch (const stimloss::InvalidArgument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidationError;
    } catch (const stimloss::Error& e) {
        std::cerr << "simulation error: " << e.what() << '\n';
        return kSimulationError;
    }
}
