#pragma once

#include <filesystem>
#include <vector>

#include "stimloss/population.hpp"
#include "stimloss/report.hpp"
#include "stimloss/simulation.hpp"

namespace stimloss {

/// Yields swept by default; the first matches the default design yield.
std::vector<double> default_yield_sweep();

struct PipelineOutput {
    Dataset dataset;
    std::vector<ChannelPopulation> populations;
    YieldRun main;
    std::vector<YieldRun> sweep;
    ReportBundle bundle;
};

/// load -> synthesize -> simulate -> aggregate. Nothing is written to disk.
PipelineOutput run_pipeline(const std::filesystem::path& config_path, const SimulationPlan& plan,
                            std::vector<double> sweep_yields = default_yield_sweep());

/// Same, on an already loaded dataset.
PipelineOutput run_pipeline(Dataset dataset, const std::string& config_label,
                            const SimulationPlan& plan,
                            std::vector<double> sweep_yields = default_yield_sweep());

}  // namespace stimloss
