#include "stimloss/pipeline.hpp"

#include "stimloss/errors.hpp"

namespace stimloss {

std::vector<double> default_yield_sweep() { return {0.75, 0.8, 0.85, 0.9, 0.95, 1.0}; }

PipelineOutput run_pipeline(const std::filesystem::path& config_path, const SimulationPlan& plan,
                            std::vector<double> sweep_yields) {
    validate(plan);
    return run_pipeline(load_dataset_config(config_path), config_path.string(), plan,
                        std::move(sweep_yields));
}

PipelineOutput run_pipeline(Dataset dataset, const std::string& config_label,
                            const SimulationPlan& plan, std::vector<double> sweep_yields) {
    validate(plan);
    for (double y : sweep_yields)
        if (!(y > 0.0 && y <= 1.0)) throw ValidationError("sweep yields must lie in (0, 1]");
    for (const auto& [app, m] : plan.subset_size_overrides) {
        const auto& profile = dataset.profile(app);  // throws for unknown applications
        if (m > profile.total_channels)
            throw ValidationError("subset size override for '" + app +
                                  "' exceeds total_channels");
    }

    PipelineOutput out;
    out.dataset = std::move(dataset);
    out.populations = synthesize_all(out.dataset, plan);
    out.main = run_at_yield(out.populations, out.dataset.applications, plan, plan.yield);
    out.main.warnings.insert(out.main.warnings.begin(), out.dataset.warnings.begin(),
                             out.dataset.warnings.end());
    if (!sweep_yields.empty())
        out.sweep = yield_sweep(out.populations, out.dataset.applications, plan, sweep_yields);
    out.bundle = build_bundle(make_manifest(config_label, out.dataset, plan, sweep_yields),
                              out.populations, out.main, out.sweep);
    return out;
}

}  // namespace stimloss
