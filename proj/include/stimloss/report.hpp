#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "stimloss/population.hpp"
#include "stimloss/simulation.hpp"

namespace stimloss {

inline constexpr const char* kToolVersion = "0.1.0";

/// Everything that influences the numbers of a run, plus provenance.
struct RunManifest {
    std::string config_path;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    double yield = 0.75;
    std::size_t n_repeats = 0;
    std::size_t population_size = 0;
    std::vector<std::string> strategies;
    std::vector<double> explicit_rails;
    std::vector<std::pair<std::string, std::size_t>> subset_sizes;  ///< effective M
    std::vector<double> yield_sweep;
    bool strict = false;
    unsigned workers = 1;  ///< informational; never changes results
    std::string tool_version = kToolVersion;
    std::string timestamp;  ///< UTC, ISO-8601

    /// Hash over every numeric-influencing field (not timestamp or workers).
    std::uint64_t parameters_hash() const;
};

RunManifest make_manifest(const std::string& config_path, const Dataset& dataset,
                          const SimulationPlan& plan, std::vector<double> yield_sweep);

struct SupplyRow {
    std::string application;
    double yield = 0.0;
    double v_fixed = 0.0;  ///< V
    double achieved_yield = 0.0;
    std::size_t subset_size = 0;
};

struct SystemLossRow {
    std::string application;
    std::string strategy;
    std::size_t subset_size = 0;
    double median_w = 0.0;
    double iqr_w = 0.0;
    bool best = false;  ///< lowest median among non-ideal strategies
};

struct SweepRow {
    double yield = 0.0;
    std::string application;
    std::string strategy;
    double v_fixed = 0.0;
    double median_p_loss = 0.0;
    double iqr_p_loss = 0.0;
    double median_efficiency = 0.0;
    double iqr_efficiency = 0.0;
    double achieved_yield = 0.0;
};

struct DistributionPoint {
    std::string application;
    std::string quantity;  ///< "v_load_V" or "p_load_W"
    double level = 0.0;    ///< quantile level
    double value = 0.0;
};

struct SubjectScatterRow {
    std::string subject;
    std::string application;
    double median_v_load = 0.0, iqr_v_load = 0.0;  ///< V
    double median_p_load = 0.0, iqr_p_load = 0.0;  ///< W
};

struct BoxRow {
    std::string application;
    std::string strategy;
    std::string metric;  ///< "ploss_W" or "eff"
    double whisker_low = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, whisker_high = 0.0;
};

struct ReportBundle {
    RunManifest manifest;
    std::vector<LossSummary> subject_summaries;
    std::vector<LossSummary> application_summaries;
    std::vector<NormalizedRow> normalized;
    std::vector<SupplyRow> supplies;
    std::vector<SystemLossRow> system_losses;
    std::vector<SweepRow> sweep;
    std::vector<DistributionPoint> load_distributions;
    std::vector<SubjectScatterRow> subject_scatter;
    std::vector<BoxRow> boxes;
    std::vector<std::string> warnings;
};

ReportBundle build_bundle(RunManifest manifest, std::span<const ChannelPopulation> populations,
                          const YieldRun& main_run, std::span<const YieldRun> sweep);

enum class OutputFormat { Csv, Json, Both };
OutputFormat parse_output_format(std::string_view text);

/// Six significant digits, the precision of every emitted number.
std::string format_number(double value);

/// Writes `content` to a sibling temporary file and renames it into place.
/// Throws ConfigError if the directory is not writable.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// summary_subject, summary_application, normalized, v_fixed, yield_sweep and
/// system_loss tables (.csv and/or report.json).
void emit_tables(const ReportBundle& bundle, const std::filesystem::path& out_dir,
                 OutputFormat format);

/// Long-format series under out_dir/plotdata/.
void emit_plot_data(const ReportBundle& bundle, const std::filesystem::path& out_dir);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir);

/// Per-subject channel dumps and per-repeat results under out_dir/samples/.
void dump_samples(std::span<const ChannelPopulation> populations, const YieldRun& main_run,
                  const std::filesystem::path& out_dir);

nlohmann::json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);

/// JSON tree of the tables with unit annotations; numbers rounded to six
/// significant digits.
nlohmann::json to_json(const ReportBundle& bundle);
ReportBundle bundle_from_json(const nlohmann::json& j);

std::string summary_csv(std::span<const LossSummary> rows);
std::string normalized_csv(std::span<const NormalizedRow> rows);

}  // namespace stimloss
