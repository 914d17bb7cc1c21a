#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stimloss/distribution.hpp"
#include "stimloss/rng.hpp"

namespace stimloss {

// Canonical units inside the library: current in uA, impedance in kOhm,
// voltage in V, power in W.

/// Smallest physically meaningful steps, used as default truncation floors.
inline constexpr double kMinCurrentStepUa = 1.0;
inline constexpr double kMinImpedanceStepKohm = 0.1;

enum class Quantity { Current, Impedance };

/// Multiplier that converts a value in `unit` to the canonical unit of
/// `quantity` (uA or kOhm). Throws ValidationError for unknown or mismatched
/// units.
double unit_scale(Quantity quantity, std::string_view unit);

struct SubjectRecord {
    std::string id;
    std::string source_label;
    std::string application;
    DistributionSpec impedance;  // kOhm
    DistributionSpec threshold;  // uA
    std::string notes;
};

struct ApplicationProfile {
    std::string application;
    std::size_t total_channels = 0;
    double active_fraction = 0.2;
    std::size_t subset_size = 0;  ///< M, simultaneously active channels
};

/// round(total_channels * active_fraction), clamped to [1, total_channels].
std::size_t derived_subset_size(std::size_t total_channels, double active_fraction);

struct Dataset {
    std::vector<ApplicationProfile> applications;
    std::vector<SubjectRecord> subjects;
    std::vector<std::string> warnings;
    /// FNV-1a over the config bytes and every referenced samples file.
    std::uint64_t content_hash = 0;

    const ApplicationProfile& profile(std::string_view application) const;
};

/// Parses and validates a dataset config. Relative samples-file paths resolve
/// against `base_dir`. Throws ConfigError for malformed text and
/// ValidationError (naming the record and field) for invariant violations.
Dataset parse_dataset_config(std::string_view text, const std::filesystem::path& base_dir = {});

/// Reads `path` and forwards to parse_dataset_config.
Dataset load_dataset_config(const std::filesystem::path& path);

/// Single-column CSV with a unit header line ("kOhm", "uA", ...). Values are
/// returned in the canonical unit of `quantity`.
std::vector<double> load_samples_csv(const std::filesystem::path& path, Quantity quantity);

struct ChannelEntry {
    double i_th = 0.0;    ///< uA
    double z = 0.0;       ///< kOhm
    double v_load = 0.0;  ///< V
    double p_load = 0.0;  ///< W
};

/// Builds an entry with v_load = I Z and p_load = I^2 Z in SI units.
ChannelEntry make_entry(double i_th_ua, double z_kohm) noexcept;

struct ChannelPopulation {
    std::string subject_id;
    std::string application;
    std::vector<ChannelEntry> entries;

    std::size_t population_size() const noexcept { return entries.size(); }
};

inline constexpr std::size_t kDefaultPopulationSize = 100000;

/// Stream id for one quantity of one subject: stable hash of the subject id.
std::uint64_t subject_stream(std::string_view subject_id, std::string_view purpose);

/// Draws threshold and impedance independently, each from its own stream
/// derived from rng.seed() and the subject id, so results do not depend on
/// the order subjects are processed in.
ChannelPopulation synthesize_population(const SubjectRecord& record, std::size_t size,
                                        const SeededRng& rng);

using PooledEntries = std::map<std::string, std::vector<ChannelEntry>>;

/// Concatenates entries per application in population order. Applications
/// listed in `profiles` without any population are left out and reported in
/// `warnings`.
PooledEntries pool_by_application(std::span<const ChannelPopulation> populations,
                                  std::span<const ApplicationProfile> profiles,
                                  std::vector<std::string>* warnings = nullptr);

}  // namespace stimloss
