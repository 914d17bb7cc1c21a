#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace stimloss {

/// 64-bit FNV-1a. Used for stream keys and content hashes; stable across
/// platforms.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;
std::uint64_t fnv1a64(std::span<const std::byte> bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

/// Mixes two keys into one stream id (splitmix64 finalizer over the pair).
std::uint64_t combine_keys(std::uint64_t a, std::uint64_t b) noexcept;

/// Reproducible random source keyed by (seed, stream_id).
///
/// The engine and its seeding (std::mt19937_64 through std::seed_seq) are
/// fully specified by the standard; the uniform, index and normal transforms
/// are implemented here rather than taken from <random>, whose distributions
/// differ between standard libraries.
class SeededRng {
public:
    SeededRng(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Independent generator for a child key, e.g. a repeat index.
    SeededRng substream(std::uint64_t key) const;

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01();

    /// Uniform integer on [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n);

    /// Standard normal draw (Marsaglia polar method).
    double standard_normal();

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace stimloss
