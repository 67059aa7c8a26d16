#pragma once

// Keyed random streams.
//
// Every stream is identified by (master seed, path index, stream id). The key
// is obtained by chaining SplitMix64 finalizers over the three words, so two
// streams never share state and a path can be regenerated in isolation, in
// any order, on any worker.

#include <cstdint>
#include <numbers>
#include <random>

namespace jsde {

struct SeedLineage {
    std::uint64_t master = 0;
    std::uint64_t path = 0;

    friend bool operator==(const SeedLineage&, const SeedLineage&) = default;
};

/// SplitMix64 output function (Steele, Lea, Flood).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(SeedLineage lineage, std::uint64_t stream) noexcept {
    std::uint64_t key = splitmix64_mix(lineage.master);
    key = splitmix64_mix(key ^ lineage.path);
    key = splitmix64_mix(key ^ (stream * 0xD1B54A32D192ED03ULL));
    return key;
}

/// Sub-lineage for auxiliary simulations (e.g. nested inner paths). The path
/// index is kept, the master seed is re-keyed by `tag`.
constexpr SeedLineage branch_lineage(SeedLineage lineage, std::uint64_t tag) noexcept {
    return {derive_key(lineage, 0xB5AD4ECEDA1CE2A9ULL ^ tag), lineage.path};
}

// Stream id blocks. Factor / measure indices are added to the base.
inline constexpr std::uint64_t kBrownianStream = 0x1000;
inline constexpr std::uint64_t kStableStream = 0x2000;
inline constexpr std::uint64_t kEventStream = 0x3000;
inline constexpr std::uint64_t kAuxStream = 0x4000;

class Stream {
  public:
    explicit Stream(std::uint64_t key) : engine_(key) {}
    Stream(SeedLineage lineage, std::uint64_t stream) : engine_(derive_key(lineage, stream)) {}

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() { return normal_(engine_); }

    double exponential() { return exponential_(engine_); }

    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) {
            return 0;
        }
        std::poisson_distribution<std::uint64_t> dist(mean);
        return dist(engine_);
    }

    std::mt19937_64& engine() noexcept { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::exponential_distribution<double> exponential_{1.0};
};

}  // namespace jsde
