#pragma once

#include <cstdint>
#include <random>

namespace pathcg {

/// SplitMix64 finaliser, used to derive independent stream keys.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream keyed by (seed, stream, substream).
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the standard.
/// Real numbers are formed from the top 53 bits directly rather than through
/// std::uniform_real_distribution, whose algorithm is implementation-defined.
class StreamRng {
  public:
    StreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0)
        : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x100000001b3ULL + substream))) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer on [lo, hi].
    int integer(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<int>(engine_() % span);
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace pathcg
