#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace rllf {

std::uint64_t splitmix64(std::uint64_t x);

// FNV-1a over the bytes of `text`, finished with splitmix64.
std::uint64_t stable_hash(std::string_view text);

// Combines several key parts into one seed; order matters.
template <typename... Parts>
std::uint64_t derive_seed(const Parts&... parts) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    auto mix = [&h](std::uint64_t v) { h = splitmix64(h ^ v); };
    (mix(stable_hash(std::string_view(parts))), ...);
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    // Uniform in [0,1) with 53 random bits; identical on every platform.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    // Index drawn proportionally to non-negative weights; -1 when all are zero.
    int categorical(std::span<const double> weights);
    double normal();

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace rllf
