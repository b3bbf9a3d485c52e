#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace drrisk {

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Derive a child seed from a parent seed and a stream index. The mapping is
// a fixed function, so a root seed determines every derived stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) noexcept;

// xoshiro256** seeded through SplitMix64. Output is fully specified here (no
// reliance on implementation-defined std distributions), so draws are
// bit-identical across platforms and standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept;

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept;
    // Uniform on (0, 1).
    double uniform_open01() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }
    // Standard normal via the Marsaglia polar method.
    double normal() noexcept;

    // Child generator for an independent stream.
    Rng split(std::uint64_t stream) const noexcept;

private:
    std::array<std::uint64_t, 4> s_{};
    std::uint64_t seed_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Reproduces numpy's legacy RandomState(seed).uniform(lo, hi, count): MT19937
// seeded with init_genrand(seed) and 53-bit doubles from two 32-bit outputs.
class LegacyMt19937Uniform {
public:
    explicit LegacyMt19937Uniform(std::uint32_t seed);
    double next01();
    double next(double lo, double hi) { return lo + (hi - lo) * next01(); }

private:
    std::mt19937 engine_;
};

}  // namespace drrisk
