#pragma once

#include <cstdint>
#include <random>

namespace blindspot {

// splitmix64 step; used to derive independent sub-stream seeds from one
// campaign seed so that adding a consumer never shifts another's stream.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t counter) {
    return splitmix64(splitmix64(base ^ (0x517cc1b727220a95ULL * stream)) ^ counter);
}

// Deterministic RNG wrapper. mt19937_64 is fully specified by the standard,
// and all distributions below are implemented here (std:: distributions are
// implementation-defined), so sequences are identical across platforms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n); unbiased via rejection.
    std::uint64_t index(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace blindspot
