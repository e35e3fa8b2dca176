#pragma once

// Counter-based random streams (Philox4x32-10).
//
// Every Monte Carlo walk owns a stream keyed by (seed, stream_id). Draw i of
// stream s is a pure function of (seed, s, i), so estimates do not depend on
// execution order or thread count.

#include <array>
#include <cmath>
#include <cstdint>

namespace fraclab {

namespace detail {

inline constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<uint32_t, 4>& ctr, uint32_t k0, uint32_t k1) {
    const uint64_t p0 = static_cast<uint64_t>(kPhiloxM0) * ctr[0];
    const uint64_t p1 = static_cast<uint64_t>(kPhiloxM1) * ctr[2];
    const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
    const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
}

inline std::array<uint32_t, 4> philox10(std::array<uint32_t, 4> ctr, uint32_t k0, uint32_t k1) {
    for (int round = 0; round < 10; ++round) {
        philox_round(ctr, k0, k1);
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return ctr;
}

}  // namespace detail

// splitmix64; used to expand a master seed into independent per-point seeds.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t index) {
    return splitmix64(master + 0x9E3779B97F4A7C15ull * (index + 1));
}

class RngStream {
  public:
    RngStream(uint64_t seed, uint64_t stream_id) noexcept
        : key0_(static_cast<uint32_t>(seed)),
          key1_(static_cast<uint32_t>(seed >> 32)),
          id_lo_(static_cast<uint32_t>(stream_id)),
          id_hi_(static_cast<uint32_t>(stream_id >> 32)) {}

    uint64_t next_u64() {
        if (phase_ == 0) {
            block_ = detail::philox10(
                {static_cast<uint32_t>(draw_), static_cast<uint32_t>(draw_ >> 32), id_lo_, id_hi_},
                key0_, key1_);
            ++draw_;
            phase_ = 1;
            return (static_cast<uint64_t>(block_[0]) << 32) | block_[1];
        }
        phase_ = 0;
        return (static_cast<uint64_t>(block_[2]) << 32) | block_[3];
    }

    // Uniform on (0,1); never returns 0 or 1.
    double uniform() {
        const uint64_t bits = next_u64() >> 11;  // 53 bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double exponential() { return -std::log(uniform()); }

    // Standard normal pair (Box-Muller).
    std::array<double, 2> normal_pair() {
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double t = 6.283185307179586476925286766559 * uniform();
        return {r * std::cos(t), r * std::sin(t)};
    }

    double normal() {
        if (have_normal_) {
            have_normal_ = false;
            return spare_normal_;
        }
        auto [a, b] = normal_pair();
        spare_normal_ = b;
        have_normal_ = true;
        return a;
    }

  private:
    uint32_t key0_, key1_, id_lo_, id_hi_;
    uint64_t draw_ = 0;
    std::array<uint32_t, 4> block_{};
    int phase_ = 0;
    bool have_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace fraclab
