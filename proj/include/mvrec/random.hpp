#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>

namespace mvrec {

/**
 * Philox4x32-10 counter-based generator (Salmon et al., SC'11).
 *
 * The 64-bit key selects the experiment seed and the upper 64 bits of the
 * counter select an independent stream, so stream k of seed s yields the
 * same numbers regardless of which thread draws it or in what order.
 * Satisfies UniformRandomBitGenerator with 32-bit output.
 */
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (pos_ == 4) {
            buffer_ = bijection({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                 static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                                key_);
            ++block_;
            pos_ = 0;
        }
        return buffer_[pos_++];
    }

    /// The raw 10-round bijection, exposed for known-answer tests.
    static Block bijection(Block ctr, std::array<std::uint32_t, 2> key) noexcept {
        constexpr std::uint64_t kM0 = 0xD2511F53u;
        constexpr std::uint64_t kM1 = 0xCD9E8D57u;
        constexpr std::uint32_t kW0 = 0x9E3779B9u;
        constexpr std::uint32_t kW1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            const std::uint64_t p0 = kM0 * ctr[0];
            const std::uint64_t p1 = kM1 * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Block buffer_{};
    int pos_ = 4;
};

/// Uniform and Gaussian variates with fixed, platform-independent transforms.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream) noexcept : engine_(seed, stream) {}

    std::uint64_t next_u64() noexcept {
        const std::uint64_t hi = engine_();
        return (hi << 32) | engine_();
    }

    /// [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() noexcept;

private:
    Philox4x32 engine_;
    std::optional<double> spare_;
};

}  // namespace mvrec
