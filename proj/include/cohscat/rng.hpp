#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3", SC'11). A stream is identified by its key
// and the upper counter words, so independent substreams are addressable
// without any shared state.

#include <array>
#include <cstdint>

namespace cohscat {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// One Philox4x32 block with ten rounds.
inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

/// Sequential draws from the substream (seed, stream_id).
///
/// The key is the 64-bit seed; counter words 2 and 3 hold the stream id and
/// words 0 and 1 count blocks. Each block yields two 64-bit outputs.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t stream_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_lo_(static_cast<std::uint32_t>(stream_id)), stream_hi_(static_cast<std::uint32_t>(stream_id >> 32)) {}

    std::uint64_t next_u64() {
        if (slot_ == 2) refill();
        const std::uint64_t out = (static_cast<std::uint64_t>(block_[2 * slot_ + 1]) << 32) | block_[2 * slot_];
        ++slot_;
        return out;
    }

    /// Uniform deviate in the open interval (0, 1).
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    /// True with probability p.
    bool bernoulli(double p) { return uniform() < p; }

private:
    void refill() {
        block_ = philox4x32_10({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                stream_lo_, stream_hi_},
                               key_);
        ++counter_;
        slot_ = 0;
    }

    PhiloxKey key_;
    std::uint32_t stream_lo_, stream_hi_;
    std::uint64_t counter_ = 0;
    PhiloxCounter block_{};
    int slot_ = 2;
};

}  // namespace cohscat
