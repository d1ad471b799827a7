// Counter-keyed random streams for reproducible Monte Carlo.
#pragma once

#include <cmath>
#include <cstdint>

namespace wiretap::channel {

// splitmix64 sequence whose state is derived by mixing (seed, frame_index,
// stream_id). Each triple owns an independent stream, so results do not
// depend on how frames are split across threads.
class FrameRng {
public:
    FrameRng(std::uint64_t seed, std::uint64_t frame_index, std::uint32_t stream_id) {
        state_ = finalize(seed + 0x9e3779b97f4a7c15ull);
        state_ = finalize(state_ ^ frame_index);
        state_ = finalize(state_ ^ stream_id);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return finalize(state_);
    }

    // Uniform on [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via the polar method; the rejected fraction keeps the
    // stream consumption data-dependent, which is fine since each frame has
    // its own stream.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_unit() - 1.0;
            v = 2.0 * next_unit() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    static constexpr const char* kMethodName = "splitmix64-polar";

private:
    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace wiretap::channel
