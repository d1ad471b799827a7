// Binary antipodal signalling over the AWGN channel, with soft combining.
#pragma once

#include "wiretap/bitmatrix.hpp"
#include "wiretap/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace wiretap::channel {

// Stream identities mixed into the per-frame noise key; the two receivers see
// independent noise on the same transmitted symbols.
inline constexpr std::uint32_t kStreamBob = 0x0b0b;
inline constexpr std::uint32_t kStreamEve = 0x0e7e;
inline constexpr std::uint32_t kStreamSource = 0x50c0;

struct ChannelConfig {
    double ebn0_db = 0.0;
    double rate = 1.0; // information bits per channel bit
    std::uint64_t seed = 0;
    std::uint32_t stream_id = kStreamBob;
};

struct SoftFrame {
    std::vector<double> samples;
    double noise_sigma2 = 0.0;
};

// Per-dimension noise variance for unit-energy symbols:
// sigma^2 = 1 / (2 * rate * Eb/N0).
double noise_sigma2(double ebn0_db, double rate);

// bit 0 -> +1, bit 1 -> -1.
std::vector<double> modulate(const gf2::BitVector& bits);

SoftFrame transmit(std::span<const double> symbols, const ChannelConfig& cfg,
                   std::uint64_t frame_index);

// sample >= 0 decodes to 0; exact zero resolves to 0.
gf2::BitVector hard_decision(const SoftFrame& frame);

// 2 * sample / sigma^2 per position.
std::vector<double> llr(const SoftFrame& frame);

// Arithmetic mean of equal-length, equal-sigma replicas; the averaged noise
// variance drops to sigma^2 / Q.
SoftFrame combine(std::span<const SoftFrame> replicas);

// Uniform bits drawn from a counter-keyed stream.
gf2::BitVector random_bits(std::size_t n, FrameRng& rng);

} // namespace wiretap::channel
