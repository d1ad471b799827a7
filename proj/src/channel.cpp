#include "wiretap/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace wiretap::channel {

double noise_sigma2(double ebn0_db, double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("noise_sigma2: rate must be positive");
    if (!std::isfinite(ebn0_db)) throw std::invalid_argument("noise_sigma2: SNR not finite");
    return 1.0 / (2.0 * rate * std::pow(10.0, ebn0_db / 10.0));
}

std::vector<double> modulate(const gf2::BitVector& bits) {
    std::vector<double> symbols(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) symbols[i] = bits.get(i) ? -1.0 : 1.0;
    return symbols;
}

SoftFrame transmit(std::span<const double> symbols, const ChannelConfig& cfg,
                   std::uint64_t frame_index) {
    SoftFrame out;
    out.noise_sigma2 = noise_sigma2(cfg.ebn0_db, cfg.rate);
    out.samples.resize(symbols.size());
    const double sigma = std::sqrt(out.noise_sigma2);
    FrameRng rng(cfg.seed, frame_index, cfg.stream_id);
    for (std::size_t i = 0; i < symbols.size(); ++i)
        out.samples[i] = symbols[i] + sigma * rng.next_gaussian();
    return out;
}

gf2::BitVector hard_decision(const SoftFrame& frame) {
    gf2::BitVector bits(frame.samples.size());
    for (std::size_t i = 0; i < frame.samples.size(); ++i)
        if (frame.samples[i] < 0.0) bits.set(i, true);
    return bits;
}

std::vector<double> llr(const SoftFrame& frame) {
    if (!(frame.noise_sigma2 > 0.0)) throw std::invalid_argument("llr: sigma^2 must be positive");
    std::vector<double> out(frame.samples.size());
    const double scale = 2.0 / frame.noise_sigma2;
    for (std::size_t i = 0; i < frame.samples.size(); ++i) out[i] = scale * frame.samples[i];
    return out;
}

SoftFrame combine(std::span<const SoftFrame> replicas) {
    if (replicas.empty()) throw std::invalid_argument("combine: no replicas");
    const std::size_t n = replicas.front().samples.size();
    const double s2 = replicas.front().noise_sigma2;
    for (const SoftFrame& r : replicas) {
        if (r.samples.size() != n) throw std::invalid_argument("combine: length mismatch");
        if (r.noise_sigma2 != s2) throw std::invalid_argument("combine: sigma^2 mismatch");
    }
    SoftFrame out;
    out.samples.assign(n, 0.0);
    for (const SoftFrame& r : replicas)
        for (std::size_t i = 0; i < n; ++i) out.samples[i] += r.samples[i];
    const double inv = 1.0 / static_cast<double>(replicas.size());
    for (double& s : out.samples) s *= inv;
    out.noise_sigma2 = s2 * inv;
    return out;
}

gf2::BitVector random_bits(std::size_t n, FrameRng& rng) {
    gf2::BitVector bits(n);
    auto words = bits.words();
    for (auto& w : words) w = rng.next_u64();
    if (n & 63) words.back() &= (std::uint64_t{1} << (n & 63)) - 1;
    return bits;
}

} // namespace wiretap::channel
