// Hybrid ARQ with soft combining: the analytic model and the two-receiver
// Monte Carlo simulation.
#pragma once

#include "wiretap/analytic.hpp"
#include "wiretap/channel.hpp"
#include "wiretap/curve.hpp"
#include "wiretap/ldpc.hpp"
#include "wiretap/scrambler.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace wiretap::harq {

using analytic::Probability;

// ---- analytic model ----
//
// Averaging q replicas scales the effective SNR by q, so the q-th-stage frame
// error rate is the base curve read 10 log10(q) dB to the right. Retransmission
// only happens while the intended receiver keeps failing, and the eavesdropper
// additionally needs her own earlier failures for a replica to be useful.

// Base-curve lookup at ebn0_db + 10 log10(q); *clamped reports grid clamping.
Probability pf_q(const ErrorRateCurve& pf_curve, double ebn0_db, std::size_t q,
                 bool* clamped = nullptr);

// P(receiver gets q transmissions of a frame). pf_by_q[i] is the frame error
// rate at stage i+1; entries up to stage q-1 are used.
Probability p_receive_bob(std::span<const Probability> pf_by_q, std::size_t q);
Probability p_receive_eve(std::span<const Probability> pf_by_q, std::size_t q);

enum class Receiver { bob, eve };

// Residual frame error rate after the protocol completes, at most q_max
// transmissions per frame, both receivers at the same SNR. Computed from
// positive sums over disjoint outcomes, so both tails stay accurate.
Probability pf_arq(const ErrorRateCurve& pf_curve, double ebn0_db, std::size_t q_max,
                   Receiver who, bool* clamped = nullptr);

// ---- simulation ----

enum class EveStrategy {
    combine_all, // decode the running average as each replica arrives
    best_subset  // additionally try every subset average containing the newest replica
};

// Abstract bounded-distance decoder: decoding succeeds exactly when the
// error pattern over the n received positions has weight at most t; a failed
// frame keeps the raw channel errors. Parity bits carry zeros, which changes
// nothing on a symmetric channel.
struct BddBackend {
    analytic::CodeParams code;
};

struct LdpcBackend {
    const ldpc::LdpcCode* code = nullptr;
    std::size_t max_iters = 50;
    // Judge success by the decoder's own convergence flag instead of the
    // transmitted codeword (admits undetected errors).
    bool syndrome_only = false;
};

using CodeBackend = std::variant<BddBackend, LdpcBackend>;

std::size_t backend_info_bits(const CodeBackend& backend);
std::size_t backend_codeword_bits(const CodeBackend& backend);
std::string backend_name(const CodeBackend& backend);

struct HarqConfig {
    std::size_t q_max = 1;
    EveStrategy eve_strategy = EveStrategy::combine_all;
    unsigned threads = 1;
};

struct ReceiverCounts {
    std::uint64_t frames = 0;
    std::uint64_t info_bits = 0;
    std::uint64_t frame_errors_pre = 0;  // scrambled domain, per coded frame
    std::uint64_t bit_errors_pre = 0;
    std::uint64_t frame_errors_post = 0; // after block descrambling, per frame
    std::uint64_t bit_errors_post = 0;
    std::vector<std::uint64_t> tx_histogram; // [q-1]: frames settled after q transmissions

    double fer_pre() const;
    double ber_pre() const;
    double fer_post() const;
    double ber_post() const;

    ReceiverCounts& operator+=(const ReceiverCounts& other);
};

struct HarqReport {
    double ebn0_bob_db = 0.0;
    double ebn0_eve_db = 0.0;
    std::uint64_t seed = 0;
    std::size_t q_max = 1;
    EveStrategy eve_strategy = EveStrategy::combine_all;
    std::size_t frame_bits = 0;   // k
    std::size_t block_frames = 1; // L
    std::string backend;
    std::string noise_method;
    std::uint64_t scrambler_hash = 0;
    ReceiverCounts bob;
    ReceiverCounts eve;
};

// Runs `frames` coded frames (must be a multiple of the scrambling block
// length L) through the two-receiver HARQ protocol. Identical results for any
// thread count: every random draw is keyed by (seed, frame or block, stream).
HarqReport simulate(const CodeBackend& backend, const gf2::ScramblerPair& scrambler,
                    const HarqConfig& cfg, double ebn0_bob_db, double ebn0_eve_db,
                    std::size_t frames, std::uint64_t seed);

// Every frame is transmitted exactly q times and decoded once on the average
// of all replicas; no feedback. Uses the same stream keying as simulate(), so
// q = 1 reproduces a q_max = 1 protocol run bit for bit.
ReceiverCounts simulate_fixed_q(const CodeBackend& backend,
                                const gf2::ScramblerPair& scrambler, double ebn0_db,
                                std::size_t q, std::size_t frames, std::uint64_t seed,
                                std::uint32_t stream_id = channel::kStreamBob,
                                unsigned threads = 1);

// Half width of the 95% normal-approximation binomial confidence interval.
double ci95_halfwidth(std::uint64_t errors, std::uint64_t trials);

} // namespace wiretap::harq
