#include "wiretap/harq.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <thread>

namespace wiretap::harq {

namespace {

// Noise streams are keyed by frame * stride + replica, so a frame may use up
// to stride - 1 replicas without colliding with its neighbour.
constexpr std::uint64_t kReplicaStride = 64;

void check(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::vector<Probability> stage_fers(const ErrorRateCurve& pf_curve, double ebn0_db,
                                    std::size_t q_max, bool* clamped) {
    std::vector<Probability> pf;
    pf.reserve(q_max);
    bool any_clamped = false;
    for (std::size_t q = 1; q <= q_max; ++q) {
        bool c = false;
        pf.push_back(pf_q(pf_curve, ebn0_db, q, &c));
        any_clamped = any_clamped || c;
    }
    if (clamped) *clamped = any_clamped;
    return pf;
}

} // namespace

Probability pf_q(const ErrorRateCurve& pf_curve, double ebn0_db, std::size_t q,
                 bool* clamped) {
    check(q >= 1, "pf_q: q must be positive");
    check(pf_curve.kind() == CurveKind::fer, "pf_q: base curve must be a FER curve");
    const double shifted = ebn0_db + 10.0 * std::log10(static_cast<double>(q));
    return Probability::from_value(pf_curve.eval_db(shifted, clamped));
}

Probability p_receive_bob(std::span<const Probability> pf_by_q, std::size_t q) {
    check(q >= 1 && q - 1 <= pf_by_q.size(), "p_receive_bob: stage out of range");
    Probability r = Probability::one();
    for (std::size_t i = 0; i + 1 < q; ++i) r = analytic::product(r, pf_by_q[i]);
    return r;
}

Probability p_receive_eve(std::span<const Probability> pf_by_q, std::size_t q) {
    check(q >= 1 && q - 1 <= pf_by_q.size(), "p_receive_eve: stage out of range");
    Probability r = Probability::one();
    for (std::size_t i = 0; i + 1 < q; ++i) {
        r = analytic::product(r, pf_by_q[i]);
        r = analytic::product(r, pf_by_q[i]);
    }
    return r;
}

Probability pf_arq(const ErrorRateCurve& pf_curve, double ebn0_db, std::size_t q_max,
                   Receiver who, bool* clamped) {
    check(q_max >= 1, "pf_arq: q_max must be positive");
    const std::vector<Probability> pf = stage_fers(pf_curve, ebn0_db, q_max, clamped);

    if (who == Receiver::bob) {
        // The residual failure event is "failed at every stage": the sum over
        // success stages telescopes into a plain product.
        Probability fail = Probability::one();
        for (const Probability& p : pf) fail = analytic::product(fail, p);
        return fail;
    }

    // Eve fails either when the protocol stops at a stage q (the intended
    // receiver succeeded there) with all her own attempts 1..q failed, or when
    // everyone fails everywhere. Both tails are sums of positive terms.
    std::vector<double> fail_terms, success_terms;
    double ln_chain = 0.0; // ln prod_{i<q} pf_i for both receivers combined
    for (std::size_t q = 1; q <= q_max; ++q) {
        const Probability& pq = pf[q - 1];
        // success: received q useful transmissions, stage q decoded
        success_terms.push_back(ln_chain + pq.ln_complement());
        // failure: protocol stops here (other receiver decodes), own stage fails
        fail_terms.push_back(ln_chain + pq.ln_complement() + pq.ln());
        ln_chain += 2.0 * pq.ln();
    }
    fail_terms.push_back(ln_chain); // everyone failed all stages
    double lf = -std::numeric_limits<double>::infinity();
    double ls = lf;
    for (double t : fail_terms) lf = analytic::log_add_exp(lf, t);
    for (double t : success_terms) ls = analytic::log_add_exp(ls, t);
    return Probability::from_ln_pair(lf, ls);
}

std::size_t backend_info_bits(const CodeBackend& backend) {
    if (const auto* bdd = std::get_if<BddBackend>(&backend)) return bdd->code.k;
    return std::get<LdpcBackend>(backend).code->k;
}

std::size_t backend_codeword_bits(const CodeBackend& backend) {
    if (const auto* bdd = std::get_if<BddBackend>(&backend)) return bdd->code.n;
    return std::get<LdpcBackend>(backend).code->n;
}

std::string backend_name(const CodeBackend& backend) {
    if (const auto* bdd = std::get_if<BddBackend>(&backend))
        return "bdd(" + std::to_string(bdd->code.n) + "," + std::to_string(bdd->code.k) +
               "," + std::to_string(bdd->code.t) + ")";
    const auto& l = std::get<LdpcBackend>(backend);
    return std::string("ldpc(") + std::to_string(l.code->n) + "," +
           std::to_string(l.code->k) + (l.syndrome_only ? ",syndrome)" : ")");
}

double ReceiverCounts::fer_pre() const {
    return frames ? static_cast<double>(frame_errors_pre) / static_cast<double>(frames) : 0.0;
}
double ReceiverCounts::ber_pre() const {
    return info_bits ? static_cast<double>(bit_errors_pre) / static_cast<double>(info_bits) : 0.0;
}
double ReceiverCounts::fer_post() const {
    return frames ? static_cast<double>(frame_errors_post) / static_cast<double>(frames) : 0.0;
}
double ReceiverCounts::ber_post() const {
    return info_bits ? static_cast<double>(bit_errors_post) / static_cast<double>(info_bits) : 0.0;
}

ReceiverCounts& ReceiverCounts::operator+=(const ReceiverCounts& other) {
    frames += other.frames;
    info_bits += other.info_bits;
    frame_errors_pre += other.frame_errors_pre;
    bit_errors_pre += other.bit_errors_pre;
    frame_errors_post += other.frame_errors_post;
    bit_errors_post += other.bit_errors_post;
    if (tx_histogram.size() < other.tx_histogram.size())
        tx_histogram.resize(other.tx_histogram.size(), 0);
    for (std::size_t i = 0; i < other.tx_histogram.size(); ++i)
        tx_histogram[i] += other.tx_histogram[i];
    return *this;
}

namespace {

struct Attempt {
    bool success = false;
    gf2::BitVector info;
};

// Per-thread decode state; the LDPC decoder keeps message buffers alive
// across frames.
class FrameDecoder {
public:
    explicit FrameDecoder(const CodeBackend& backend) : backend_(backend) {
        if (const auto* l = std::get_if<LdpcBackend>(&backend))
            bp_.emplace(l->code->h, l->max_iters);
    }

    Attempt attempt(const channel::SoftFrame& soft, const gf2::BitVector& codeword,
                    std::size_t k) {
        if (const auto* bdd = std::get_if<BddBackend>(&backend_)) {
            gf2::BitVector hard = channel::hard_decision(soft);
            if (gf2::hamming_distance(hard, codeword) <= bdd->code.t)
                return {true, codeword.slice(0, k)};
            return {false, hard.slice(0, k)};
        }
        const auto& l = std::get<LdpcBackend>(backend_);
        ldpc::DecodeResult res = bp_->decode(channel::llr(soft));
        const bool ok = l.syndrome_only ? res.converged : (res.bits == codeword);
        return {ok, res.bits.slice(0, k)};
    }

private:
    const CodeBackend& backend_;
    std::optional<ldpc::BpDecoder> bp_;
};

struct Totals {
    ReceiverCounts bob;
    ReceiverCounts eve;
};

struct SimParams {
    const CodeBackend* backend;
    const gf2::ScramblerPair* scrambler;
    std::size_t q_max;
    EveStrategy eve_strategy;
    double ebn0_bob_db;
    double ebn0_eve_db;
    std::uint64_t seed;
};

void run_blocks(const SimParams& p, std::size_t block_begin, std::size_t block_end,
                Totals& out) {
    const CodeBackend& backend = *p.backend;
    const gf2::ScramblerPair& scr = *p.scrambler;
    const std::size_t k = backend_info_bits(backend);
    const std::size_t n = backend_codeword_bits(backend);
    const std::size_t L = scr.block_frames;
    const std::size_t kL = scr.size();
    const double rate = static_cast<double>(k) / static_cast<double>(n);
    const bool is_bdd = std::holds_alternative<BddBackend>(backend);

    FrameDecoder decoder(backend);
    const channel::ChannelConfig cfg_bob{p.ebn0_bob_db, rate, p.seed, channel::kStreamBob};
    const channel::ChannelConfig cfg_eve{p.ebn0_eve_db, rate, p.seed, channel::kStreamEve};
    out.bob.tx_histogram.assign(p.q_max, 0);
    out.eve.tx_histogram.assign(p.q_max, 0);

    std::vector<channel::SoftFrame> bob_reps, eve_reps, subset;
    for (std::size_t b = block_begin; b < block_end; ++b) {
        channel::FrameRng src(p.seed, b, channel::kStreamSource);
        const gf2::BitVector u = channel::random_bits(kL, src);
        const gf2::BitVector u_s = scr.scramble(u);
        gf2::BitVector bob_block(kL), eve_block(kL);

        for (std::size_t l = 0; l < L; ++l) {
            const std::uint64_t frame = b * L + l;
            const gf2::BitVector u_f = u_s.slice(l * k, k);
            gf2::BitVector codeword(n);
            if (is_bdd) {
                codeword.assign_slice(0, u_f);
            } else {
                codeword = std::get<LdpcBackend>(backend).code->encode(u_f);
            }
            const std::vector<double> symbols = channel::modulate(codeword);

            bob_reps.clear();
            eve_reps.clear();
            bool bob_ok = false, eve_ok = false;
            gf2::BitVector bob_out, eve_out;
            std::size_t q_used = 0;
            for (std::size_t q = 1; q <= p.q_max; ++q) {
                const std::uint64_t fidx = frame * kReplicaStride + q;
                bob_reps.push_back(channel::transmit(symbols, cfg_bob, fidx));
                eve_reps.push_back(channel::transmit(symbols, cfg_eve, fidx));
                q_used = q;

                Attempt ba = decoder.attempt(channel::combine(bob_reps), codeword, k);
                bob_ok = ba.success;
                bob_out = std::move(ba.info);

                if (!eve_ok) {
                    if (p.eve_strategy == EveStrategy::combine_all) {
                        Attempt ea = decoder.attempt(channel::combine(eve_reps), codeword, k);
                        eve_ok = ea.success;
                        eve_out = std::move(ea.info);
                    } else {
                        // Try every average that includes the newest replica;
                        // the full average doubles as the fallback output.
                        const std::size_t prev = q - 1;
                        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << prev); ++mask) {
                            subset.clear();
                            for (std::size_t i = 0; i < prev; ++i)
                                if ((mask >> i) & 1) subset.push_back(eve_reps[i]);
                            subset.push_back(eve_reps[prev]);
                            Attempt ea = decoder.attempt(channel::combine(subset), codeword, k);
                            if (ea.success) {
                                eve_ok = true;
                                eve_out = std::move(ea.info);
                                break;
                            }
                            if (mask == (std::uint64_t{1} << prev) - 1)
                                eve_out = std::move(ea.info);
                        }
                    }
                }
                if (bob_ok) break;
            }

            ++out.bob.frames;
            ++out.eve.frames;
            ++out.bob.tx_histogram[q_used - 1];
            ++out.eve.tx_histogram[q_used - 1];
            if (!bob_ok) ++out.bob.frame_errors_pre;
            if (!eve_ok) ++out.eve.frame_errors_pre;
            out.bob.bit_errors_pre += gf2::hamming_distance(bob_out, u_f);
            out.eve.bit_errors_pre += gf2::hamming_distance(eve_out, u_f);
            bob_block.assign_slice(l * k, bob_out);
            eve_block.assign_slice(l * k, eve_out);
        }

        const gf2::BitVector bob_u = scr.descramble(bob_block);
        const gf2::BitVector eve_u = scr.descramble(eve_block);
        out.bob.info_bits += kL;
        out.eve.info_bits += kL;
        out.bob.bit_errors_post += gf2::hamming_distance(bob_u, u);
        out.eve.bit_errors_post += gf2::hamming_distance(eve_u, u);
        for (std::size_t l = 0; l < L; ++l) {
            if (!(bob_u.slice(l * k, k) == u.slice(l * k, k))) ++out.bob.frame_errors_post;
            if (!(eve_u.slice(l * k, k) == u.slice(l * k, k))) ++out.eve.frame_errors_post;
        }
    }
}

void validate_sim_args(const CodeBackend& backend, const gf2::ScramblerPair& scrambler,
                       std::size_t q_max, EveStrategy strategy, std::size_t frames) {
    check(q_max >= 1 && q_max < kReplicaStride, "simulate: q_max out of range");
    check(strategy != EveStrategy::best_subset || q_max <= 16,
          "simulate: best_subset limited to q_max <= 16");
    const std::size_t k = backend_info_bits(backend);
    check(scrambler.frame_bits == k, "simulate: scrambler frame size != code dimension");
    check(frames >= 1, "simulate: need at least one frame");
    check(frames % scrambler.block_frames == 0,
          "simulate: frames must be a multiple of the scrambling block length");
    if (const auto* l = std::get_if<LdpcBackend>(&backend))
        check(l->code != nullptr, "simulate: null LDPC code");
    if (const auto* bdd = std::get_if<BddBackend>(&backend))
        check(bdd->code.k < bdd->code.n, "simulate: bad code parameters");
}

// Splits [0, blocks) into contiguous ranges, runs body(range, totals[i]) on
// each, and merges in index order. Results do not depend on the thread count.
template <typename Body>
Totals run_partitioned(std::size_t blocks, unsigned threads, Body body) {
    const unsigned t = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(blocks)));
    std::vector<Totals> partial(t);
    if (t == 1) {
        body(std::size_t{0}, blocks, partial[0]);
    } else {
        std::vector<std::thread> pool;
        const std::size_t per = blocks / t, rem = blocks % t;
        std::size_t begin = 0;
        for (unsigned i = 0; i < t; ++i) {
            const std::size_t len = per + (i < rem ? 1 : 0);
            pool.emplace_back([&, begin, len, i] { body(begin, begin + len, partial[i]); });
            begin += len;
        }
        for (auto& th : pool) th.join();
    }
    Totals out;
    for (const Totals& p : partial) {
        out.bob += p.bob;
        out.eve += p.eve;
    }
    return out;
}

} // namespace

HarqReport simulate(const CodeBackend& backend, const gf2::ScramblerPair& scrambler,
                    const HarqConfig& cfg, double ebn0_bob_db, double ebn0_eve_db,
                    std::size_t frames, std::uint64_t seed) {
    validate_sim_args(backend, scrambler, cfg.q_max, cfg.eve_strategy, frames);
    const std::size_t blocks = frames / scrambler.block_frames;

    SimParams p{&backend, &scrambler, cfg.q_max, cfg.eve_strategy,
                ebn0_bob_db, ebn0_eve_db, seed};
    Totals totals = run_partitioned(blocks, cfg.threads,
                                    [&p](std::size_t b0, std::size_t b1, Totals& t) {
                                        run_blocks(p, b0, b1, t);
                                    });

    HarqReport report;
    report.ebn0_bob_db = ebn0_bob_db;
    report.ebn0_eve_db = ebn0_eve_db;
    report.seed = seed;
    report.q_max = cfg.q_max;
    report.eve_strategy = cfg.eve_strategy;
    report.frame_bits = scrambler.frame_bits;
    report.block_frames = scrambler.block_frames;
    report.backend = backend_name(backend);
    report.noise_method = channel::FrameRng::kMethodName;
    report.scrambler_hash = gf2::matrix_hash(scrambler.inverse);
    report.bob = std::move(totals.bob);
    report.eve = std::move(totals.eve);
    return report;
}

ReceiverCounts simulate_fixed_q(const CodeBackend& backend,
                                const gf2::ScramblerPair& scrambler, double ebn0_db,
                                std::size_t q, std::size_t frames, std::uint64_t seed,
                                std::uint32_t stream_id, unsigned threads) {
    validate_sim_args(backend, scrambler, q, EveStrategy::combine_all, frames);
    const std::size_t k = backend_info_bits(backend);
    const std::size_t n = backend_codeword_bits(backend);
    const std::size_t L = scrambler.block_frames;
    const std::size_t kL = scrambler.size();
    const double rate = static_cast<double>(k) / static_cast<double>(n);
    const bool is_bdd = std::holds_alternative<BddBackend>(backend);
    const std::size_t blocks = frames / L;

    auto body = [&](std::size_t block_begin, std::size_t block_end, Totals& out) {
        FrameDecoder decoder(backend);
        const channel::ChannelConfig ch{ebn0_db, rate, seed, stream_id};
        out.bob.tx_histogram.assign(q, 0);
        std::vector<channel::SoftFrame> reps;
        for (std::size_t b = block_begin; b < block_end; ++b) {
            channel::FrameRng src(seed, b, channel::kStreamSource);
            const gf2::BitVector u = channel::random_bits(kL, src);
            const gf2::BitVector u_s = scrambler.scramble(u);
            gf2::BitVector block_out(kL);
            for (std::size_t l = 0; l < L; ++l) {
                const std::uint64_t frame = b * L + l;
                const gf2::BitVector u_f = u_s.slice(l * k, k);
                gf2::BitVector codeword(n);
                if (is_bdd) {
                    codeword.assign_slice(0, u_f);
                } else {
                    codeword = std::get<LdpcBackend>(backend).code->encode(u_f);
                }
                const std::vector<double> symbols = channel::modulate(codeword);
                reps.clear();
                for (std::size_t r = 1; r <= q; ++r)
                    reps.push_back(channel::transmit(symbols, ch, frame * kReplicaStride + r));
                Attempt a = decoder.attempt(channel::combine(reps), codeword, k);
                ++out.bob.frames;
                ++out.bob.tx_histogram[q - 1];
                if (!a.success) ++out.bob.frame_errors_pre;
                out.bob.bit_errors_pre += gf2::hamming_distance(a.info, u_f);
                block_out.assign_slice(l * k, a.info);
            }
            const gf2::BitVector decoded_u = scrambler.descramble(block_out);
            out.bob.info_bits += kL;
            out.bob.bit_errors_post += gf2::hamming_distance(decoded_u, u);
            for (std::size_t l = 0; l < L; ++l)
                if (!(decoded_u.slice(l * k, k) == u.slice(l * k, k)))
                    ++out.bob.frame_errors_post;
        }
    };
    Totals totals = run_partitioned(blocks, threads, body);
    return totals.bob;
}

double ci95_halfwidth(std::uint64_t errors, std::uint64_t trials) {
    if (trials == 0) return 0.0;
    const double p = static_cast<double>(errors) / static_cast<double>(trials);
    return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

} // namespace wiretap::harq
