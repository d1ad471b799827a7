// Closed-form error-rate models for hard-decision bounded-distance decoding
// with perfect, sparse and concatenated scrambling.
#pragma once

#include <cstddef>
#include <limits>

namespace wiretap::analytic {

// Probability stored as the pair (ln p, ln(1-p)) so that values like 1 - 1e-18
// and 1e-300 both keep full relative precision. Every model below produces
// both logs directly instead of deriving one from the other where that would
// cancel.
class Probability {
public:
    Probability() = default; // zero

    static Probability zero() { return Probability(); }
    static Probability one() { return from_ln_pair(0.0, -inf()); }
    static Probability from_value(double p);
    static Probability from_ln(double lp);
    // Both logs must be <= 0. A side that lands marginally above zero (log-sum
    // rounding of a value near one) is rebuilt from the other side; anything
    // further above zero throws.
    static Probability from_ln_pair(double lp, double l1p);

    double value() const;
    double ln() const { return lp_; }
    double ln_complement() const { return l1p_; }
    double log10() const;

    Probability complement() const { return from_ln_pair(l1p_, lp_); }

    bool is_zero() const { return lp_ == -inf(); }
    bool is_one() const { return l1p_ == -inf(); }

private:
    static constexpr double inf() { return std::numeric_limits<double>::infinity(); }
    double lp_ = -inf();
    double l1p_ = 0.0;
};

// ln(1-p) from ln(p), switching forms at p = 1/2 to avoid cancellation.
double ln1m_from_ln(double lp);

// a*b with the complement accumulated as 1-ab = (1-a) + a(1-b), which stays
// exact when both factors are close to one.
Probability product(const Probability& a, const Probability& b);

// ln(a+b) from ln a, ln b.
double log_add_exp(double la, double lb);

// ln erfc(x); finite and accurate far beyond the double underflow point of
// erfc itself (asymptotic series for large x).
double log_erfc(double x);

// ln C(n,k) via lgamma. Throws std::invalid_argument when k > n.
double log_binomial(std::size_t n, std::size_t k);

struct CodeParams {
    std::size_t n = 0; // codeword bits
    std::size_t k = 0; // information bits
    std::size_t t = 0; // correctable errors
    double rate() const { return static_cast<double>(k) / static_cast<double>(n); }
};

// Raw channel bit error rate of binary antipodal signalling on the AWGN
// channel at the given information-bit SNR: p0 = erfc(sqrt(rate * Eb/N0)) / 2.
Probability channel_p0(double ebn0_db, double rate);

// Frame error rate of a bounded-distance decoder: the upper tail of
// Binomial(n, p0) beyond weight t.
Probability frame_error_bdd(const CodeParams& code, const Probability& p0);

// Post-descrambling BER under perfect scrambling: half the frame error rate.
Probability pe_perfect_scrambling(const CodeParams& code, const Probability& p0);

// Post-descrambling BER when the descrambling matrix has column weight w over
// the information bits. Sums, over the number j of information-bit errors in
// a wrong frame, the chance that an odd number of them lands on the w
// positions feeding one output bit.
Probability pe_real_scrambling(const CodeParams& code, const Probability& p0,
                               std::size_t w);

struct BlockRates {
    Probability pf; // block error rate
    Probability pe; // post-descrambling BER
};

// Concatenating L frames under one perfect scrambler: the block fails when
// any frame does, and a failed block yields BER 1/2.
BlockRates block_perfect(const Probability& pf_single, std::size_t L);

// Concatenation with per-frame sparse descrambling: an output bit is wrong
// when an odd number of the L frame contributions are, each independently
// wrong with probability pe_single.
Probability pe_block_real(const Probability& pe_single, std::size_t L);

} // namespace wiretap::analytic
