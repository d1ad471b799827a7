#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wiretap/analytic.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

using namespace wiretap::analytic;

namespace {

// Pascal's triangle in long double, enough for the exhaustive oracles below.
long double binom_ld(unsigned n, unsigned k) {
    static std::vector<std::vector<long double>> table;
    if (table.size() <= n) {
        for (unsigned r = table.size(); r <= n; ++r) {
            std::vector<long double> row(r + 1, 1.0L);
            for (unsigned c = 1; c < r; ++c) row[c] = table[r - 1][c - 1] + table[r - 1][c];
            table.push_back(std::move(row));
        }
    }
    return k <= n ? table[n][k] : 0.0L;
}

// Upper tail of Binomial(n, p) beyond t, summed directly.
double tail_oracle(unsigned n, unsigned t, double p) {
    long double sum = 0.0L;
    for (unsigned i = t + 1; i <= n; ++i)
        sum += binom_ld(n, i) * powl(p, i) * powl(1.0L - p, n - i);
    return static_cast<double>(sum);
}

// Chance that a uniform weight-w subset of k positions meets an odd number of
// the j marked ones.
long double odd_overlap(unsigned k, unsigned j, unsigned w) {
    long double sum = 0.0L;
    for (unsigned i = 1; i <= j && i <= w; i += 2) {
        if (w - i > k - j) continue;
        sum += binom_ld(j, i) * binom_ld(k - j, w - i);
    }
    return sum / binom_ld(k, w);
}

// Post-descrambling BER by enumerating every error pattern of the n-bit
// frame: the decoder fails on weight > t, and a failed frame flips an output
// bit when the weight-w column support meets an odd number of the j errors
// that fell in the k information positions. Averaging the parity over all
// supports gives the hypergeometric factor exactly.
double pe_real_oracle(unsigned n, unsigned k, unsigned t, unsigned w, double p) {
    long double ber = 0.0L;
    for (std::uint32_t e = 0; e < (1u << n); ++e) {
        const unsigned weight = std::popcount(e);
        if (weight <= t) continue;
        const unsigned j = std::popcount(e & ((1u << k) - 1));
        const long double prob = powl(p, weight) * powl(1.0L - p, n - weight);
        ber += prob * odd_overlap(k, j, w);
    }
    return static_cast<double>(ber);
}

} // namespace

TEST_CASE("probability round-trips and extremes") {
    const Probability p = Probability::from_value(0.3);
    CHECK(p.value() == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(p.complement().value() == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(p.complement().complement().ln() == p.ln());

    CHECK(Probability::from_value(0.0).is_zero());
    CHECK(Probability::from_value(1.0).is_one());
    CHECK(Probability::zero().complement().is_one());
    CHECK(Probability::one().value() == 1.0);

    // Far below double underflow the log representation keeps going.
    const Probability tiny = Probability::from_ln(-1000.0);
    CHECK(tiny.value() == 0.0);
    CHECK(tiny.log10() == doctest::Approx(-1000.0 / std::log(10.0)).epsilon(1e-12));
    CHECK(tiny.complement().value() == 1.0);
}

TEST_CASE("product keeps near-one complements") {
    const double l18 = std::log(1e-18);
    const Probability a = Probability::from_ln_pair(std::log1p(-1e-18), l18);
    const Probability c = product(a, a);
    // 1 - (1-eps)^2 = 2 eps to first order; a value-domain product loses this.
    CHECK(std::exp(c.ln_complement()) == doctest::Approx(2e-18).epsilon(1e-9));

    const Probability x = Probability::from_value(0.37);
    CHECK(product(x, Probability::one()).ln() == x.ln());
    CHECK(product(x, Probability::zero()).is_zero());
    CHECK(product(x, x).value() == doctest::Approx(0.37 * 0.37).epsilon(1e-14));
}

TEST_CASE("log_add_exp") {
    CHECK(log_add_exp(-1.0, -2.0) ==
          doctest::Approx(std::log(std::exp(-1.0) + std::exp(-2.0))).epsilon(1e-14));
    CHECK(log_add_exp(-2.0, -1.0) == log_add_exp(-1.0, -2.0));
    const double ninf = -std::numeric_limits<double>::infinity();
    CHECK(log_add_exp(ninf, -3.0) == -3.0);
    CHECK(log_add_exp(ninf, ninf) == ninf);
    // Widely separated magnitudes must not lose the dominant term.
    CHECK(log_add_exp(0.0, -800.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("ln1m_from_ln on both sides of one half") {
    CHECK(ln1m_from_ln(std::log(0.3)) == doctest::Approx(std::log(0.7)).epsilon(1e-14));
    CHECK(ln1m_from_ln(std::log(0.9)) == doctest::Approx(std::log(0.1)).epsilon(1e-12));
    // p = 1 - 1e-20: the complement must come out as 1e-20, not zero.
    CHECK(ln1m_from_ln(-1e-20) == doctest::Approx(std::log(1e-20)).epsilon(1e-12));
}

TEST_CASE("log_erfc agrees with erfc and survives deep arguments") {
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0})
        CHECK(log_erfc(x) == doctest::Approx(std::log(std::erfc(x))).epsilon(1e-12));
    // erfc(100) underflows double; the log form stays finite near -x^2.
    const double deep = log_erfc(100.0);
    CHECK(std::isfinite(deep));
    CHECK(deep < -10000.0);
    CHECK(deep > -10010.0);
    CHECK(log_erfc(30.0) < log_erfc(29.0));
}

TEST_CASE("log_binomial") {
    CHECK(log_binomial(4, 2) == doctest::Approx(std::log(6.0)).epsilon(1e-12));
    CHECK(log_binomial(10, 0) == 0.0);
    CHECK(log_binomial(10, 10) == 0.0);
    CHECK(log_binomial(2047, 1) == doctest::Approx(std::log(2047.0)).epsilon(1e-12));

    // ln C(2047,69) against a plain sum of logs in extended precision.
    long double sum = 0.0L;
    for (unsigned i = 1; i <= 69; ++i)
        sum += logl(2047.0L - 69.0L + i) - logl(static_cast<long double>(i));
    CHECK(log_binomial(2047, 69) ==
          doctest::Approx(static_cast<double>(sum)).epsilon(1e-10));

    CHECK_THROWS_AS(log_binomial(5, 6), std::invalid_argument);
}

TEST_CASE("channel_p0 reference points") {
    // Eb/N0 of 0 dB at rate 1 puts the erfc argument at exactly 1.
    const Probability p = channel_p0(0.0, 1.0);
    CHECK(p.value() == doctest::Approx(0.5 * std::erfc(1.0)).epsilon(1e-13));
    CHECK(p.value() == doctest::Approx(0.078649).epsilon(1e-4));

    // 40 dB: the value side underflows but the logs stay exact.
    const Probability deep = channel_p0(40.0, 1.0);
    CHECK(deep.log10() < -80.0);
    CHECK(std::isfinite(deep.log10()));
    CHECK_FALSE(deep.is_zero());
}

TEST_CASE("channel_p0 rate identity") {
    const double rate = 1354.0 / 2047.0;
    for (double db : {0.0, 3.0, 5.5, 8.0}) {
        const Probability a = channel_p0(db, rate);
        const Probability b = channel_p0(db + 10.0 * std::log10(rate), 1.0);
        CHECK(a.ln() == doctest::Approx(b.ln()).epsilon(1e-12));
    }
    // Monotone decreasing in SNR.
    CHECK(channel_p0(4.0, 1.0).ln() < channel_p0(2.0, 1.0).ln());
}

TEST_CASE("frame_error_bdd matches direct tail sums") {
    const CodeParams code{7, 4, 1};
    for (double p : {0.02, 0.1, 0.3, 0.5})
        CHECK(frame_error_bdd(code, Probability::from_value(p)).value() ==
              doctest::Approx(tail_oracle(7, 1, p)).epsilon(1e-12));

    const CodeParams bigger{15, 7, 2};
    CHECK(frame_error_bdd(bigger, Probability::from_value(0.08)).value() ==
          doctest::Approx(tail_oracle(15, 2, 0.08)).epsilon(1e-12));
}

TEST_CASE("frame_error_bdd edge cases and monotonicity") {
    const CodeParams code{7, 4, 1};
    CHECK(frame_error_bdd(code, Probability::zero()).is_zero());
    CHECK(frame_error_bdd(code, Probability::one()).is_one());
    CHECK(frame_error_bdd({7, 4, 7}, Probability::from_value(0.4)).is_zero());

    double prev = -1.0;
    for (double p : {0.01, 0.05, 0.1, 0.2, 0.4}) {
        const double pf = frame_error_bdd(code, Probability::from_value(p)).value();
        CHECK(pf > prev);
        prev = pf;
    }
    // More correction power can only lower the frame error rate.
    const Probability p0 = Probability::from_value(0.1);
    CHECK(frame_error_bdd({15, 7, 3}, p0).ln() < frame_error_bdd({15, 7, 2}, p0).ln());
}

TEST_CASE("frame_error_bdd keeps precision in the deep tail") {
    // At p0 = 1e-6 the t+1 term dominates; the sum must stay in log domain.
    const CodeParams code{2047, 1354, 69};
    const Probability pf = frame_error_bdd(code, Probability::from_value(1e-6));
    CHECK(std::isfinite(pf.ln()));
    CHECK(pf.log10() < -200.0);
    const double first_term = log_binomial(2047, 70) + 70 * std::log(1e-6) +
                              (2047 - 70) * std::log1p(-1e-6);
    CHECK(pf.ln() == doctest::Approx(first_term).epsilon(1e-4));
}

TEST_CASE("perfect scrambling halves the frame error rate") {
    const CodeParams code{15, 7, 2};
    const Probability p0 = Probability::from_value(0.07);
    const Probability pf = frame_error_bdd(code, p0);
    const Probability pe = pe_perfect_scrambling(code, p0);
    CHECK(pe.ln() == doctest::Approx(pf.ln() + std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("pe_real_scrambling matches exhaustive enumeration") {
    const CodeParams small{7, 4, 1};
    for (unsigned w : {1u, 2u, 3u, 4u})
        for (double p : {0.05, 0.1, 0.3})
            CHECK(pe_real_scrambling(small, Probability::from_value(p), w).value() ==
                  doctest::Approx(pe_real_oracle(7, 4, 1, w, p)).epsilon(1e-11));

    const CodeParams mid{15, 7, 2};
    for (unsigned w : {2u, 5u})
        CHECK(pe_real_scrambling(mid, Probability::from_value(0.06), w).value() ==
              doctest::Approx(pe_real_oracle(15, 7, 2, w, 0.06)).epsilon(1e-11));
}

TEST_CASE("pe_real_scrambling limits") {
    const CodeParams code{15, 7, 2};
    CHECK(pe_real_scrambling(code, Probability::zero(), 3).is_zero());

    // A descrambled bit cannot be wrong more often than its frame.
    const Probability p0 = Probability::from_value(0.06);
    const double pf = frame_error_bdd(code, p0).value();
    for (unsigned w : {1u, 3u, 5u, 7u})
        CHECK(pe_real_scrambling(code, p0, w).value() <= pf * (1.0 + 1e-12));

    // All bits flipped: every tap sees an error, so the output bit is the
    // parity of w.
    CHECK(pe_real_scrambling(code, Probability::one(), 3).value() ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pe_real_scrambling(code, Probability::one(), 4).value() <= 1e-15);
}

TEST_CASE("moderate column weight tracks perfect scrambling on the long code") {
    const CodeParams code{2047, 1354, 69};
    for (double db : {4.25, 4.5, 4.75, 5.0}) {
        const Probability p0 = channel_p0(db, code.rate());
        const double perfect = pe_perfect_scrambling(code, p0).value();
        REQUIRE(perfect > 1e-6);
        REQUIRE(perfect < 0.4);
        for (unsigned w : {8u, 14u, 20u}) {
            const double real = pe_real_scrambling(code, p0, w).value();
            CHECK(real / perfect > 0.3);
            CHECK(real / perfect <= 1.0);
        }
    }
}

TEST_CASE("block_perfect reference values") {
    const BlockRates r = block_perfect(Probability::from_value(0.1), 20);
    CHECK(r.pf.value() == doctest::Approx(-std::expm1(20.0 * std::log1p(-0.1)))
                              .epsilon(1e-12));
    CHECK(r.pf.value() == doctest::Approx(0.878423).epsilon(1e-5));
    CHECK(r.pe.value() == doctest::Approx(r.pf.value() / 2.0).epsilon(1e-12));
    CHECK(r.pe.value() > 0.4);

    const BlockRates s = block_perfect(Probability::from_value(1e-6), 20);
    CHECK(s.pf.value() == doctest::Approx(-std::expm1(20.0 * std::log1p(-1e-6)))
                              .epsilon(1e-9));
    CHECK(s.pf.value() < 2e-5);
    CHECK(s.pe.value() < 1e-5);
}

TEST_CASE("block_perfect precision and shape") {
    // Tiny rates: 1 - (1-p)^L evaluated naively collapses to L*p plus noise.
    const BlockRates r = block_perfect(Probability::from_value(1e-12), 10);
    CHECK(r.pf.value() == doctest::Approx(-std::expm1(10.0 * std::log1p(-1e-12)))
                              .epsilon(1e-9));

    const Probability pf1 = Probability::from_value(0.01);
    CHECK(block_perfect(pf1, 1).pf.ln() == pf1.ln());
    double prev = 0.0;
    for (std::size_t L : {1, 2, 5, 10, 20}) {
        const double pf = block_perfect(pf1, L).pf.value();
        CHECK(pf > prev);
        prev = pf;
    }
}

TEST_CASE("pe_block_real closed form") {
    const Probability p = Probability::from_value(0.3);
    // L = 1 changes nothing.
    CHECK(pe_block_real(p, 1).ln() == doctest::Approx(p.ln()).epsilon(1e-14));
    // A fully random frame stays fully random.
    CHECK(pe_block_real(Probability::from_value(0.5), 7).value() ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pe_block_real(Probability::zero(), 5).is_zero());

    // Odd-count binomial sum for L = 5, p = 0.3.
    long double odd = 0.0L;
    for (unsigned m = 1; m <= 5; m += 2)
        odd += binom_ld(5, m) * powl(0.3L, m) * powl(0.7L, 5 - m);
    CHECK(pe_block_real(p, 5).value() ==
          doctest::Approx(static_cast<double>(odd)).epsilon(1e-12));

    // Tiny p: result is close to L*p and must not lose relative precision.
    CHECK(pe_block_real(Probability::from_value(1e-13), 4).value() ==
          doctest::Approx(-std::expm1(4.0 * std::log1p(-2e-13)) / 2.0).epsilon(1e-9));

    // Above one half the power term alternates in sign with L.
    CHECK(pe_block_real(Probability::from_value(0.9), 2).value() ==
          doctest::Approx(2.0 * 0.9 * 0.1).epsilon(1e-12));
    CHECK(pe_block_real(Probability::from_value(0.9), 3).value() ==
          doctest::Approx(0.5 * (1.0 + 0.8 * 0.8 * 0.8)).epsilon(1e-12));
}

TEST_CASE("pe_block_real grows with L below one half") {
    const Probability p = Probability::from_value(0.05);
    double prev = 0.0;
    for (std::size_t L : {1, 2, 4, 8, 16}) {
        const double pe = pe_block_real(p, L).value();
        CHECK(pe > prev);
        CHECK(pe < 0.5);
        prev = pe;
    }
}
