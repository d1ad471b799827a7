#include "wiretap/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace wiretap::analytic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453;

// Positive log values below this are treated as rounding debris from sums
// whose true value sits against 0; larger ones are caller errors.
constexpr double kLnDebris = 1e-9;

void check(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// Sorted-ascending log-sum-exp with Kahan compensation.
double log_sum_exp(std::vector<double>& terms) {
    if (terms.empty()) return -kInf;
    std::sort(terms.begin(), terms.end());
    const double m = terms.back();
    if (m == -kInf) return -kInf;
    double sum = 0.0, comp = 0.0;
    for (double t : terms) {
        const double y = std::exp(t - m) - comp;
        const double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    return m + std::log(sum);
}

// ln(a + b) from ln a, ln b.
double log_add(double la, double lb) {
    if (la == -kInf) return lb;
    if (lb == -kInf) return la;
    if (la < lb) std::swap(la, lb);
    return la + std::log1p(std::exp(lb - la));
}

// Cached ln i! for i <= n.
class LogFactorials {
public:
    explicit LogFactorials(std::size_t n) : lf_(n + 1) {
        for (std::size_t i = 0; i <= n; ++i) lf_[i] = std::lgamma(static_cast<double>(i) + 1.0);
    }
    double binom(std::size_t n, std::size_t k) const {
        if (k > n) return -kInf;
        return lf_[n] - lf_[k] - lf_[n - k];
    }

private:
    std::vector<double> lf_;
};

} // namespace

Probability Probability::from_value(double p) {
    check(p >= 0.0 && p <= 1.0 && !std::isnan(p), "Probability: value outside [0,1]");
    if (p == 0.0) return zero();
    if (p == 1.0) return one();
    return from_ln_pair(std::log(p), std::log1p(-p));
}

Probability Probability::from_ln(double lp) {
    if (lp > 0.0 && lp < kLnDebris) lp = 0.0;
    check(lp <= 0.0 && !std::isnan(lp), "Probability: ln value above 0");
    return from_ln_pair(lp, ln1m_from_ln(lp));
}

Probability Probability::from_ln_pair(double lp, double l1p) {
    // The two sides usually come from independent log-domain sums, so the
    // side near zero carries absolute rather than relative accuracy: a head
    // summing to 1 - 8e-15 can come out as -2e-13 or even +1e-13. The far
    // side always has full relative precision, so the near side is rebuilt
    // from it; deriving anything from the debris would turn its absolute
    // error into unbounded relative error.
    if (lp <= -kLn2 && l1p > -kLn2 && l1p < kLnDebris) {
        l1p = ln1m_from_ln(lp);
    } else if (l1p <= -kLn2 && lp > -kLn2 && lp < kLnDebris) {
        lp = ln1m_from_ln(l1p);
    }
    check(lp <= 0.0 && !std::isnan(lp), "Probability: ln value above 0");
    check(l1p <= 0.0 && !std::isnan(l1p), "Probability: ln complement above 0");
    Probability out;
    out.lp_ = lp;
    out.l1p_ = l1p;
    return out;
}

double Probability::value() const { return std::exp(lp_); }

double Probability::log10() const { return lp_ / 2.302585092994046; }

double ln1m_from_ln(double lp) {
    if (lp > 0.0 && lp < kLnDebris) lp = 0.0;
    check(lp <= 0.0 && !std::isnan(lp), "ln1m_from_ln: ln value above 0");
    if (lp == -kInf) return 0.0;
    if (lp == 0.0) return -kInf;
    if (lp > -kLn2) return std::log(-std::expm1(lp));
    return std::log1p(-std::exp(lp));
}

Probability product(const Probability& a, const Probability& b) {
    if (a.is_zero() || b.is_zero()) return Probability::zero();
    const double lp = a.ln() + b.ln();
    const double l1p = log_add(a.ln_complement(), a.ln() + b.ln_complement());
    return Probability::from_ln_pair(lp, l1p);
}

double log_add_exp(double la, double lb) { return log_add(la, lb); }

double log_erfc(double x) {
    if (x <= 25.0) return std::log(std::erfc(x));
    // Asymptotic expansion erfc(x) ~ exp(-x^2) / (x sqrt(pi)) * S(x) with
    // S = sum (-1)^m (2m-1)!! / (2x^2)^m; terms shrink fast for x > 25.
    const double inv2x2 = 1.0 / (2.0 * x * x);
    double term = 1.0, s = 1.0;
    for (int m = 1; m < 40; ++m) {
        term *= -(2.0 * m - 1.0) * inv2x2;
        if (std::abs(term) < 1e-18) break;
        s += term;
    }
    return -x * x - std::log(x) - 0.5723649429247001 /* ln sqrt(pi) */ + std::log(s);
}

double log_binomial(std::size_t n, std::size_t k) {
    if (k > n) throw std::invalid_argument("log_binomial: k exceeds n");
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

Probability channel_p0(double ebn0_db, double rate) {
    check(rate > 0.0 && rate <= 1.0, "channel_p0: rate outside (0,1]");
    check(std::isfinite(ebn0_db), "channel_p0: SNR not finite");
    const double ratio = std::pow(10.0, ebn0_db / 10.0);
    const double x = std::sqrt(rate * ratio);
    // p0 = erfc(x)/2 and 1-p0 = erfc(-x)/2; the latter needs no tail care.
    return Probability::from_ln_pair(-kLn2 + log_erfc(x),
                                     -kLn2 + std::log(std::erfc(-x)));
}

Probability frame_error_bdd(const CodeParams& code, const Probability& p0) {
    check(code.n > 0 && code.k > 0 && code.k < code.n, "frame_error_bdd: bad code");
    const std::size_t n = code.n, t = code.t;
    if (t >= n) return Probability::zero();
    if (p0.is_zero()) return Probability::zero();
    if (p0.is_one()) return Probability::one();

    const double lp = p0.ln(), l1p = p0.ln_complement();
    LogFactorials lf(n);
    std::vector<double> tail, head;
    tail.reserve(n - t);
    head.reserve(t + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double term = lf.binom(n, i) + static_cast<double>(i) * lp +
                            static_cast<double>(n - i) * l1p;
        (i > t ? tail : head).push_back(term);
    }
    return Probability::from_ln_pair(log_sum_exp(tail), log_sum_exp(head));
}

Probability pe_perfect_scrambling(const CodeParams& code, const Probability& p0) {
    const Probability pf = frame_error_bdd(code, p0);
    if (pf.is_zero()) return pf;
    // pe = pf/2; complement computed from pf directly since pf/2 <= 1/2.
    const double lpe = pf.ln() - kLn2;
    return Probability::from_ln_pair(lpe, std::log1p(-0.5 * std::exp(pf.ln())));
}

Probability pe_real_scrambling(const CodeParams& code, const Probability& p0,
                               std::size_t w) {
    check(code.n > 0 && code.k > 0 && code.k < code.n, "pe_real_scrambling: bad code");
    check(w >= 1 && w <= code.k, "pe_real_scrambling: need 1 <= w <= k");
    const std::size_t n = code.n, k = code.k, t = code.t;
    if (t >= n || p0.is_zero()) return Probability::zero();
    if (p0.is_one()) return (w % 2 == 1) ? Probability::one() : Probability::zero();

    const double lp = p0.ln(), l1p = p0.ln_complement();
    const Probability pf = frame_error_bdd(code, p0);
    if (pf.is_zero()) return Probability::zero();

    LogFactorials lf(n);
    const double l_choose_kw = lf.binom(k, w);

    // Outer sum over j = number of information-bit errors in a failed frame.
    // The j-masses sum to pf, which bounds the truncation error of stopping
    // once nearly all of that mass is accounted for.
    std::vector<double> contrib;
    std::vector<double> inner;
    double mass = -kInf;
    const double mass_target = pf.ln() + std::log1p(-1e-12);
    for (std::size_t j = 0; j <= k; ++j) {
        const std::size_t i_lo = std::max(j, t + 1);
        const std::size_t i_hi = std::min(n, j + (n - k));
        if (i_lo > i_hi) continue;
        inner.clear();
        for (std::size_t i = i_lo; i <= i_hi; ++i)
            inner.push_back(lf.binom(n - k, i - j) + static_cast<double>(i) * lp +
                            static_cast<double>(n - i) * l1p);
        const double l_pj = lf.binom(k, j) + log_sum_exp(inner);
        mass = log_add(mass, l_pj);

        if (j >= 1) {
            // P(odd overlap | j): hypergeometric draw of w output taps over k
            // positions, j of which are wrong.
            inner.clear();
            const std::size_t i_max = std::min(j, w);
            const std::size_t i_min = (w + j > k) ? (w + j - k) : 1;
            for (std::size_t i = std::max<std::size_t>(i_min, 1); i <= i_max; ++i)
                if (i % 2 == 1)
                    inner.push_back(lf.binom(j, i) + lf.binom(k - j, w - i) - l_choose_kw);
            if (!inner.empty()) contrib.push_back(l_pj + log_sum_exp(inner));
        }
        if (mass >= mass_target) break;
    }
    const double lpe = log_sum_exp(contrib);
    return Probability::from_ln_pair(lpe, ln1m_from_ln(lpe));
}

BlockRates block_perfect(const Probability& pf_single, std::size_t L) {
    check(L >= 1, "block_perfect: L must be positive");
    const double l1m_block = static_cast<double>(L) * pf_single.ln_complement();
    const double l_block = ln1m_from_ln(l1m_block);
    BlockRates out;
    out.pf = Probability::from_ln_pair(l_block, l1m_block);
    out.pe = out.pf.is_zero()
                 ? Probability::zero()
                 : Probability::from_ln_pair(l_block - kLn2,
                                             std::log1p(-0.5 * std::exp(l_block)));
    return out;
}

Probability pe_block_real(const Probability& pe_single, std::size_t L) {
    check(L >= 1, "pe_block_real: L must be positive");
    if (pe_single.is_zero()) return Probability::zero();
    // P(odd count of L independent events) = (1 - (1-2p)^L) / 2.
    const double q = -std::expm1(kLn2 + pe_single.ln()); // 1 - 2p, exact near p = 1/2
    if (q == 0.0) return Probability::from_value(0.5);
    if (q < 0.0) {
        // p above one half: the power alternates in sign but stays in [-1,1].
        const double qL = (L % 2 ? -1.0 : 1.0) * std::exp(static_cast<double>(L) * std::log(-q));
        return Probability::from_value(0.5 * (1.0 - qL));
    }
    const double l_qL = static_cast<double>(L) * std::log(q);
    const double lpe = ln1m_from_ln(l_qL) - kLn2;
    const double l1m = std::log1p(std::exp(l_qL)) - kLn2;
    return Probability::from_ln_pair(lpe, l1m);
}

} // namespace wiretap::analytic
