#include "wiretap/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace wiretap::ldpc {

namespace {

void check(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

constexpr double kLlrClip = 25.0;

// phi(x) = -ln tanh(x/2) = ln((1+e^-x)/(1-e^-x)), its own inverse. Inputs are
// clamped away from zero; the cap matches phi at the clamp point.
inline double phi(double x) {
    if (x < 1e-12) return 28.0; // phi(1e-12) ~ ln(2e12) ~ 28.3
    const double e = std::exp(-x);
    return std::log1p(e) - std::log1p(-e);
}

inline double clip(double x) {
    if (x > kLlrClip) return kLlrClip;
    if (x < -kLlrClip) return -kLlrClip;
    return x;
}

} // namespace

std::size_t SparseParityCheck::edge_count() const {
    std::size_t e = 0;
    for (const auto& vc : var_checks) e += vc.size();
    return e;
}

bool SparseParityCheck::syndrome_ok(const gf2::BitVector& word) const {
    if (word.size() != n) throw std::invalid_argument("syndrome_ok: length mismatch");
    for (const auto& cv : check_vars) {
        bool parity = false;
        for (std::uint32_t v : cv) parity ^= word.get(v);
        if (parity) return false;
    }
    return true;
}

SparseParityCheck peg_construct(std::size_t n, std::size_t k, std::size_t col_weight,
                                std::uint64_t seed) {
    check(n > 0 && k > 0 && k < n, "peg: need 0 < k < n");
    const std::size_t m = n - k;
    check(col_weight >= 2 && col_weight <= m, "peg: need 2 <= col_weight <= n - k");

    SparseParityCheck h;
    h.n = n;
    h.m = m;
    h.var_checks.assign(n, {});
    h.check_vars.assign(m, {});
    std::vector<std::size_t> check_deg(m, 0);

    const std::size_t offset = seed % m;
    auto rot = [m, offset](std::uint32_t c) { return (c + m - offset) % m; };

    // BFS scratch, reused across edges.
    std::vector<int> check_depth(m);
    std::vector<char> var_seen(n);
    std::vector<std::uint32_t> cur_vars, next_vars, level_checks;

    for (std::uint32_t v = 0; v < n; ++v) {
        for (std::size_t j = 0; j < col_weight; ++j) {
            // Expand the subgraph rooted at v level by level. Checks keep the
            // depth at which they were first reached; the deepest nonempty
            // level is kept in level_checks.
            std::fill(check_depth.begin(), check_depth.end(), -1);
            std::fill(var_seen.begin(), var_seen.end(), 0);
            cur_vars.assign(1, v);
            var_seen[v] = 1;
            std::size_t reached = 0;
            level_checks.clear();
            for (int depth = 0; !cur_vars.empty(); ++depth) {
                std::vector<std::uint32_t> found;
                for (std::uint32_t cv : cur_vars)
                    for (std::uint32_t c : h.var_checks[cv])
                        if (check_depth[c] < 0) {
                            check_depth[c] = depth;
                            found.push_back(c);
                        }
                if (found.empty()) break;
                reached += found.size();
                level_checks = std::move(found);
                next_vars.clear();
                for (std::uint32_t c : level_checks)
                    for (std::uint32_t cand : h.check_vars[c])
                        if (!var_seen[cand]) {
                            var_seen[cand] = 1;
                            next_vars.push_back(cand);
                        }
                cur_vars = next_vars;
            }

            // Candidates: checks outside the subgraph if any, else the
            // deepest level. Pick the lowest (degree, rotated index).
            std::uint32_t best = 0;
            bool have = false;
            auto consider = [&](std::uint32_t c) {
                if (!have || std::make_pair(check_deg[c], rot(c)) <
                                 std::make_pair(check_deg[best], rot(best))) {
                    best = c;
                    have = true;
                }
            };
            if (reached < m) {
                for (std::uint32_t c = 0; c < m; ++c)
                    if (check_depth[c] < 0) consider(c);
            } else {
                for (std::uint32_t c : level_checks) consider(c);
            }

            h.var_checks[v].push_back(best);
            h.check_vars[best].push_back(v);
            ++check_deg[best];
        }
    }

    for (auto& vc : h.var_checks) std::sort(vc.begin(), vc.end());
    for (auto& cv : h.check_vars) std::sort(cv.begin(), cv.end());
    return h;
}

void save_alist(const SparseParityCheck& h, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("alist: cannot open " + path);
    std::size_t max_col = 0, max_row = 0;
    for (const auto& vc : h.var_checks) max_col = std::max(max_col, vc.size());
    for (const auto& cv : h.check_vars) max_row = std::max(max_row, cv.size());
    os << h.n << ' ' << h.m << '\n' << max_col << ' ' << max_row << '\n';
    for (std::size_t v = 0; v < h.n; ++v)
        os << h.var_checks[v].size() << (v + 1 < h.n ? ' ' : '\n');
    for (std::size_t c = 0; c < h.m; ++c)
        os << h.check_vars[c].size() << (c + 1 < h.m ? ' ' : '\n');
    // Neighbor lists are 1-indexed and zero-padded to the maximum degree.
    for (const auto& vc : h.var_checks) {
        for (std::size_t i = 0; i < max_col; ++i)
            os << (i < vc.size() ? vc[i] + 1 : 0) << (i + 1 < max_col ? ' ' : '\n');
    }
    for (const auto& cv : h.check_vars) {
        for (std::size_t i = 0; i < max_row; ++i)
            os << (i < cv.size() ? cv[i] + 1 : 0) << (i + 1 < max_row ? ' ' : '\n');
    }
    if (!os) throw std::runtime_error("alist: write failed");
}

SparseParityCheck load_alist(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("alist: cannot open " + path);
    std::size_t n = 0, m = 0, max_col = 0, max_row = 0;
    if (!(is >> n >> m >> max_col >> max_row))
        throw std::runtime_error("alist: bad header");
    std::vector<std::size_t> col_deg(n), row_deg(m);
    for (auto& d : col_deg)
        if (!(is >> d)) throw std::runtime_error("alist: bad column degrees");
    for (auto& d : row_deg)
        if (!(is >> d)) throw std::runtime_error("alist: bad row degrees");

    SparseParityCheck h;
    h.n = n;
    h.m = m;
    h.var_checks.assign(n, {});
    h.check_vars.assign(m, {});
    is >> std::ws;
    std::string line;
    auto read_list = [&](std::size_t deg, std::size_t limit,
                         std::vector<std::uint32_t>& out) {
        if (!std::getline(is, line)) throw std::runtime_error("alist: truncated file");
        std::istringstream ls(line);
        long long x;
        while (ls >> x) {
            if (x == 0) continue; // padding
            if (x < 1 || static_cast<std::size_t>(x) > limit)
                throw std::runtime_error("alist: index out of range");
            out.push_back(static_cast<std::uint32_t>(x - 1));
        }
        if (out.size() != deg) throw std::runtime_error("alist: degree mismatch");
    };
    for (std::size_t v = 0; v < n; ++v) read_list(col_deg[v], m, h.var_checks[v]);
    for (std::size_t c = 0; c < m; ++c) read_list(row_deg[c], n, h.check_vars[c]);

    // Cross-validate the two adjacency views.
    std::size_t edges_vc = 0, edges_cv = 0;
    for (const auto& vc : h.var_checks) edges_vc += vc.size();
    for (const auto& cv : h.check_vars) edges_cv += cv.size();
    if (edges_vc != edges_cv) throw std::runtime_error("alist: inconsistent edge counts");
    for (std::size_t v = 0; v < n; ++v)
        for (std::uint32_t c : h.var_checks[v])
            if (!std::binary_search(h.check_vars[c].begin(), h.check_vars[c].end(),
                                    static_cast<std::uint32_t>(v))) {
                // Lists may be unsorted in foreign files; fall back to a scan.
                if (std::find(h.check_vars[c].begin(), h.check_vars[c].end(), v) ==
                    h.check_vars[c].end())
                    throw std::runtime_error("alist: views disagree");
            }
    for (auto& vc : h.var_checks) std::sort(vc.begin(), vc.end());
    for (auto& cv : h.check_vars) std::sort(cv.begin(), cv.end());
    return h;
}

GeneratorResult extract_generator(const SparseParityCheck& h) {
    const std::size_t m = h.m, n = h.n;
    gf2::BitMatrix work(m, n);
    for (std::size_t c = 0; c < m; ++c)
        for (std::uint32_t v : h.check_vars[c]) work.set(c, v, true);

    std::vector<std::uint32_t> pivot_cols;
    pivot_cols.reserve(m);
    std::vector<char> is_pivot(n, 0);
    std::size_t r = 0;
    for (std::size_t c = 0; c < n && r < m; ++c) {
        std::size_t pivot = m;
        for (std::size_t i = r; i < m; ++i)
            if (work.get(i, c)) { pivot = i; break; }
        if (pivot == m) continue;
        work.swap_rows(pivot, r);
        for (std::size_t i = 0; i < m; ++i)
            if (i != r && work.get(i, c)) work.xor_rows(i, r);
        pivot_cols.push_back(static_cast<std::uint32_t>(c));
        is_pivot[c] = 1;
        ++r;
    }
    if (r < m)
        throw RankDeficientError("extract_generator: parity-check matrix rank " +
                                     std::to_string(r) + " < " + std::to_string(m),
                                 r);

    const std::size_t k = n - m;
    GeneratorResult out;
    out.column_permutation.reserve(n);
    for (std::uint32_t c = 0; c < n; ++c)
        if (!is_pivot[c]) out.column_permutation.push_back(c);
    for (std::uint32_t c : pivot_cols) out.column_permutation.push_back(c);

    // In permuted order H is [A | I_m] with A the free columns of the reduced
    // matrix, and [I_k | A^T] generates its null space.
    out.generator = gf2::BitMatrix(k, n);
    for (std::size_t j = 0; j < k; ++j) {
        out.generator.set(j, j, true);
        const std::uint32_t col = out.column_permutation[j];
        for (std::size_t i = 0; i < m; ++i)
            if (work.get(i, col)) out.generator.set(j, k + i, true);
    }
    return out;
}

LdpcCode LdpcCode::build(std::size_t n, std::size_t k, std::size_t col_weight,
                         std::uint64_t seed) {
    check(k < n, "LdpcCode: need k < n");
    SparseParityCheck h = peg_construct(n, k, col_weight, seed);
    GeneratorResult gen = extract_generator(h);

    // Renumber variables so the code works in the generator's column order.
    std::vector<std::uint32_t> new_index(n);
    for (std::uint32_t pos = 0; pos < n; ++pos) new_index[gen.column_permutation[pos]] = pos;

    LdpcCode code;
    code.n = n;
    code.k = k;
    code.seed = seed;
    code.h.n = n;
    code.h.m = h.m;
    code.h.var_checks.assign(n, {});
    code.h.check_vars.assign(h.m, {});
    for (std::size_t v = 0; v < n; ++v) code.h.var_checks[new_index[v]] = h.var_checks[v];
    for (std::size_t c = 0; c < h.m; ++c) {
        auto& cv = code.h.check_vars[c];
        cv.reserve(h.check_vars[c].size());
        for (std::uint32_t v : h.check_vars[c]) cv.push_back(new_index[v]);
        std::sort(cv.begin(), cv.end());
    }
    code.generator = std::move(gen.generator);
    code.column_permutation = std::move(gen.column_permutation);
    return code;
}

gf2::BitVector LdpcCode::encode(const gf2::BitVector& info) const {
    if (info.size() != k) throw std::invalid_argument("encode: info length mismatch");
    return gf2::apply_vector(info, generator);
}

gf2::BitVector LdpcCode::info_part(const gf2::BitVector& word) const {
    if (word.size() != n) throw std::invalid_argument("info_part: length mismatch");
    return word.slice(0, k);
}

BpDecoder::BpDecoder(const SparseParityCheck& h, std::size_t max_iters)
    : h_(h), max_iters_(max_iters) {
    check(max_iters >= 1, "BpDecoder: max_iters must be positive");
    edges_ = h.edge_count();
    check_offset_.assign(h.m + 1, 0);
    edge_var_.resize(edges_);
    std::size_t e = 0;
    for (std::size_t c = 0; c < h.m; ++c) {
        check_offset_[c] = static_cast<std::uint32_t>(e);
        for (std::uint32_t v : h.check_vars[c]) edge_var_[e++] = v;
    }
    check_offset_[h.m] = static_cast<std::uint32_t>(e);

    var_offset_.assign(h.n + 1, 0);
    for (std::size_t i = 0; i < edges_; ++i) ++var_offset_[edge_var_[i] + 1];
    for (std::size_t v = 0; v < h.n; ++v) var_offset_[v + 1] += var_offset_[v];
    var_edges_.resize(edges_);
    std::vector<std::uint32_t> cursor(var_offset_.begin(), var_offset_.end() - 1);
    for (std::size_t i = 0; i < edges_; ++i) var_edges_[cursor[edge_var_[i]]++] = static_cast<std::uint32_t>(i);

    v2c_.resize(edges_);
    c2v_.resize(edges_);
    phi_scratch_.resize(edges_);
    posterior_.resize(h.n);
    hard_ = gf2::BitVector(h.n);
}

DecodeResult BpDecoder::decode(std::span<const double> channel_llr) {
    if (channel_llr.size() != h_.n)
        throw std::invalid_argument("decode: LLR length mismatch");

    auto all_definite = [&](auto&& value_of) {
        for (std::size_t v = 0; v < h_.n; ++v)
            if (value_of(v) == 0.0) return false;
        return true;
    };

    // Channel-only shortcut: if the raw hard decision already satisfies every
    // check (and no position is undecided), no iterations are needed.
    for (std::size_t v = 0; v < h_.n; ++v) hard_.set(v, channel_llr[v] < 0.0);
    if (all_definite([&](std::size_t v) { return channel_llr[v]; }) &&
        h_.syndrome_ok(hard_))
        return DecodeResult{hard_, true, 0};

    for (std::size_t v = 0; v < h_.n; ++v) {
        const double l = clip(channel_llr[v]);
        for (std::uint32_t idx = var_offset_[v]; idx < var_offset_[v + 1]; ++idx)
            v2c_[var_edges_[idx]] = l;
    }

    for (std::size_t iter = 1; iter <= max_iters_; ++iter) {
        // Check pass: |out_e| = phi(sum phi(|in|) - phi(|in_e|)), sign is the
        // product of the other signs. Zero-magnitude inputs are erasures, not
        // weak evidence: one erased input mutes every other outgoing message,
        // two mute the whole check. This keeps uninformative inputs exactly
        // uninformative instead of leaking the phi clamp value.
        for (std::size_t c = 0; c < h_.m; ++c) {
            const std::uint32_t lo = check_offset_[c], hi = check_offset_[c + 1];
            double total = 0.0;
            bool total_sign = false;
            std::uint32_t erased = hi;
            unsigned erasures = 0;
            for (std::uint32_t e = lo; e < hi; ++e) {
                const double mv = v2c_[e];
                total_sign ^= (mv < 0.0);
                const double a = std::abs(mv);
                if (a == 0.0) {
                    ++erasures;
                    erased = e;
                    phi_scratch_[e] = 0.0;
                    continue;
                }
                const double p = phi(a);
                phi_scratch_[e] = p;
                total += p;
            }
            for (std::uint32_t e = lo; e < hi; ++e) {
                double mag = 0.0;
                if (erasures == 0) {
                    const double rest = total - phi_scratch_[e];
                    mag = phi(rest > 0.0 ? rest : 0.0);
                } else if (erasures == 1 && e == erased && total > 0.0) {
                    mag = phi(total);
                }
                const bool sign = total_sign ^ (v2c_[e] < 0.0);
                c2v_[e] = sign ? -mag : mag;
            }
        }

        // Variable pass and posterior.
        for (std::size_t v = 0; v < h_.n; ++v) {
            double sum = channel_llr[v];
            for (std::uint32_t idx = var_offset_[v]; idx < var_offset_[v + 1]; ++idx)
                sum += c2v_[var_edges_[idx]];
            posterior_[v] = sum;
            hard_.set(v, sum < 0.0);
            for (std::uint32_t idx = var_offset_[v]; idx < var_offset_[v + 1]; ++idx) {
                const std::uint32_t e = var_edges_[idx];
                v2c_[e] = clip(sum - c2v_[e]);
            }
        }

        if (h_.syndrome_ok(hard_) &&
            all_definite([&](std::size_t v) { return posterior_[v]; }))
            return DecodeResult{hard_, true, iter};
    }
    return DecodeResult{hard_, false, max_iters_};
}

DecodeResult decode_bp(const SparseParityCheck& h, std::span<const double> channel_llr,
                       std::size_t max_iters) {
    BpDecoder dec(h, max_iters);
    return dec.decode(channel_llr);
}

} // namespace wiretap::ldpc
