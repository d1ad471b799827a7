#include "wiretap/scrambler.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>

namespace wiretap::gf2 {

namespace {

// Unbiased draw from [0, n) by rejection; avoids std::uniform_int_distribution
// so the construction stream depends only on the mt19937_64 sequence.
std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
    for (;;) {
        const std::uint64_t x = gen();
        if (x < limit) return x % n;
    }
}

BitMatrix random_dense(std::size_t k, std::mt19937_64& gen) {
    BitMatrix m(k, k);
    const std::uint64_t tail_mask =
        (k & 63) ? (std::uint64_t{1} << (k & 63)) - 1 : ~std::uint64_t{0};
    for (std::size_t r = 0; r < k; ++r) {
        auto row = m.row(r);
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = gen();
        row.back() &= tail_mask;
    }
    return m;
}

// k x k block with every row and column of weight w. Columns are filled with
// w distinct random rows, then surplus ones migrate from heavy rows to light
// rows; a heavy row always holds a column the light row lacks, so the repair
// loop terminates.
BitMatrix random_weighted_block(std::size_t k, std::size_t w, std::mt19937_64& gen,
                                std::vector<std::uint32_t>& scratch) {
    BitMatrix m(k, k);
    std::vector<std::size_t> row_weight(k, 0);

    if (scratch.size() != k) {
        scratch.resize(k);
        std::iota(scratch.begin(), scratch.end(), 0u);
    }
    std::vector<std::size_t> picks(w);
    for (std::size_t c = 0; c < k; ++c) {
        // Partial Fisher-Yates for w distinct rows; swaps are undone afterwards
        // so the scratch permutation can be reused across columns.
        for (std::size_t i = 0; i < w; ++i) {
            const std::size_t j = i + bounded(gen, k - i);
            std::swap(scratch[i], scratch[j]);
            picks[i] = j;
            const std::size_t r = scratch[i];
            m.set(r, c, true);
            ++row_weight[r];
        }
        for (std::size_t i = w; i-- > 0;) std::swap(scratch[i], scratch[picks[i]]);
    }

    for (;;) {
        std::size_t heavy = k, light = k;
        for (std::size_t r = 0; r < k; ++r) {
            if (heavy == k && row_weight[r] > w) heavy = r;
            if (light == k && row_weight[r] < w) light = r;
            if (heavy != k && light != k) break;
        }
        if (heavy == k) break;
        auto hw = m.row(heavy);
        auto lw = m.row(light);
        std::size_t col = k;
        for (std::size_t i = 0; i < hw.size(); ++i) {
            const std::uint64_t cand = hw[i] & ~lw[i];
            if (cand) {
                col = i * 64 + static_cast<std::size_t>(std::countr_zero(cand));
                break;
            }
        }
        m.set(heavy, col, false);
        m.set(light, col, true);
        --row_weight[heavy];
        ++row_weight[light];
    }
    return m;
}

BitMatrix assemble_block_inverse(std::size_t k, std::size_t L, std::size_t w,
                                 std::mt19937_64& gen) {
    BitMatrix m(k * L, k * L);
    std::vector<std::uint32_t> scratch;
    for (std::size_t br = 0; br < L; ++br) {
        for (std::size_t bc = 0; bc < L; ++bc) {
            const BitMatrix block = random_weighted_block(k, w, gen, scratch);
            for (std::size_t r = 0; r < k; ++r)
                for (std::size_t c = 0; c < k; ++c)
                    if (block.get(r, c)) m.set(br * k + r, bc * k + c, true);
        }
    }
    return m;
}

ScramblerPair make_pair_from_inverse(BitMatrix inv_matrix, std::size_t k, std::size_t L,
                                     std::size_t w) {
    BitMatrix fwd = invert(inv_matrix);
    return ScramblerPair{k, L, w, std::move(fwd), std::move(inv_matrix)};
}

} // namespace

ScramblerPair random_dense_scrambler(std::size_t k, std::uint64_t seed) {
    if (k == 0) throw std::invalid_argument("dense scrambler: k must be positive");
    std::mt19937_64 gen(seed);
    constexpr int kMaxTries = 100;
    for (int attempt = 0; attempt < kMaxTries; ++attempt) {
        BitMatrix m = random_dense(k, gen);
        if (k >= 32) {
            const double d = m.density();
            if (d < 0.45 || d > 0.55) continue;
        }
        auto fwd = try_invert(m);
        if (!fwd) continue;
        return ScramblerPair{k, 1, 0, std::move(*fwd), std::move(m)};
    }
    throw std::runtime_error("dense scrambler: no invertible draw found");
}

ScramblerPair random_block_scrambler(std::size_t k, std::size_t L, std::size_t w,
                                     std::uint64_t seed) {
    if (k == 0 || L == 0) throw std::invalid_argument("block scrambler: k, L must be positive");
    if (w == 0 || w > k) throw std::invalid_argument("block scrambler: need 1 <= w <= k");
    std::mt19937_64 gen(seed);
    const std::size_t n = k * L;

    // A grid in which every block has exact column weight w makes the rows of
    // each block-row XOR to the constant (w mod 2) vector, so the assembly is
    // singular whenever L >= 2, and for even w already at L = 1; exact row
    // weights force the same through the block-columns. The minimal repair is
    // one flipped bit per affected diagonal block, which perturbs one row and
    // one column of that block by one while leaving the rest exact.
    const std::size_t parity_flips = (w % 2) ? (L - 1) : L;
    const std::size_t first_block = (w % 2) ? 1 : 0;

    constexpr int kMaxTries = 200;
    std::size_t extra = 0;
    for (int attempt = 0; attempt < kMaxTries; ++attempt) {
        BitMatrix m = assemble_block_inverse(k, L, w, gen);
        for (std::size_t i = 0; i < parity_flips; ++i) {
            const std::size_t d = first_block + i;
            m.flip(d * k + bounded(gen, k), d * k + bounded(gen, k));
        }
        // Structurally dead corners (w == k and similar) never become
        // invertible under the minimal repair; once fresh draws have clearly
        // failed, escalate with doubling amounts of random flips.
        for (std::size_t i = 0; i < extra; ++i) m.flip(bounded(gen, n), bounded(gen, n));
        if (auto fwd = try_invert(m))
            return ScramblerPair{k, L, w, std::move(*fwd), std::move(m)};
        if (attempt >= 50) extra = extra ? std::min(extra * 2, n * n) : 1;
    }
    throw std::runtime_error("block scrambler: no invertible matrix found");
}

std::uint64_t matrix_hash(const BitMatrix& m) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    mix(m.rows());
    mix(m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::uint64_t wrd : m.row(r)) mix(wrd);
    return h;
}

void save_scrambler(const ScramblerPair& s, const std::string& path) {
    s.inverse.save_file(path);
}

ScramblerPair load_scrambler(const std::string& path, std::size_t frame_bits,
                             std::size_t block_frames, std::size_t block_weight) {
    BitMatrix inv_matrix = BitMatrix::load_file(path);
    if (inv_matrix.rows() != inv_matrix.cols())
        throw std::runtime_error("scrambler file: matrix not square");
    if (inv_matrix.rows() != frame_bits * block_frames)
        throw std::runtime_error("scrambler file: size does not match frame geometry");
    return make_pair_from_inverse(std::move(inv_matrix), frame_bits, block_frames,
                                  block_weight);
}

} // namespace wiretap::gf2
