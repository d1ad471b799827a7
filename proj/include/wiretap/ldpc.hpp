// LDPC code construction (progressive edge growth), systematic generator
// extraction and sum-product decoding.
#pragma once

#include "wiretap/bitmatrix.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wiretap::ldpc {

class RankDeficientError : public std::runtime_error {
public:
    RankDeficientError(std::string msg, std::size_t rank)
        : std::runtime_error(std::move(msg)), rank_(rank) {}
    std::size_t rank() const { return rank_; }

private:
    std::size_t rank_;
};

// Sparse parity-check matrix kept as adjacency lists in both directions;
// neighbor lists are sorted ascending and edge sets are consistent.
struct SparseParityCheck {
    std::size_t n = 0; // variable nodes (codeword bits)
    std::size_t m = 0; // check nodes
    std::vector<std::vector<std::uint32_t>> var_checks;
    std::vector<std::vector<std::uint32_t>> check_vars;

    std::size_t edge_count() const;
    bool syndrome_ok(const gf2::BitVector& word) const;
};

// Progressive edge growth with constant column weight over n - k checks.
// Each new edge goes to a check at the greatest reachable distance from the
// variable (or one not reachable at all), breaking ties by smallest current
// degree and then by check index rotated by the seed, so seed 0 picks plain
// lowest-index order while other seeds produce different (equally valid)
// graphs.
SparseParityCheck peg_construct(std::size_t n, std::size_t k, std::size_t col_weight,
                                std::uint64_t seed);

void save_alist(const SparseParityCheck& h, const std::string& path);
SparseParityCheck load_alist(const std::string& path);

struct GeneratorResult {
    // k x n systematic generator [I_k | P] in permuted column order.
    gf2::BitMatrix generator;
    // permuted position -> original column; information bits occupy the first
    // k permuted positions.
    std::vector<std::uint32_t> column_permutation;
};

// Gauss-Jordan elimination over a dense copy of H. Throws RankDeficientError
// (carrying the achieved rank) when H has dependent rows.
GeneratorResult extract_generator(const SparseParityCheck& h);

struct LdpcCode {
    std::size_t n = 0;
    std::size_t k = 0;
    SparseParityCheck h; // columns renumbered to the permuted order
    gf2::BitMatrix generator;
    std::vector<std::uint32_t> column_permutation;
    std::uint64_t seed = 0;

    static LdpcCode build(std::size_t n, std::size_t k, std::size_t col_weight,
                          std::uint64_t seed);

    double rate() const { return static_cast<double>(k) / static_cast<double>(n); }
    gf2::BitVector encode(const gf2::BitVector& info) const;
    // First k positions of a (permuted-order) codeword.
    gf2::BitVector info_part(const gf2::BitVector& word) const;
};

struct DecodeResult {
    gf2::BitVector bits; // hard decisions after the last iteration
    bool converged = false;
    std::size_t iterations = 0;
};

// Sum-product decoder; check updates use the tanh rule in sign/magnitude
// form. Messages are clipped to +-25 and convergence additionally requires
// every posterior to be nonzero, so an all-zero LLR input never converges.
class BpDecoder {
public:
    explicit BpDecoder(const SparseParityCheck& h, std::size_t max_iters = 50);

    DecodeResult decode(std::span<const double> channel_llr);

    std::size_t max_iters() const { return max_iters_; }

private:
    const SparseParityCheck& h_;
    std::size_t max_iters_;
    std::size_t edges_ = 0;
    std::vector<std::uint32_t> check_offset_, edge_var_;
    std::vector<std::uint32_t> var_offset_, var_edges_;
    std::vector<double> v2c_, c2v_, phi_scratch_, posterior_;
    gf2::BitVector hard_;
};

// One-shot convenience wrapper around BpDecoder.
DecodeResult decode_bp(const SparseParityCheck& h, std::span<const double> channel_llr,
                       std::size_t max_iters = 50);

} // namespace wiretap::ldpc
