// Scrambling matrix pairs: dense random and concatenated block form.
#pragma once

#include "wiretap/bitmatrix.hpp"

#include <cstdint>
#include <string>

namespace wiretap::gf2 {

// `forward` maps an information block to its scrambled form, `inverse` undoes
// it: forward * inverse == I. Residual channel errors are multiplied by
// `inverse` at the receiver, so the error-spreading behaviour is governed by
// the inverse matrix; both constructors therefore shape the inverse and derive
// the forward matrix from it.
struct ScramblerPair {
    std::size_t frame_bits = 0;   // k: information bits per frame
    std::size_t block_frames = 1; // L: frames scrambled jointly
    std::size_t block_weight = 0; // w: per-block row/column weight, 0 for dense
    BitMatrix forward;
    BitMatrix inverse;

    std::size_t size() const { return frame_bits * block_frames; }

    BitVector scramble(const BitVector& u) const { return apply_vector(u, forward); }
    BitVector descramble(const BitVector& v) const { return apply_vector(v, inverse); }
};

// k x k pair whose inverse is an i.i.d. fair-coin matrix, redrawn until it is
// invertible and (for k >= 32) has empirical density within [0.45, 0.55].
// The retry stream is a deterministic function of the seed.
ScramblerPair random_dense_scrambler(std::size_t k, std::uint64_t seed);

// kL x kL pair whose inverse is an L x L grid of k x k blocks with row and
// column weight w. Exact weights everywhere force a singular matrix (the rows
// of each block-row XOR to the constant (w mod 2) vector), so the constructor
// flips one bit per affected diagonal block: L-1 cells for odd w, L for even
// w, each moving a single row and column of its block to w +- 1. Everything
// else keeps the exact weights. Redraws until the assembly is invertible and
// escalates with additional random flips only for structurally dead corners
// such as w == k.
ScramblerPair random_block_scrambler(std::size_t k, std::size_t L, std::size_t w,
                                     std::uint64_t seed);

// FNV-1a over dimensions and packed words; identifies a matrix in reports.
std::uint64_t matrix_hash(const BitMatrix& m);

// Files hold the inverse (descrambling) matrix in the gf2 text format; the
// forward matrix is recomputed on load. Frame geometry is not stored and must
// be supplied by the caller, with frame_bits * block_frames matching the
// stored dimension.
void save_scrambler(const ScramblerPair& s, const std::string& path);
ScramblerPair load_scrambler(const std::string& path, std::size_t frame_bits,
                             std::size_t block_frames, std::size_t block_weight);

} // namespace wiretap::gf2
