// Dense GF(2) linear algebra on bit-packed words.
#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace wiretap::gf2 {

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bit vector packed LSB-first into 64-bit words; padding bits are kept zero.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t bits) : n_(bits), w_((bits + 63) / 64, 0) {}
    BitVector(std::initializer_list<int> bits);

    std::size_t size() const { return n_; }
    bool empty() const { return n_ == 0; }

    bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool v) {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (v) w_[i >> 6] |= mask; else w_[i >> 6] &= ~mask;
    }
    void flip(std::size_t i) { w_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    std::size_t weight() const;

    // XOR-accumulate; sizes must match.
    BitVector& operator^=(const BitVector& other);

    // Contiguous sub-vector [begin, begin+len).
    BitVector slice(std::size_t begin, std::size_t len) const;
    // Overwrite [begin, begin+src.size()) with src.
    void assign_slice(std::size_t begin, const BitVector& src);

    std::span<const std::uint64_t> words() const { return w_; }
    std::span<std::uint64_t> words() { return w_; }

    bool operator==(const BitVector&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

// Number of positions where a and b differ.
std::size_t hamming_distance(const BitVector& a, const BitVector& b);

// Dense binary matrix, row-major, each row padded to a whole number of words.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), stride_((cols + 63) / 64), w_(rows * stride_, 0) {}

    static BitMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    bool get(std::size_t r, std::size_t c) const {
        return (w_[r * stride_ + (c >> 6)] >> (c & 63)) & 1u;
    }
    void set(std::size_t r, std::size_t c, bool v) {
        const std::uint64_t mask = std::uint64_t{1} << (c & 63);
        std::uint64_t& word = w_[r * stride_ + (c >> 6)];
        if (v) word |= mask; else word &= ~mask;
    }
    void flip(std::size_t r, std::size_t c) {
        w_[r * stride_ + (c >> 6)] ^= std::uint64_t{1} << (c & 63);
    }

    std::span<const std::uint64_t> row(std::size_t r) const {
        return {w_.data() + r * stride_, stride_};
    }
    std::span<std::uint64_t> row(std::size_t r) {
        return {w_.data() + r * stride_, stride_};
    }

    std::size_t row_weight(std::size_t r) const;
    std::size_t col_weight(std::size_t c) const;
    std::size_t weight() const;
    // Fraction of ones over rows*cols.
    double density() const;

    void swap_rows(std::size_t a, std::size_t b);
    // row(dst) ^= row(src)
    void xor_rows(std::size_t dst, std::size_t src);

    bool operator==(const BitMatrix&) const = default;

    // Text form: header "gf2 v1 <rows> <cols>", then one lowercase-hex line per
    // row with bits packed MSB-first and the tail padded with zero bits.
    void save(std::ostream& os) const;
    static BitMatrix load(std::istream& is);
    void save_file(const std::string& path) const;
    static BitMatrix load_file(const std::string& path);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t stride_ = 0;
    std::vector<std::uint64_t> w_;
};

BitMatrix multiply(const BitMatrix& a, const BitMatrix& b);

// Row vector times matrix: out = v * m, v.size() == m.rows().
BitVector apply_vector(const BitVector& v, const BitMatrix& m);

// Gauss-Jordan with 8-bit table acceleration. Empty optional when singular.
std::optional<BitMatrix> try_invert(const BitMatrix& a);

// Same, but throws SingularMatrixError.
BitMatrix invert(const BitMatrix& a);

std::size_t rank(BitMatrix a);

} // namespace wiretap::gf2
