#include "wiretap/bitmatrix.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace wiretap::gf2 {

namespace {

void check(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void xor_words(std::span<std::uint64_t> dst, std::span<const std::uint64_t> src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= src[i];
}

std::size_t popcount_words(std::span<const std::uint64_t> w) {
    std::size_t n = 0;
    for (std::uint64_t x : w) n += std::popcount(x);
    return n;
}

} // namespace

BitVector::BitVector(std::initializer_list<int> bits) : BitVector(bits.size()) {
    std::size_t i = 0;
    for (int b : bits) set(i++, b != 0);
}

std::size_t BitVector::weight() const { return popcount_words(w_); }

BitVector& BitVector::operator^=(const BitVector& other) {
    check(n_ == other.n_, "BitVector xor: size mismatch");
    xor_words(w_, other.w_);
    return *this;
}

BitVector BitVector::slice(std::size_t begin, std::size_t len) const {
    check(begin + len <= n_, "BitVector slice out of range");
    BitVector out(len);
    if (len == 0) return out;
    const std::size_t shift = begin & 63;
    const std::size_t first = begin >> 6;
    const std::size_t nwords = (len + 63) / 64;
    for (std::size_t i = 0; i < nwords; ++i) {
        std::uint64_t lo = w_[first + i] >> shift;
        std::uint64_t hi = 0;
        if (shift != 0 && first + i + 1 < w_.size()) hi = w_[first + i + 1] << (64 - shift);
        out.w_[i] = lo | hi;
    }
    if (len & 63) out.w_.back() &= (std::uint64_t{1} << (len & 63)) - 1;
    return out;
}

void BitVector::assign_slice(std::size_t begin, const BitVector& src) {
    check(begin + src.n_ <= n_, "BitVector assign_slice out of range");
    for (std::size_t i = 0; i < src.n_; ++i) set(begin + i, src.get(i));
}

std::size_t hamming_distance(const BitVector& a, const BitVector& b) {
    check(a.size() == b.size(), "hamming_distance: size mismatch");
    std::size_t n = 0;
    auto wa = a.words();
    auto wb = b.words();
    for (std::size_t i = 0; i < wa.size(); ++i) n += std::popcount(wa[i] ^ wb[i]);
    return n;
}

BitMatrix BitMatrix::identity(std::size_t n) {
    BitMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

std::size_t BitMatrix::row_weight(std::size_t r) const { return popcount_words(row(r)); }

std::size_t BitMatrix::col_weight(std::size_t c) const {
    std::size_t n = 0;
    for (std::size_t r = 0; r < rows_; ++r) n += get(r, c);
    return n;
}

std::size_t BitMatrix::weight() const { return popcount_words(w_); }

double BitMatrix::density() const {
    if (rows_ == 0 || cols_ == 0) return 0.0;
    return static_cast<double>(weight()) / (static_cast<double>(rows_) * cols_);
}

void BitMatrix::swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t i = 0; i < stride_; ++i)
        std::swap(w_[a * stride_ + i], w_[b * stride_ + i]);
}

void BitMatrix::xor_rows(std::size_t dst, std::size_t src) { xor_words(row(dst), row(src)); }

void BitMatrix::save(std::ostream& os) const {
    os << "gf2 v1 " << rows_ << ' ' << cols_ << '\n';
    const std::size_t digits = (cols_ + 3) / 4;
    std::string line(digits, '0');
    for (std::size_t r = 0; r < rows_; ++r) {
        line.assign(digits, '0');
        for (std::size_t c = 0; c < cols_; ++c) {
            if (!get(r, c)) continue;
            // MSB-first: column 0 is the high bit of the first hex digit.
            const int nibble_bit = 8 >> (c % 4);
            const std::size_t pos = c / 4;
            int v = line[pos] <= '9' ? line[pos] - '0' : line[pos] - 'a' + 10;
            v |= nibble_bit;
            line[pos] = v < 10 ? static_cast<char>('0' + v) : static_cast<char>('a' + v - 10);
        }
        os << line << '\n';
    }
    if (!os) throw std::runtime_error("gf2 save: write failed");
}

BitMatrix BitMatrix::load(std::istream& is) {
    std::string magic, version;
    std::size_t rows = 0, cols = 0;
    if (!(is >> magic >> version >> rows >> cols) || magic != "gf2" || version != "v1")
        throw std::runtime_error("gf2 load: bad header");
    BitMatrix m(rows, cols);
    const std::size_t digits = (cols + 3) / 4;
    std::string line;
    for (std::size_t r = 0; r < rows; ++r) {
        if (!(is >> line) || line.size() != digits)
            throw std::runtime_error("gf2 load: bad row " + std::to_string(r));
        for (std::size_t pos = 0; pos < digits; ++pos) {
            const char ch = line[pos];
            int v;
            if (ch >= '0' && ch <= '9') v = ch - '0';
            else if (ch >= 'a' && ch <= 'f') v = ch - 'a' + 10;
            else throw std::runtime_error("gf2 load: bad hex digit");
            for (int b = 0; b < 4; ++b) {
                const std::size_t c = pos * 4 + b;
                const bool bit = (v >> (3 - b)) & 1;
                if (c < cols) {
                    if (bit) m.set(r, c, true);
                } else if (bit) {
                    throw std::runtime_error("gf2 load: nonzero padding bit");
                }
            }
        }
    }
    return m;
}

void BitMatrix::save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("gf2 save: cannot open " + path);
    save(os);
}

BitMatrix BitMatrix::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("gf2 load: cannot open " + path);
    return load(is);
}

BitMatrix multiply(const BitMatrix& a, const BitMatrix& b) {
    check(a.cols() == b.rows(), "gf2 multiply: dimension mismatch");
    BitMatrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto arow = a.row(r);
        auto orow = out.row(r);
        for (std::size_t wi = 0; wi < arow.size(); ++wi) {
            std::uint64_t word = arow[wi];
            while (word) {
                const std::size_t j = wi * 64 + std::countr_zero(word);
                word &= word - 1;
                xor_words(orow, b.row(j));
            }
        }
    }
    return out;
}

BitVector apply_vector(const BitVector& v, const BitMatrix& m) {
    check(v.size() == m.rows(), "gf2 apply_vector: dimension mismatch");
    BitVector out(m.cols());
    auto ow = out.words();
    auto vw = v.words();
    for (std::size_t wi = 0; wi < vw.size(); ++wi) {
        std::uint64_t word = vw[wi];
        while (word) {
            const std::size_t j = wi * 64 + std::countr_zero(word);
            word &= word - 1;
            xor_words(ow, m.row(j));
        }
    }
    return out;
}

namespace {

// Extracts `count` (<= 8) column bits starting at `base` as an LSB-first byte.
inline unsigned extract_bits(std::span<const std::uint64_t> row, std::size_t base,
                             unsigned count) {
    const std::size_t wi = base >> 6;
    const unsigned shift = static_cast<unsigned>(base & 63);
    std::uint64_t bits = row[wi] >> shift;
    if (shift + count > 64 && wi + 1 < row.size()) bits |= row[wi + 1] << (64 - shift);
    return static_cast<unsigned>(bits & ((std::uint64_t{1} << count) - 1));
}

} // namespace

// Gauss-Jordan elimination on [a | I] with panels of up to 8 pivot columns.
// Per panel the 256 XOR combinations of the pivot rows are tabulated once and
// every other row is cleared with a single table lookup, which cuts the row
// XOR count by the panel width.
std::optional<BitMatrix> try_invert(const BitMatrix& a) {
    check(a.rows() == a.cols(), "gf2 invert: matrix not square");
    const std::size_t n = a.rows();
    if (n == 0) return BitMatrix(0, 0);

    BitMatrix aug(n, 2 * n);
    for (std::size_t r = 0; r < n; ++r) {
        auto src = a.row(r);
        auto dst = aug.row(r);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
        aug.set(r, n + r, true);
    }

    const std::size_t width = aug.row(0).size();
    std::vector<std::uint64_t> table(256 * width);

    for (std::size_t base = 0; base < n; base += 8) {
        const unsigned kk = static_cast<unsigned>(std::min<std::size_t>(8, n - base));

        // Select pivot rows for columns base..base+kk-1. Candidate rows are
        // reduced against the pivots already chosen in this panel so the
        // target bit can be tested directly.
        for (unsigned j = 0; j < kk; ++j) {
            const std::size_t pos = base + j;
            bool found = false;
            for (std::size_t cand = pos; cand < n; ++cand) {
                for (unsigned j2 = 0; j2 < j; ++j2)
                    if (aug.get(cand, base + j2)) aug.xor_rows(cand, base + j2);
                if (aug.get(cand, base + j)) {
                    aug.swap_rows(cand, pos);
                    found = true;
                    break;
                }
            }
            if (!found) return std::nullopt;
        }

        // Clear above-diagonal bits inside the panel so the pivot block is the
        // identity; work from the last pivot upwards.
        for (unsigned p = kk; p-- > 1;)
            for (unsigned q = 0; q < p; ++q)
                if (aug.get(base + q, base + p)) aug.xor_rows(base + q, base + p);

        // Gray-code table: entry x equals the XOR of pivot rows selected by x.
        std::fill(table.begin(), table.begin() + width, 0);
        for (unsigned i = 1; i < (1u << kk); ++i) {
            const unsigned gray = i ^ (i >> 1);
            const unsigned prev = (i - 1) ^ ((i - 1) >> 1);
            const unsigned changed = std::countr_zero(i);
            auto dst = std::span<std::uint64_t>(table.data() + gray * width, width);
            auto src = std::span<const std::uint64_t>(table.data() + prev * width, width);
            auto piv = aug.row(base + changed);
            for (std::size_t w = 0; w < width; ++w) dst[w] = src[w] ^ piv[w];
        }

        for (std::size_t r = 0; r < n; ++r) {
            if (r >= base && r < base + kk) continue;
            auto rw = aug.row(r);
            const unsigned x = extract_bits(rw, base, kk);
            if (x) xor_words(rw, {table.data() + x * width, width});
        }
    }

    BitMatrix inv(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        auto src = aug.row(r);
        auto dst = inv.row(r);
        const std::size_t off = n >> 6;
        const unsigned shift = static_cast<unsigned>(n & 63);
        for (std::size_t i = 0; i < dst.size(); ++i) {
            std::uint64_t lo = src[off + i] >> shift;
            std::uint64_t hi = 0;
            if (shift != 0 && off + i + 1 < src.size()) hi = src[off + i + 1] << (64 - shift);
            dst[i] = lo | hi;
        }
        if (n & 63) dst.back() &= (std::uint64_t{1} << (n & 63)) - 1;
    }
    return inv;
}

BitMatrix invert(const BitMatrix& a) {
    auto inv = try_invert(a);
    if (!inv) throw SingularMatrixError("gf2 invert: matrix is singular");
    return std::move(*inv);
}

std::size_t rank(BitMatrix a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    std::size_t r = 0;
    for (std::size_t c = 0; c < n && r < m; ++c) {
        std::size_t pivot = m;
        for (std::size_t i = r; i < m; ++i)
            if (a.get(i, c)) { pivot = i; break; }
        if (pivot == m) continue;
        a.swap_rows(pivot, r);
        for (std::size_t i = 0; i < m; ++i)
            if (i != r && a.get(i, c)) a.xor_rows(i, r);
        ++r;
    }
    return r;
}

} // namespace wiretap::gf2
