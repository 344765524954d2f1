#pragma once
//
// Binary persistence of a BlockStore. Fixed little-endian layout so two
// saves of the same store are byte-identical on any platform:
//
//   header : magic "ZSVD" | version u32 | block_size u32 | columns u32
//            | threshold f64 | sealed_count u64 | total_rows u64
//            | has_open_block u8
//   sealed : index u64 | k u32 | U (b*k f64, row-major) | sigma (k f64)
//            | V (c*k f64, row-major)
//   open   : index u64 | rows_seen u64 | k u32 | U | sigma | V
//

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <rangesvd/store.hpp>

namespace rangesvd {

inline constexpr std::array<char, 4> kStoreMagic{'Z', 'S', 'V', 'D'};
inline constexpr std::uint32_t       kStoreVersion = 1;

/// Factor invariants are re-checked at this tolerance when loading.
inline constexpr double kLoadDefectTol = 1e-8;

namespace detail {

inline void put_bytes(std::string& buf, const void* data, std::size_t n) {
    buf.append(static_cast<const char*>(data), n);
}

inline void put_u32(std::string& buf, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    put_bytes(buf, b, 4);
}

inline void put_u64(std::string& buf, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    put_bytes(buf, b, 8);
}

inline void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }

inline void put_f64_span(std::string& buf, std::span<const double> values) {
    for (double v : values) {
        put_f64(buf, v);
    }
}

class ByteCursor {
public:
    ByteCursor(const std::string& bytes) : bytes_(bytes) {}

    void read(void* out, std::size_t n) {
        if (pos_ + n > bytes_.size()) {
            throw CorruptionError("store file is truncated");
        }
        std::memcpy(out, bytes_.data() + pos_, n);
        pos_ += n;
    }

    std::uint32_t u32() {
        unsigned char b[4];
        read(b, 4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) {
            v = (v << 8) | b[i];
        }
        return v;
    }

    std::uint64_t u64() {
        unsigned char b[8];
        read(b, 8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) {
            v = (v << 8) | b[i];
        }
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::vector<double> f64_vec(std::size_t n) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = f64();
        }
        return out;
    }

    bool exhausted() const { return pos_ == bytes_.size(); }

private:
    const std::string& bytes_;
    std::size_t        pos_ = 0;
};

inline void append_factors(std::string& buf, const SvdFactors& f) {
    put_u32(buf, static_cast<std::uint32_t>(f.rank()));
    put_f64_span(buf, f.u.values());
    put_f64_span(buf, f.sigma);
    put_f64_span(buf, f.v.values());
}

inline SvdFactors read_factors(ByteCursor& cur, std::size_t rows, std::size_t cols) {
    const std::uint32_t k = cur.u32();
    if (k > rows || k > cols) {
        throw CorruptionError("stored rank exceeds block dimensions");
    }
    SvdFactors f;
    try {
        f.u     = DenseMatrix(rows, k, cur.f64_vec(rows * k));
        f.sigma = cur.f64_vec(k);
        f.v     = DenseMatrix(cols, k, cur.f64_vec(cols * k));
    } catch (const InvalidInputError& e) {
        throw CorruptionError(std::string("stored factors are invalid: ") + e.what());
    }
    try {
        validate_factors(f, kLoadDefectTol);
    } catch (const InvalidInputError& e) {
        throw CorruptionError(std::string("stored factors violate invariants: ") + e.what());
    }
    return f;
}

inline std::size_t factors_bytes(std::size_t rows, std::size_t cols, std::size_t k) {
    return 4 + 8 * k * (rows + 1 + cols);
}

} // namespace detail

inline constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 + 8 + 8 + 8 + 1;

/// Exact size in bytes of save_store's output for this store.
inline std::size_t serialized_size(const BlockStore& store) {
    std::size_t n = kHeaderBytes;
    for (const SealedBlock& b : store.sealed()) {
        n += 8 + detail::factors_bytes(store.block_size(), store.num_columns(), b.factors.rank());
    }
    if (store.open()) {
        n += 8 + 8 +
             detail::factors_bytes(store.open()->rows_seen, store.num_columns(),
                                   store.open()->factors.rank());
    }
    return n;
}

inline void save_store(const BlockStore& store, const std::string& path) {
    std::string buf;
    buf.reserve(serialized_size(store));

    detail::put_bytes(buf, kStoreMagic.data(), kStoreMagic.size());
    detail::put_u32(buf, kStoreVersion);
    detail::put_u32(buf, static_cast<std::uint32_t>(store.block_size()));
    detail::put_u32(buf, static_cast<std::uint32_t>(store.num_columns()));
    detail::put_f64(buf, store.energy_threshold());
    detail::put_u64(buf, store.sealed().size());
    detail::put_u64(buf, store.total_rows());
    buf.push_back(store.open() ? '\x01' : '\x00');

    for (const SealedBlock& b : store.sealed()) {
        detail::put_u64(buf, b.index);
        detail::append_factors(buf, b.factors);
    }
    if (store.open()) {
        detail::put_u64(buf, store.open()->index);
        detail::put_u64(buf, store.open()->rows_seen);
        detail::append_factors(buf, store.open()->factors);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

inline BlockStore load_store(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    detail::ByteCursor cur(bytes);

    std::array<char, 4> magic{};
    cur.read(magic.data(), magic.size());
    if (magic != kStoreMagic) {
        throw FormatError("'" + path + "' is not a factor store (bad magic)");
    }
    const std::uint32_t version = cur.u32();
    if (version != kStoreVersion) {
        throw FormatError("unsupported store version " + std::to_string(version));
    }

    const std::size_t block_size   = cur.u32();
    const std::size_t cols         = cur.u32();
    const double      threshold    = cur.f64();
    const std::size_t sealed_count = cur.u64();
    const std::size_t total_rows   = cur.u64();
    unsigned char     has_open     = 0;
    cur.read(&has_open, 1);
    if (has_open > 1) {
        throw CorruptionError("invalid open-block flag");
    }
    if (block_size < 1 || cols < 1 || !(threshold > 0.0) || threshold > 1.0) {
        throw CorruptionError("store header parameters out of range");
    }

    std::deque<SealedBlock> sealed;
    for (std::size_t i = 0; i < sealed_count; ++i) {
        const std::uint64_t index = cur.u64();
        if (index != i) {
            throw CorruptionError("sealed blocks out of order");
        }
        sealed.push_back(SealedBlock{index, detail::read_factors(cur, block_size, cols)});
    }

    std::optional<OpenBlock> open;
    if (has_open) {
        const std::uint64_t index     = cur.u64();
        const std::uint64_t rows_seen = cur.u64();
        if (index != sealed_count || rows_seen < 1 || rows_seen > block_size) {
            throw CorruptionError("open block is inconsistent with the header");
        }
        open = OpenBlock{index, rows_seen, detail::read_factors(cur, rows_seen, cols)};
    }

    if (!cur.exhausted()) {
        throw CorruptionError("trailing bytes after the last block");
    }
    if (total_rows != block_size * sealed_count + (open ? open->rows_seen : 0)) {
        throw CorruptionError("row count does not match stored blocks");
    }

    return BlockStore::from_parts(block_size, cols, threshold, std::move(sealed), std::move(open));
}

} // namespace rangesvd
