#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace bytesgan {

// ---------------------------------------------------------------- hashing

/// 64-bit FNV-1a. Used for parameter digests and architecture fingerprints.
class Fnv1a {
public:
    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ULL;
        }
    }
    template <typename T>
        requires std::is_arithmetic_v<T>
    void update(T v) { update(&v, sizeof(T)); }
    void update(std::string_view s) {
        update(static_cast<std::uint64_t>(s.size()));
        update(s.data(), s.size());
    }
    std::uint64_t digest() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

template <typename T>
std::uint64_t digest_of(std::span<const T> values) {
    Fnv1a h;
    h.update(values.data(), values.size_bytes());
    return h.digest();
}

std::string hex64(std::uint64_t v);

/// Digest of a whole file's bytes; throws IoError if unreadable.
std::uint64_t file_digest(const std::string& path);

// ---------------------------------------------------------------- randomness

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a tag.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(splitmix64(seed) ^ splitmix64(tag * 0x632be59bd9b4e019ULL + 1));
}

/// Seeded generator with portable derived distributions. The standard
/// library's distributions are implementation-defined, so uniform, index and
/// normal draws are computed here from raw 64-bit outputs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t index(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t r;
        do {
            r = eng_();
        } while (r >= limit);
        return r % n;
    }

    /// Standard normal via Box-Muller (one value per call, the pair's twin cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// ---------------------------------------------------------------- little-endian I/O

class ByteWriter {
public:
    template <typename T>
        requires std::is_integral_v<T>
    void put(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            buf_.push_back(static_cast<unsigned char>((static_cast<std::make_unsigned_t<T>>(v) >> (8 * i)) & 0xFF));
        }
    }
    void put_f32(float v) {
        std::uint32_t u;
        std::memcpy(&u, &v, 4);
        put(u);
    }
    void put_f64(double v) {
        std::uint64_t u;
        std::memcpy(&u, &v, 8);
        put(u);
    }
    void put_bytes(std::span<const unsigned char> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
    void put_bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    /// u16 length prefix followed by the raw bytes.
    void put_string(std::string_view s);

    const std::vector<unsigned char>& bytes() const { return buf_; }
    std::vector<unsigned char>& bytes() { return buf_; }

private:
    std::vector<unsigned char> buf_;
};

/// Bounds-checked cursor over a byte buffer; overruns raise FormatError
/// carrying `context`.
class ByteReader {
public:
    ByteReader(std::span<const unsigned char> data, std::string context)
        : data_(data), context_(std::move(context)) {}

    template <typename T>
        requires std::is_integral_v<T>
    T get() {
        need(sizeof(T));
        std::make_unsigned_t<T> v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<std::make_unsigned_t<T>>(data_[pos_ + i]) << (8 * i);
        }
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }
    float get_f32() {
        auto u = get<std::uint32_t>();
        float f;
        std::memcpy(&f, &u, 4);
        return f;
    }
    double get_f64() {
        auto u = get<std::uint64_t>();
        double d;
        std::memcpy(&d, &u, 8);
        return d;
    }
    std::span<const unsigned char> get_bytes(std::size_t n) {
        need(n);
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::string get_string();

    std::size_t remaining() const { return data_.size() - pos_; }
    std::size_t position() const { return pos_; }
    const std::string& context() const { return context_; }

private:
    void need(std::size_t n) const;

    std::span<const unsigned char> data_;
    std::size_t pos_ = 0;
    std::string context_;
};

std::vector<unsigned char> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const unsigned char> bytes);
void write_text_file(const std::string& path, std::string_view text);

} // namespace bytesgan
