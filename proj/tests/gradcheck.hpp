#pragma once

// Central finite differences for double-precision test networks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace bytesgan::testing {

/// Numerical gradient of f at x (x is restored afterwards).
inline std::vector<double> numeric_gradient(std::vector<double>& x, const std::function<double()>& f,
                                            double eps = 1e-6) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + eps;
        const double up = f();
        x[i] = keep - eps;
        const double down = f();
        x[i] = keep;
        g[i] = (up - down) / (2 * eps);
    }
    return g;
}

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(std::span<const double> a, std::span<const double> b) {
    double diff = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double scale = std::sqrt(std::max(na, nb));
    return scale == 0 ? 0.0 : std::sqrt(diff) / scale;
}

inline std::vector<double> random_vector(std::size_t n, unsigned seed, double lo = -1, double hi = 1) {
    std::vector<double> v(n);
    std::uint64_t s = seed * 0x9E3779B97F4A7C15ULL + 1;
    for (auto& x : v) {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        x = lo + (hi - lo) * static_cast<double>(s >> 11) * 0x1.0p-53;
    }
    return v;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace bytesgan::testing
