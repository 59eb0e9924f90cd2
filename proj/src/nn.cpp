#include "bytesgan/nn.hpp"

#include <algorithm>
#include <limits>

#include "bytesgan/errors.hpp"

namespace bytesgan::nn {

namespace {

// Upper bound on elements of a chunked patch matrix (about 8 MB of floats).
constexpr std::size_t kChunkBudget = std::size_t{1} << 21;

std::size_t chunk_samples(const ConvGeometry& g) {
    return std::max<std::size_t>(1, kChunkBudget / std::max<std::size_t>(1, g.positions() * g.patch()));
}

template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

template <typename T>
using VecMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstVecMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

// Eigen's vectorized reductions peel by runtime pointer alignment, so their
// summation order (and rounding) can change between calls. These keep a fixed order.
template <typename T>
T fixed_dot(const T* a, const T* b, std::size_t n) {
    T acc[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (std::size_t k = 0; k < 8; ++k) acc[k] += a[i + k] * b[i + k];
    }
    for (; i < n; ++i) acc[0] += a[i] * b[i];
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

// db[j] += sum over rows of the rows x cols row-major block dy.
template <typename T>
void add_column_sums(const T* dy, std::size_t rows, std::size_t cols, T* db) {
    for (std::size_t r = 0; r < rows; ++r) {
        const T* row = dy + r * cols;
        for (std::size_t j = 0; j < cols; ++j) db[j] += row[j];
    }
}

// Stride-1 convolutions with very few output channels (the generator's final
// 7x7 layer) are memory-bound through im2col; they run directly over a
// zero-padded copy of the input instead, where one kernel row spans
// kernel_w * in_c contiguous values.
bool use_direct(const ConvGeometry& g) { return g.stride == 1 && g.out_c <= 4; }

struct Padded {
    int h, w;
    std::size_t row;  // values per padded row
};

Padded padded_shape(const ConvGeometry& g) {
    return {g.out_h + g.kernel_h - 1, g.out_w + g.kernel_w - 1,
            static_cast<std::size_t>(g.out_w + g.kernel_w - 1) * g.in_c};
}

template <typename T>
void pad_sample(const ConvGeometry& g, const Padded& ps, const T* x, std::vector<T>& buf) {
    buf.assign(static_cast<std::size_t>(ps.h) * ps.row, T(0));
    const std::size_t c = g.in_c;
    for (int iy = 0; iy < g.in_h; ++iy) {
        const int py = iy + g.pad_top;
        if (py < 0 || py >= ps.h) continue;
        for (int ix = 0; ix < g.in_w; ++ix) {
            const int px = ix + g.pad_left;
            if (px < 0 || px >= ps.w) continue;
            std::copy_n(x + (static_cast<std::size_t>(iy) * g.in_w + ix) * c, c,
                        buf.data() + py * ps.row + static_cast<std::size_t>(px) * c);
        }
    }
}

/// Weights regrouped as (out_c, kh, kw * in_c).
template <typename T>
std::vector<T> regroup_weights(const ConvGeometry& g, const T* w) {
    const std::size_t patch = g.patch();
    std::vector<T> wt(patch * g.out_c);
    for (std::size_t i = 0; i < patch; ++i) {
        for (int oc = 0; oc < g.out_c; ++oc) wt[oc * patch + i] = w[i * g.out_c + oc];
    }
    return wt;
}

template <typename T>
void direct_forward(const ConvGeometry& g, std::size_t batch, const T* x, const T* w, const T* b, T* y) {
    const Padded ps = padded_shape(g);
    const auto wt = regroup_weights(g, w);
    const std::size_t span = static_cast<std::size_t>(g.kernel_w) * g.in_c;
    const std::size_t c = g.in_c;
    std::vector<T> buf;
    for (std::size_t s = 0; s < batch; ++s) {
        pad_sample(g, ps, x + s * g.in_size(), buf);
        T* ys = y + s * g.out_size();
        for (int oy = 0; oy < g.out_h; ++oy) {
            for (int ox = 0; ox < g.out_w; ++ox) {
                for (int oc = 0; oc < g.out_c; ++oc) {
                    T acc = b[oc];
                    const T* wk = wt.data() + oc * g.patch();
                    for (int ky = 0; ky < g.kernel_h; ++ky) {
                        const T* row = buf.data() + (oy + ky) * ps.row + ox * c;
                        acc += fixed_dot(row, wk + ky * span, span);
                    }
                    ys[(static_cast<std::size_t>(oy) * g.out_w + ox) * g.out_c + oc] = acc;
                }
            }
        }
    }
}

template <typename T>
void direct_backward(const ConvGeometry& g, std::size_t batch, const T* x, const T* w, const T* dy, T* dw, T* db,
                     T* dx) {
    const Padded ps = padded_shape(g);
    const auto wt = regroup_weights(g, w);
    std::vector<T> dwt(wt.size(), T(0));
    const std::size_t span = static_cast<std::size_t>(g.kernel_w) * g.in_c;
    const std::size_t c = g.in_c;
    std::vector<T> buf, dbuf;
    for (std::size_t s = 0; s < batch; ++s) {
        if (dw) pad_sample(g, ps, x + s * g.in_size(), buf);
        if (dx) dbuf.assign(static_cast<std::size_t>(ps.h) * ps.row, T(0));
        const T* dys = dy + s * g.out_size();
        for (int oy = 0; oy < g.out_h; ++oy) {
            for (int ox = 0; ox < g.out_w; ++ox) {
                for (int oc = 0; oc < g.out_c; ++oc) {
                    const T d = dys[(static_cast<std::size_t>(oy) * g.out_w + ox) * g.out_c + oc];
                    if (db) db[oc] += d;
                    for (int ky = 0; ky < g.kernel_h; ++ky) {
                        const std::size_t off = (oy + ky) * ps.row + ox * c;
                        const std::size_t wo = oc * g.patch() + ky * span;
                        if (dw) VecMap<T>(dwt.data() + wo, span) += d * ConstVecMap<T>(buf.data() + off, span);
                        if (dx) VecMap<T>(dbuf.data() + off, span) += d * ConstVecMap<T>(wt.data() + wo, span);
                    }
                }
            }
        }
        if (dx) {
            T* dxs = dx + s * g.in_size();
            for (int iy = 0; iy < g.in_h; ++iy) {
                const int py = iy + g.pad_top;
                for (int ix = 0; ix < g.in_w; ++ix) {
                    const int px = ix + g.pad_left;
                    T* dst = dxs + (static_cast<std::size_t>(iy) * g.in_w + ix) * c;
                    if (py < 0 || py >= ps.h || px < 0 || px >= ps.w) {
                        std::fill_n(dst, c, T(0));
                    } else {
                        std::copy_n(dbuf.data() + py * ps.row + static_cast<std::size_t>(px) * c, c, dst);
                    }
                }
            }
        }
    }
    if (dw) {
        for (std::size_t i = 0; i < g.patch(); ++i) {
            for (int oc = 0; oc < g.out_c; ++oc) dw[i * g.out_c + oc] += dwt[oc * g.patch() + i];
        }
    }
}

} // namespace

ConvGeometry ConvGeometry::same(int in_h, int in_w, int in_c, int out_c, int kernel_h, int kernel_w, int stride) {
    ConvGeometry g;
    g.in_h = in_h;
    g.in_w = in_w;
    g.in_c = in_c;
    g.out_c = out_c;
    g.kernel_h = kernel_h;
    g.kernel_w = kernel_w;
    g.stride = stride;
    g.out_h = (in_h + stride - 1) / stride;
    g.out_w = (in_w + stride - 1) / stride;
    const int pad_h = std::max((g.out_h - 1) * stride + kernel_h - in_h, 0);
    const int pad_w = std::max((g.out_w - 1) * stride + kernel_w - in_w, 0);
    g.pad_top = pad_h / 2;
    g.pad_left = pad_w / 2;
    return g;
}

ConvGeometry ConvGeometry::valid(int in_h, int in_w, int in_c, int out_c, int kernel_h, int kernel_w, int stride) {
    require(in_h >= kernel_h && in_w >= kernel_w, "valid convolution: kernel larger than input");
    ConvGeometry g;
    g.in_h = in_h;
    g.in_w = in_w;
    g.in_c = in_c;
    g.out_c = out_c;
    g.kernel_h = kernel_h;
    g.kernel_w = kernel_w;
    g.stride = stride;
    g.out_h = (in_h - kernel_h) / stride + 1;
    g.out_w = (in_w - kernel_w) / stride + 1;
    return g;
}

template <typename T>
void im2col(const ConvGeometry& g, const T* x, T* cols) {
    const std::size_t c = static_cast<std::size_t>(g.in_c);
    T* out = cols;
    for (int oy = 0; oy < g.out_h; ++oy) {
        for (int ox = 0; ox < g.out_w; ++ox) {
            for (int ky = 0; ky < g.kernel_h; ++ky) {
                const int iy = oy * g.stride - g.pad_top + ky;
                for (int kx = 0; kx < g.kernel_w; ++kx) {
                    const int ix = ox * g.stride - g.pad_left + kx;
                    if (iy < 0 || iy >= g.in_h || ix < 0 || ix >= g.in_w) {
                        std::fill(out, out + c, T(0));
                    } else {
                        const T* src = x + (static_cast<std::size_t>(iy) * g.in_w + ix) * c;
                        std::copy(src, src + c, out);
                    }
                    out += c;
                }
            }
        }
    }
}

template <typename T>
void col2im(const ConvGeometry& g, const T* cols, T* dx) {
    const std::size_t c = static_cast<std::size_t>(g.in_c);
    const T* in = cols;
    for (int oy = 0; oy < g.out_h; ++oy) {
        for (int ox = 0; ox < g.out_w; ++ox) {
            for (int ky = 0; ky < g.kernel_h; ++ky) {
                const int iy = oy * g.stride - g.pad_top + ky;
                for (int kx = 0; kx < g.kernel_w; ++kx) {
                    const int ix = ox * g.stride - g.pad_left + kx;
                    if (iy >= 0 && iy < g.in_h && ix >= 0 && ix < g.in_w) {
                        T* dst = dx + (static_cast<std::size_t>(iy) * g.in_w + ix) * c;
                        for (std::size_t k = 0; k < c; ++k) dst[k] += in[k];
                    }
                    in += c;
                }
            }
        }
    }
}

template <typename T>
void conv_forward(const ConvGeometry& g, std::size_t batch, std::span<const T> x, std::span<const T> w,
                  std::span<const T> b, std::span<T> y) {
    require(x.size() == batch * g.in_size() && y.size() == batch * g.out_size() &&
                w.size() == g.weight_count() && b.size() == static_cast<std::size_t>(g.out_c),
            "conv_forward: shape mismatch");
    if (use_direct(g)) {
        direct_forward(g, batch, x.data(), w.data(), b.data(), y.data());
        return;
    }
    const std::size_t pos = g.positions(), patch = g.patch();
    const std::size_t chunk = chunk_samples(g);
    ConstMapRM<T> W(w.data(), patch, g.out_c);
    Eigen::Map<const RowVec<T>> bias(b.data(), g.out_c);
    MatrixRM<T> cols;
    for (std::size_t s0 = 0; s0 < batch; s0 += chunk) {
        const std::size_t n = std::min(chunk, batch - s0);
        cols.resize(n * pos, patch);
        for (std::size_t s = 0; s < n; ++s) {
            im2col(g, x.data() + (s0 + s) * g.in_size(), cols.data() + s * pos * patch);
        }
        MapRM<T> Y(y.data() + s0 * g.out_size(), n * pos, g.out_c);
        Y.noalias() = cols * W;
        Y.rowwise() += bias;
    }
}

template <typename T>
void conv_backward(const ConvGeometry& g, std::size_t batch, std::span<const T> x, std::span<const T> w,
                   std::span<const T> dy, std::span<T> dw, std::span<T> db, std::span<T> dx) {
    require(x.size() == batch * g.in_size() && dy.size() == batch * g.out_size() &&
                w.size() == g.weight_count() && (dw.empty() || dw.size() == w.size()) &&
                (dw.empty() || db.size() == static_cast<std::size_t>(g.out_c)) &&
                (dx.empty() || dx.size() == x.size()),
            "conv_backward: shape mismatch");
    const bool want_params = !dw.empty();
    if (!want_params && dx.empty()) return;
    if (use_direct(g)) {
        direct_backward(g, batch, x.data(), w.data(), dy.data(), want_params ? dw.data() : nullptr,
                        want_params ? db.data() : nullptr, dx.empty() ? nullptr : dx.data());
        return;
    }
    const std::size_t pos = g.positions(), patch = g.patch();
    const std::size_t chunk = chunk_samples(g);
    ConstMapRM<T> W(w.data(), patch, g.out_c);
    MatrixRM<T> cols, dcols;
    if (!dx.empty()) std::fill(dx.begin(), dx.end(), T(0));
    for (std::size_t s0 = 0; s0 < batch; s0 += chunk) {
        const std::size_t n = std::min(chunk, batch - s0);
        ConstMapRM<T> dY(dy.data() + s0 * g.out_size(), n * pos, g.out_c);
        if (want_params) {
            cols.resize(n * pos, patch);
            for (std::size_t s = 0; s < n; ++s) {
                im2col(g, x.data() + (s0 + s) * g.in_size(), cols.data() + s * pos * patch);
            }
            MapRM<T> dW(dw.data(), patch, g.out_c);
            dW.noalias() += cols.transpose() * dY;
            add_column_sums(dY.data(), static_cast<std::size_t>(dY.rows()), static_cast<std::size_t>(g.out_c), db.data());
        }
        if (!dx.empty()) {
            dcols.noalias() = dY * W.transpose();
            for (std::size_t s = 0; s < n; ++s) {
                col2im(g, dcols.data() + s * pos * patch, dx.data() + (s0 + s) * g.in_size());
            }
        }
    }
}

template <typename T>
void conv_transpose_forward(const ConvGeometry& g, std::size_t batch, std::span<const T> x_small,
                            std::span<const T> w, std::span<const T> b, std::span<T> y_big) {
    require(x_small.size() == batch * g.out_size() && y_big.size() == batch * g.in_size() &&
                w.size() == g.weight_count() && b.size() == static_cast<std::size_t>(g.in_c),
            "conv_transpose_forward: shape mismatch");
    const std::size_t pos = g.positions(), patch = g.patch();
    const std::size_t chunk = chunk_samples(g);
    ConstMapRM<T> W(w.data(), patch, g.out_c);
    Eigen::Map<const RowVec<T>> bias(b.data(), g.in_c);
    MatrixRM<T> cols;
    std::fill(y_big.begin(), y_big.end(), T(0));
    for (std::size_t s0 = 0; s0 < batch; s0 += chunk) {
        const std::size_t n = std::min(chunk, batch - s0);
        ConstMapRM<T> X(x_small.data() + s0 * g.out_size(), n * pos, g.out_c);
        cols.noalias() = X * W.transpose();
        for (std::size_t s = 0; s < n; ++s) {
            col2im(g, cols.data() + s * pos * patch, y_big.data() + (s0 + s) * g.in_size());
        }
    }
    MapRM<T> Y(y_big.data(), batch * g.in_h * g.in_w, g.in_c);
    Y.rowwise() += bias;
}

template <typename T>
void conv_transpose_backward(const ConvGeometry& g, std::size_t batch, std::span<const T> x_small,
                             std::span<const T> w, std::span<const T> dy_big, std::span<T> dw,
                             std::span<T> db, std::span<T> dx_small) {
    require(x_small.size() == batch * g.out_size() && dy_big.size() == batch * g.in_size() &&
                w.size() == g.weight_count() && (dw.empty() || dw.size() == w.size()) &&
                (dw.empty() || db.size() == static_cast<std::size_t>(g.in_c)) &&
                (dx_small.empty() || dx_small.size() == x_small.size()),
            "conv_transpose_backward: shape mismatch");
    const bool want_params = !dw.empty();
    if (!want_params && dx_small.empty()) return;
    const std::size_t pos = g.positions(), patch = g.patch();
    const std::size_t chunk = chunk_samples(g);
    ConstMapRM<T> W(w.data(), patch, g.out_c);
    if (want_params) {
        ConstMapRM<T> dYall(dy_big.data(), batch * g.in_h * g.in_w, g.in_c);
        add_column_sums(dy_big.data(), batch * g.in_h * g.in_w, static_cast<std::size_t>(g.in_c), db.data());
    }
    MatrixRM<T> dcols;
    for (std::size_t s0 = 0; s0 < batch; s0 += chunk) {
        const std::size_t n = std::min(chunk, batch - s0);
        dcols.resize(n * pos, patch);
        for (std::size_t s = 0; s < n; ++s) {
            im2col(g, dy_big.data() + (s0 + s) * g.in_size(), dcols.data() + s * pos * patch);
        }
        ConstMapRM<T> X(x_small.data() + s0 * g.out_size(), n * pos, g.out_c);
        if (want_params) {
            MapRM<T> dW(dw.data(), patch, g.out_c);
            dW.noalias() += dcols.transpose() * X;
        }
        if (!dx_small.empty()) {
            MapRM<T> dX(dx_small.data() + s0 * g.out_size(), n * pos, g.out_c);
            dX.noalias() = dcols * W;
        }
    }
}

template <typename T>
void dense_forward(std::size_t batch, std::size_t in, std::size_t out, std::span<const T> x,
                   std::span<const T> w, std::span<const T> b, std::span<T> y) {
    require(x.size() == batch * in && w.size() == in * out && b.size() == out && y.size() == batch * out,
            "dense_forward: shape mismatch");
    ConstMapRM<T> X(x.data(), batch, in);
    ConstMapRM<T> W(w.data(), in, out);
    MapRM<T> Y(y.data(), batch, out);
    Y.noalias() = X * W;
    Y.rowwise() += Eigen::Map<const RowVec<T>>(b.data(), out);
}

template <typename T>
void dense_backward(std::size_t batch, std::size_t in, std::size_t out, std::span<const T> x,
                    std::span<const T> w, std::span<const T> dy, std::span<T> dw, std::span<T> db,
                    std::span<T> dx) {
    require(x.size() == batch * in && w.size() == in * out && dy.size() == batch * out &&
                (dw.empty() || (dw.size() == w.size() && db.size() == out)) &&
                (dx.empty() || dx.size() == x.size()),
            "dense_backward: shape mismatch");
    ConstMapRM<T> X(x.data(), batch, in);
    ConstMapRM<T> W(w.data(), in, out);
    ConstMapRM<T> dY(dy.data(), batch, out);
    if (!dw.empty()) {
        MapRM<T> dW(dw.data(), in, out);
        dW.noalias() += X.transpose() * dY;
        add_column_sums(dy.data(), batch, out, db.data());
    }
    if (!dx.empty()) {
        MapRM<T> dX(dx.data(), batch, in);
        dX.noalias() = dY * W.transpose();
    }
}

template <typename T>
void leaky_relu(std::span<T> v, T slope) {
    for (auto& e : v) e = e > T(0) ? e : e * slope;
}

template <typename T>
void leaky_relu_backward(std::span<const T> y, std::span<T> dv, T slope) {
    require(y.size() == dv.size(), "leaky_relu_backward: shape mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > T(0))) dv[i] *= slope;
    }
}

template <typename T>
void relu(std::span<T> v) {
    for (auto& e : v) e = e > T(0) ? e : T(0);
}

template <typename T>
void relu_backward(std::span<const T> y, std::span<T> dv) {
    require(y.size() == dv.size(), "relu_backward: shape mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > T(0))) dv[i] = T(0);
    }
}

template <typename T>
void max_pool1d_forward(std::size_t batch, int length, int channels, int width, std::span<const T> x,
                        std::span<T> y, std::span<std::int32_t> argmax) {
    const int out_len = length - width + 1;
    require(out_len >= 1, "max_pool1d: window larger than input");
    const std::size_t in_sz = static_cast<std::size_t>(length) * channels;
    const std::size_t out_sz = static_cast<std::size_t>(out_len) * channels;
    require(x.size() == batch * in_sz && y.size() == batch * out_sz && argmax.size() == y.size(),
            "max_pool1d_forward: shape mismatch");
    for (std::size_t s = 0; s < batch; ++s) {
        const T* xs = x.data() + s * in_sz;
        T* ys = y.data() + s * out_sz;
        std::int32_t* as = argmax.data() + s * out_sz;
        // Initialize with the first window row then sweep the rest.
        for (int o = 0; o < out_len; ++o) {
            T* yrow = ys + static_cast<std::size_t>(o) * channels;
            std::int32_t* arow = as + static_cast<std::size_t>(o) * channels;
            const T* first = xs + static_cast<std::size_t>(o) * channels;
            for (int c = 0; c < channels; ++c) {
                yrow[c] = first[c];
                arow[c] = o;
            }
            for (int k = 1; k < width; ++k) {
                const T* row = xs + static_cast<std::size_t>(o + k) * channels;
                const std::int32_t pos = o + k;
                for (int c = 0; c < channels; ++c) {
                    const bool gt = row[c] > yrow[c];
                    yrow[c] = gt ? row[c] : yrow[c];
                    arow[c] = gt ? pos : arow[c];
                }
            }
        }
    }
}

template <typename T>
void max_pool1d_backward(std::size_t batch, int length, int channels, int width,
                         std::span<const std::int32_t> argmax, std::span<const T> dy, std::span<T> dx) {
    const int out_len = length - width + 1;
    const std::size_t in_sz = static_cast<std::size_t>(length) * channels;
    const std::size_t out_sz = static_cast<std::size_t>(out_len) * channels;
    require(dx.size() == batch * in_sz && dy.size() == batch * out_sz && argmax.size() == dy.size(),
            "max_pool1d_backward: shape mismatch");
    std::fill(dx.begin(), dx.end(), T(0));
    for (std::size_t s = 0; s < batch; ++s) {
        const T* d = dy.data() + s * out_sz;
        const std::int32_t* a = argmax.data() + s * out_sz;
        T* out = dx.data() + s * in_sz;
        for (int o = 0; o < out_len; ++o) {
            for (int c = 0; c < channels; ++c) {
                const std::size_t i = static_cast<std::size_t>(o) * channels + c;
                out[static_cast<std::size_t>(a[i]) * channels + c] += d[i];
            }
        }
    }
}

#define BYTESGAN_INSTANTIATE(T)                                                                              \
    template void im2col<T>(const ConvGeometry&, const T*, T*);                                              \
    template void col2im<T>(const ConvGeometry&, const T*, T*);                                              \
    template void conv_forward<T>(const ConvGeometry&, std::size_t, std::span<const T>, std::span<const T>,  \
                                  std::span<const T>, std::span<T>);                                         \
    template void conv_backward<T>(const ConvGeometry&, std::size_t, std::span<const T>, std::span<const T>, \
                                   std::span<const T>, std::span<T>, std::span<T>, std::span<T>);            \
    template void conv_transpose_forward<T>(const ConvGeometry&, std::size_t, std::span<const T>,            \
                                            std::span<const T>, std::span<const T>, std::span<T>);           \
    template void conv_transpose_backward<T>(const ConvGeometry&, std::size_t, std::span<const T>,           \
                                             std::span<const T>, std::span<const T>, std::span<T>,           \
                                             std::span<T>, std::span<T>);                                    \
    template void dense_forward<T>(std::size_t, std::size_t, std::size_t, std::span<const T>,                \
                                   std::span<const T>, std::span<const T>, std::span<T>);                    \
    template void dense_backward<T>(std::size_t, std::size_t, std::size_t, std::span<const T>,               \
                                    std::span<const T>, std::span<const T>, std::span<T>, std::span<T>,      \
                                    std::span<T>);                                                           \
    template void leaky_relu<T>(std::span<T>, T);                                                            \
    template void leaky_relu_backward<T>(std::span<const T>, std::span<T>, T);                               \
    template void relu<T>(std::span<T>);                                                                     \
    template void relu_backward<T>(std::span<const T>, std::span<T>);                                        \
    template void max_pool1d_forward<T>(std::size_t, int, int, int, std::span<const T>, std::span<T>,        \
                                        std::span<std::int32_t>);                                            \
    template void max_pool1d_backward<T>(std::size_t, int, int, int, std::span<const std::int32_t>,          \
                                         std::span<const T>, std::span<T>);

BYTESGAN_INSTANTIATE(float)
BYTESGAN_INSTANTIATE(double)

#undef BYTESGAN_INSTANTIATE

} // namespace bytesgan::nn
