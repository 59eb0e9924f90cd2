#pragma once

// Batched layer primitives shared by the three networks. Tensors are flat
// row-major buffers, one sample after another, channels last (H, W, C).

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bytesgan::nn {

template <typename T>
using MatrixRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRM = Eigen::Map<MatrixRM<T>>;
template <typename T>
using ConstMapRM = Eigen::Map<const MatrixRM<T>>;

/// Geometry of a 2-D convolution; weights are laid out (kh, kw, in_c, out_c).
struct ConvGeometry {
    int in_h = 0, in_w = 0, in_c = 0;
    int out_h = 0, out_w = 0, out_c = 0;
    int kernel_h = 0, kernel_w = 0;
    int stride = 1;
    int pad_top = 0, pad_left = 0;

    /// TensorFlow "same" coverage: out = ceil(in / stride), odd padding goes
    /// to the bottom/right.
    static ConvGeometry same(int in_h, int in_w, int in_c, int out_c, int kernel_h, int kernel_w, int stride);
    static ConvGeometry valid(int in_h, int in_w, int in_c, int out_c, int kernel_h, int kernel_w, int stride);

    std::size_t patch() const { return static_cast<std::size_t>(kernel_h) * kernel_w * in_c; }
    std::size_t positions() const { return static_cast<std::size_t>(out_h) * out_w; }
    std::size_t in_size() const { return static_cast<std::size_t>(in_h) * in_w * in_c; }
    std::size_t out_size() const { return positions() * out_c; }
    std::size_t weight_count() const { return patch() * out_c; }
};

/// Writes the (positions x patch) patch matrix of one sample.
template <typename T>
void im2col(const ConvGeometry& g, const T* x, T* cols);

/// Adjoint of im2col: accumulates patch gradients back into `dx`.
template <typename T>
void col2im(const ConvGeometry& g, const T* cols, T* dx);

template <typename T>
void conv_forward(const ConvGeometry& g, std::size_t batch, std::span<const T> x, std::span<const T> w,
                  std::span<const T> b, std::span<T> y);

/// Accumulates into dw/db (skipped when dw is empty); writes dx when non-empty.
template <typename T>
void conv_backward(const ConvGeometry& g, std::size_t batch, std::span<const T> x, std::span<const T> w,
                   std::span<const T> dy, std::span<T> dw, std::span<T> db, std::span<T> dx);

/// Transposed convolution: the adjoint of the convolution `g` (which maps the
/// large tensor to the small one). Input is g's output shape, result is g's
/// input shape; weights are (kh, kw, big_c, small_c), bias has big_c entries.
template <typename T>
void conv_transpose_forward(const ConvGeometry& g, std::size_t batch, std::span<const T> x_small,
                            std::span<const T> w, std::span<const T> b, std::span<T> y_big);

template <typename T>
void conv_transpose_backward(const ConvGeometry& g, std::size_t batch, std::span<const T> x_small,
                             std::span<const T> w, std::span<const T> dy_big, std::span<T> dw,
                             std::span<T> db, std::span<T> dx_small);

/// y = x W + b with x (batch x in), W (in x out).
template <typename T>
void dense_forward(std::size_t batch, std::size_t in, std::size_t out, std::span<const T> x,
                   std::span<const T> w, std::span<const T> b, std::span<T> y);

template <typename T>
void dense_backward(std::size_t batch, std::size_t in, std::size_t out, std::span<const T> x,
                    std::span<const T> w, std::span<const T> dy, std::span<T> dw, std::span<T> db,
                    std::span<T> dx);

template <typename T>
void leaky_relu(std::span<T> v, T slope);
/// dv *= (y > 0 ? 1 : slope) where y is the activation output.
template <typename T>
void leaky_relu_backward(std::span<const T> y, std::span<T> dv, T slope);

template <typename T>
void relu(std::span<T> v);
template <typename T>
void relu_backward(std::span<const T> y, std::span<T> dv);

/// Max-pool along the length axis of (length x channels) samples, stride 1,
/// valid coverage. `argmax` receives the winning input position per output.
template <typename T>
void max_pool1d_forward(std::size_t batch, int length, int channels, int width, std::span<const T> x,
                        std::span<T> y, std::span<std::int32_t> argmax);

template <typename T>
void max_pool1d_backward(std::size_t batch, int length, int channels, int width,
                         std::span<const std::int32_t> argmax, std::span<const T> dy, std::span<T> dx);

} // namespace bytesgan::nn
