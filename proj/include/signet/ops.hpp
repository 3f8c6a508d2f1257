#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "signet/error.hpp"
#include "signet/parallel.hpp"
#include "signet/tensor.hpp"

// Forward and backward kernels for every differentiable operation. All loops
// accumulate in a fixed order (kernel row-major, k ascending in matmuls), so
// outputs are bit-identical across runs and thread counts for one precision.
namespace signet::ops {

// ---------------------------------------------------------------------------
// Dense linear algebra

// C(M x N) += A(M x K) * B(K x N). C must be pre-zeroed by the caller.
template <typename T>
void gemm_nn(std::int64_t m, std::int64_t k, std::int64_t n, const T* a, const T* b, T* c) {
    parallel_for(m, [&](std::int64_t r0, std::int64_t r1) {
        for (std::int64_t i = r0; i < r1; ++i) {
            T* crow = c + i * n;
            const T* arow = a + i * k;
            for (std::int64_t p = 0; p < k; ++p) {
                const T av = arow[p];
                const T* brow = b + p * n;
                for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    });
}

// C(M x N) += A^T * B where A is (K x M), B is (K x N). C pre-zeroed.
template <typename T>
void gemm_tn(std::int64_t m, std::int64_t k, std::int64_t n, const T* a, const T* b, T* c) {
    parallel_for(m, [&](std::int64_t r0, std::int64_t r1) {
        for (std::int64_t i = r0; i < r1; ++i) {
            T* crow = c + i * n;
            for (std::int64_t p = 0; p < k; ++p) {
                const T av = a[p * m + i];
                const T* brow = b + p * n;
                for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    });
}

template <typename T>
std::vector<T> transpose(std::int64_t rows, std::int64_t cols, const T* a) {
    std::vector<T> t(static_cast<std::size_t>(rows * cols));
    for (std::int64_t i = 0; i < rows; ++i)
        for (std::int64_t j = 0; j < cols; ++j) t[static_cast<std::size_t>(j * rows + i)] = a[i * cols + j];
    return t;
}

template <typename T>
void accumulate(TensorT<T>& dst, const TensorT<T>& src) {
    if (!dst.same_shape(src))
        throw Error::numeric("accumulate: shape " + shape_str(dst.shape) + " vs " + shape_str(src.shape));
    for (std::int64_t i = 0; i < dst.numel(); ++i) dst.data[static_cast<std::size_t>(i)] += src.data[static_cast<std::size_t>(i)];
}

// ---------------------------------------------------------------------------
// Convolution geometry shared by conv2d and its adjoint.

struct ConvGeom {
    int n, h, w, c;        // dense-side tensor (conv input / transpose output)
    int kh, kw, ci, co;    // kernel dims
    int stride, pad;
    int oh, ow;            // strided-side tensor (conv output / transpose input)

    std::int64_t rows() const { return static_cast<std::int64_t>(n) * oh * ow; }
    std::int64_t cols() const { return static_cast<std::int64_t>(kh) * kw * ci; }
};

inline ConvGeom conv_geom(const std::vector<int>& input, const std::vector<int>& kernel, int stride, int pad) {
    if (input.size() != 4) throw Error::numeric("conv2d: input must be NHWC, got shape " + shape_str(input));
    if (kernel.size() != 4) throw Error::numeric("conv2d: kernel must be KhKwCinCout, got shape " + shape_str(kernel));
    if (stride < 1) throw Error::numeric("conv2d: stride must be positive, got " + std::to_string(stride));
    if (pad < 0) throw Error::numeric("conv2d: padding must be non-negative, got " + std::to_string(pad));
    ConvGeom g{input[0], input[1], input[2], input[3], kernel[0], kernel[1], kernel[2], kernel[3], stride, pad, 0, 0};
    if (g.c != g.ci)
        throw Error::numeric("conv2d: input has " + std::to_string(g.c) + " channels but kernel expects " +
                             std::to_string(g.ci) + " (input " + shape_str(input) + ", kernel " + shape_str(kernel) + ")");
    g.oh = (g.h + 2 * pad - g.kh) / stride + 1;
    g.ow = (g.w + 2 * pad - g.kw) / stride + 1;
    if (g.h + 2 * pad < g.kh || g.w + 2 * pad < g.kw || g.oh < 1 || g.ow < 1)
        throw Error::numeric("conv2d: kernel " + shape_str(kernel) + " does not fit padded input " + shape_str(input));
    return g;
}

// Geometry for conv_transpose2d: `input` lives on the strided side.
inline ConvGeom conv_transpose_geom(const std::vector<int>& input, const std::vector<int>& kernel, int stride, int pad) {
    if (input.size() != 4) throw Error::numeric("conv_transpose2d: input must be NHWC, got shape " + shape_str(input));
    if (kernel.size() != 4) throw Error::numeric("conv_transpose2d: kernel must be KhKwCinCout, got shape " + shape_str(kernel));
    if (stride < 1) throw Error::numeric("conv_transpose2d: stride must be positive, got " + std::to_string(stride));
    if (pad < 0) throw Error::numeric("conv_transpose2d: padding must be non-negative, got " + std::to_string(pad));
    ConvGeom g{};
    g.n = input[0];
    g.kh = kernel[0];
    g.kw = kernel[1];
    g.ci = kernel[2];
    g.co = kernel[3];
    g.stride = stride;
    g.pad = pad;
    g.oh = input[1];
    g.ow = input[2];
    if (input[3] != g.co)
        throw Error::numeric("conv_transpose2d: input has " + std::to_string(input[3]) + " channels but kernel expects " +
                             std::to_string(g.co) + " (input " + shape_str(input) + ", kernel " + shape_str(kernel) + ")");
    g.h = (g.oh - 1) * stride - 2 * pad + g.kh;
    g.w = (g.ow - 1) * stride - 2 * pad + g.kw;
    g.c = g.ci;
    if (g.h < 1 || g.w < 1)
        throw Error::numeric("conv_transpose2d: output size would be " + std::to_string(g.h) + "x" + std::to_string(g.w) +
                             " for input " + shape_str(input) + ", kernel " + shape_str(kernel));
    return g;
}

// Gathers kernel windows of `src` (dense side, NHWC) into a (rows x cols)
// matrix laid out [kh][kw][ci]; out-of-bounds samples are zero.
template <typename T>
TensorT<T> im2col(const ConvGeom& g, const TensorT<T>& src) {
    TensorT<T> cols({static_cast<int>(g.rows()), static_cast<int>(g.cols())});
    const std::int64_t ncols = g.cols();
    parallel_for(g.rows(), [&](std::int64_t r0, std::int64_t r1) {
        for (std::int64_t r = r0; r < r1; ++r) {
            const int x = static_cast<int>(r % g.ow);
            const int y = static_cast<int>((r / g.ow) % g.oh);
            const int n = static_cast<int>(r / (static_cast<std::int64_t>(g.ow) * g.oh));
            T* row = cols.data.data() + r * ncols;
            std::int64_t j = 0;
            for (int ky = 0; ky < g.kh; ++ky) {
                const int sy = y * g.stride + ky - g.pad;
                for (int kx = 0; kx < g.kw; ++kx) {
                    const int sx = x * g.stride + kx - g.pad;
                    if (sy < 0 || sy >= g.h || sx < 0 || sx >= g.w) {
                        for (int c = 0; c < g.ci; ++c) row[j++] = T(0);
                    } else {
                        const T* px = src.data.data() + ((static_cast<std::int64_t>(n) * g.h + sy) * g.w + sx) * g.c;
                        for (int c = 0; c < g.ci; ++c) row[j++] = px[c];
                    }
                }
            }
        }
    });
    return cols;
}

// Adjoint of im2col: scatter-adds matrix rows back into a dense-side tensor.
// Parallel over images; within one image additions follow row order.
template <typename T>
TensorT<T> col2im(const ConvGeom& g, const TensorT<T>& cols) {
    TensorT<T> out({g.n, g.h, g.w, g.c});
    const std::int64_t per_image = static_cast<std::int64_t>(g.oh) * g.ow;
    const std::int64_t ncols = g.cols();
    parallel_for(g.n, [&](std::int64_t n0, std::int64_t n1) {
        for (std::int64_t n = n0; n < n1; ++n) {
            for (std::int64_t p = 0; p < per_image; ++p) {
                const std::int64_t r = n * per_image + p;
                const int x = static_cast<int>(p % g.ow);
                const int y = static_cast<int>(p / g.ow);
                const T* row = cols.data.data() + r * ncols;
                std::int64_t j = 0;
                for (int ky = 0; ky < g.kh; ++ky) {
                    const int sy = y * g.stride + ky - g.pad;
                    for (int kx = 0; kx < g.kw; ++kx) {
                        const int sx = x * g.stride + kx - g.pad;
                        if (sy < 0 || sy >= g.h || sx < 0 || sx >= g.w) {
                            j += g.ci;
                        } else {
                            T* px = out.data.data() + ((n * g.h + sy) * g.w + sx) * g.c;
                            for (int c = 0; c < g.ci; ++c) px[c] += row[j++];
                        }
                    }
                }
            }
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// conv2d

template <typename T>
TensorT<T> conv2d(const TensorT<T>& input, const TensorT<T>& kernels, int stride, int pad,
                  TensorT<T>* saved_cols = nullptr) {
    const ConvGeom g = conv_geom(input.shape, kernels.shape, stride, pad);
    TensorT<T> cols = im2col(g, input);
    TensorT<T> out({g.n, g.oh, g.ow, g.co});
    gemm_nn(g.rows(), g.cols(), g.co, cols.data.data(), kernels.data.data(), out.data.data());
    if (saved_cols) *saved_cols = std::move(cols);
    return out;
}

template <typename T>
void conv2d_backward(const TensorT<T>& input, const TensorT<T>& kernels, int stride, int pad,
                     const TensorT<T>& saved_cols, const TensorT<T>& grad_out,
                     TensorT<T>& grad_input, TensorT<T>& grad_kernels) {
    const ConvGeom g = conv_geom(input.shape, kernels.shape, stride, pad);
    grad_kernels = TensorT<T>(kernels.shape);
    gemm_tn(g.cols(), g.rows(), g.co, saved_cols.data.data(), grad_out.data.data(), grad_kernels.data.data());
    std::vector<T> kt = transpose(g.cols(), g.co, kernels.data.data());  // co x cols
    TensorT<T> gcols({static_cast<int>(g.rows()), static_cast<int>(g.cols())});
    gemm_nn(g.rows(), g.co, g.cols(), grad_out.data.data(), kt.data(), gcols.data.data());
    grad_input = col2im(g, gcols);
}

// ---------------------------------------------------------------------------
// conv_transpose2d (adjoint of conv2d with matching stride/padding)

template <typename T>
TensorT<T> conv_transpose2d(const TensorT<T>& input, const TensorT<T>& kernels, int stride, int pad) {
    const ConvGeom g = conv_transpose_geom(input.shape, kernels.shape, stride, pad);
    std::vector<T> kt = transpose(g.cols(), g.co, kernels.data.data());  // co x cols
    TensorT<T> cols({static_cast<int>(g.rows()), static_cast<int>(g.cols())});
    gemm_nn(g.rows(), g.co, g.cols(), input.data.data(), kt.data(), cols.data.data());
    return col2im(g, cols);
}

template <typename T>
void conv_transpose2d_backward(const TensorT<T>& input, const TensorT<T>& kernels, int stride, int pad,
                               const TensorT<T>& grad_out,
                               TensorT<T>& grad_input, TensorT<T>& grad_kernels) {
    const ConvGeom g = conv_transpose_geom(input.shape, kernels.shape, stride, pad);
    TensorT<T> gcols = im2col(g, grad_out);
    grad_input = TensorT<T>(input.shape);
    gemm_nn(g.rows(), g.cols(), g.co, gcols.data.data(), kernels.data.data(), grad_input.data.data());
    grad_kernels = TensorT<T>(kernels.shape);
    gemm_tn(g.cols(), g.rows(), g.co, gcols.data.data(), input.data.data(), grad_kernels.data.data());
}

// ---------------------------------------------------------------------------
// Batch normalization (NHWC, per channel)

template <typename T>
struct BnCache {
    TensorT<T> xhat;
    std::vector<T> inv_std;  // per channel
    bool train = true;
};

template <typename T>
TensorT<T> batch_norm2d(const TensorT<T>& x, const TensorT<T>& gamma, const TensorT<T>& beta,
                        TensorT<T>* running_mean, TensorT<T>* running_var,
                        bool train, T momentum, T eps, BnCache<T>* cache = nullptr) {
    if (x.rank() != 4) throw Error::numeric("batch_norm2d: input must be NHWC, got shape " + shape_str(x.shape));
    const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
    if (gamma.numel() != c || beta.numel() != c)
        throw Error::numeric("batch_norm2d: gamma/beta must have " + std::to_string(c) + " channels, got " +
                             shape_str(gamma.shape) + " and " + shape_str(beta.shape));
    if (train && n < 2)
        throw Error::numeric("batch_norm2d: train mode needs batch size >= 2, got " + std::to_string(n));
    if (!train && (running_mean == nullptr || running_var == nullptr))
        throw Error::numeric("batch_norm2d: eval mode needs running statistics");

    const std::int64_t spatial = static_cast<std::int64_t>(n) * h * w;
    std::vector<T> mean(static_cast<std::size_t>(c), T(0));
    std::vector<T> var(static_cast<std::size_t>(c), T(0));
    if (train) {
        for (std::int64_t i = 0; i < spatial; ++i) {
            const T* px = x.data.data() + i * c;
            for (int j = 0; j < c; ++j) mean[static_cast<std::size_t>(j)] += px[j];
        }
        for (int j = 0; j < c; ++j) mean[static_cast<std::size_t>(j)] /= static_cast<T>(spatial);
        for (std::int64_t i = 0; i < spatial; ++i) {
            const T* px = x.data.data() + i * c;
            for (int j = 0; j < c; ++j) {
                const T d = px[j] - mean[static_cast<std::size_t>(j)];
                var[static_cast<std::size_t>(j)] += d * d;
            }
        }
        for (int j = 0; j < c; ++j) var[static_cast<std::size_t>(j)] /= static_cast<T>(spatial);
        if (running_mean && running_var) {
            for (int j = 0; j < c; ++j) {
                running_mean->data[static_cast<std::size_t>(j)] =
                    momentum * running_mean->data[static_cast<std::size_t>(j)] + (T(1) - momentum) * mean[static_cast<std::size_t>(j)];
                running_var->data[static_cast<std::size_t>(j)] =
                    momentum * running_var->data[static_cast<std::size_t>(j)] + (T(1) - momentum) * var[static_cast<std::size_t>(j)];
            }
        }
    } else {
        for (int j = 0; j < c; ++j) {
            mean[static_cast<std::size_t>(j)] = running_mean->data[static_cast<std::size_t>(j)];
            var[static_cast<std::size_t>(j)] = running_var->data[static_cast<std::size_t>(j)];
        }
    }

    std::vector<T> inv_std(static_cast<std::size_t>(c));
    for (int j = 0; j < c; ++j) inv_std[static_cast<std::size_t>(j)] = T(1) / std::sqrt(var[static_cast<std::size_t>(j)] + eps);

    TensorT<T> xhat(x.shape);
    TensorT<T> out(x.shape);
    for (std::int64_t i = 0; i < spatial; ++i) {
        const T* px = x.data.data() + i * c;
        T* ph = xhat.data.data() + i * c;
        T* po = out.data.data() + i * c;
        for (int j = 0; j < c; ++j) {
            ph[j] = (px[j] - mean[static_cast<std::size_t>(j)]) * inv_std[static_cast<std::size_t>(j)];
            po[j] = gamma.data[static_cast<std::size_t>(j)] * ph[j] + beta.data[static_cast<std::size_t>(j)];
        }
    }
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->inv_std = std::move(inv_std);
        cache->train = train;
    }
    return out;
}

template <typename T>
void batch_norm2d_backward(const TensorT<T>& gamma, const BnCache<T>& cache, const TensorT<T>& grad_out,
                           TensorT<T>& grad_x, TensorT<T>& grad_gamma, TensorT<T>& grad_beta) {
    const int c = gamma.dim(0);
    const std::int64_t spatial = grad_out.numel() / c;
    grad_gamma = TensorT<T>({c});
    grad_beta = TensorT<T>({c});
    for (std::int64_t i = 0; i < spatial; ++i) {
        const T* pg = grad_out.data.data() + i * c;
        const T* ph = cache.xhat.data.data() + i * c;
        for (int j = 0; j < c; ++j) {
            grad_gamma.data[static_cast<std::size_t>(j)] += pg[j] * ph[j];
            grad_beta.data[static_cast<std::size_t>(j)] += pg[j];
        }
    }
    grad_x = TensorT<T>(cache.xhat.shape);
    const T m = static_cast<T>(spatial);
    for (std::int64_t i = 0; i < spatial; ++i) {
        const T* pg = grad_out.data.data() + i * c;
        const T* ph = cache.xhat.data.data() + i * c;
        T* px = grad_x.data.data() + i * c;
        for (int j = 0; j < c; ++j) {
            const T gj = gamma.data[static_cast<std::size_t>(j)] * cache.inv_std[static_cast<std::size_t>(j)];
            if (cache.train) {
                px[j] = gj * (pg[j] - grad_beta.data[static_cast<std::size_t>(j)] / m -
                              ph[j] * grad_gamma.data[static_cast<std::size_t>(j)] / m);
            } else {
                px[j] = gj * pg[j];
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Activations

enum class Act { relu, leaky_relu, tanh, sigmoid };

inline const char* act_name(Act a) {
    switch (a) {
        case Act::relu: return "relu";
        case Act::leaky_relu: return "leaky_relu";
        case Act::tanh: return "tanh";
        case Act::sigmoid: return "sigmoid";
    }
    return "?";
}

template <typename T>
TensorT<T> activation(const TensorT<T>& x, Act kind, T alpha = T(0.2)) {
    if (kind == Act::leaky_relu && !(alpha > T(0) && alpha < T(1)))
        throw Error::numeric("leaky_relu: alpha must be in (0,1), got " + std::to_string(static_cast<double>(alpha)));
    TensorT<T> out(x.shape);
    const std::int64_t n = x.numel();
    for (std::int64_t i = 0; i < n; ++i) {
        const T v = x.data[static_cast<std::size_t>(i)];
        T r;
        switch (kind) {
            case Act::relu: r = v > T(0) ? v : T(0); break;
            case Act::leaky_relu: r = v > T(0) ? v : alpha * v; break;
            case Act::tanh: r = std::tanh(v); break;
            case Act::sigmoid:
                // Keep the contract output strictly inside (0,1); the raw
                // expression rounds to exactly 1 in float for v > ~17.
                r = std::clamp(T(1) / (T(1) + std::exp(-v)), std::numeric_limits<T>::min(),
                               T(1) - std::numeric_limits<T>::epsilon() / T(2));
                break;
            default: r = v;
        }
        out.data[static_cast<std::size_t>(i)] = r;
    }
    return out;
}

template <typename T>
TensorT<T> activation_backward(const TensorT<T>& x, const TensorT<T>& y, Act kind, T alpha, const TensorT<T>& grad_out) {
    TensorT<T> gx(x.shape);
    const std::int64_t n = x.numel();
    for (std::int64_t i = 0; i < n; ++i) {
        const T v = x.data[static_cast<std::size_t>(i)];
        const T o = y.data[static_cast<std::size_t>(i)];
        const T g = grad_out.data[static_cast<std::size_t>(i)];
        T d;
        switch (kind) {
            case Act::relu: d = v > T(0) ? T(1) : T(0); break;
            case Act::leaky_relu: d = v > T(0) ? T(1) : alpha; break;
            case Act::tanh: d = T(1) - o * o; break;
            case Act::sigmoid: d = o * (T(1) - o); break;
            default: d = T(1);
        }
        gx.data[static_cast<std::size_t>(i)] = g * d;
    }
    return gx;
}

// ---------------------------------------------------------------------------
// Dense (affine) layer

template <typename T>
TensorT<T> dense(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b) {
    if (x.rank() != 2 || w.rank() != 2 || b.rank() != 1)
        throw Error::numeric("dense: expected input NxF, weights FxG, bias G; got " + shape_str(x.shape) + ", " +
                             shape_str(w.shape) + ", " + shape_str(b.shape));
    if (x.dim(1) != w.dim(0))
        throw Error::numeric("dense: input feature dim " + std::to_string(x.dim(1)) + " does not match weight rows " +
                             std::to_string(w.dim(0)));
    if (b.dim(0) != w.dim(1))
        throw Error::numeric("dense: bias dim " + std::to_string(b.dim(0)) + " does not match weight cols " +
                             std::to_string(w.dim(1)));
    const int n = x.dim(0), f = x.dim(1), g = w.dim(1);
    TensorT<T> out({n, g});
    // Bias seeds the accumulator so the sum order matches a nested-loop
    // reference exactly.
    for (int i = 0; i < n; ++i) {
        T* row = out.data.data() + static_cast<std::int64_t>(i) * g;
        for (int j = 0; j < g; ++j) row[j] = b.data[static_cast<std::size_t>(j)];
    }
    gemm_nn(n, f, g, x.data.data(), w.data.data(), out.data.data());
    return out;
}

template <typename T>
void dense_backward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& grad_out,
                    TensorT<T>& grad_x, TensorT<T>& grad_w, TensorT<T>& grad_b) {
    const int n = x.dim(0), f = x.dim(1), g = w.dim(1);
    grad_x = TensorT<T>(x.shape);
    std::vector<T> wt = transpose(f, g, w.data.data());
    gemm_nn(n, g, f, grad_out.data.data(), wt.data(), grad_x.data.data());
    grad_w = TensorT<T>(w.shape);
    gemm_tn(f, n, g, x.data.data(), grad_out.data.data(), grad_w.data.data());
    grad_b = TensorT<T>({g});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < g; ++j) grad_b.data[static_cast<std::size_t>(j)] += grad_out.data[static_cast<std::size_t>(static_cast<std::int64_t>(i) * g + j)];
}

// ---------------------------------------------------------------------------
// Per-channel bias for NHWC tensors (conv stages without batch norm)

template <typename T>
TensorT<T> bias_channels(const TensorT<T>& x, const TensorT<T>& b) {
    if (x.rank() != 4 || b.rank() != 1 || b.dim(0) != x.dim(3))
        throw Error::numeric("bias_channels: input " + shape_str(x.shape) + " incompatible with bias " + shape_str(b.shape));
    TensorT<T> out(x.shape);
    const int c = x.dim(3);
    const std::int64_t spatial = x.numel() / c;
    for (std::int64_t i = 0; i < spatial; ++i) {
        const T* px = x.data.data() + i * c;
        T* po = out.data.data() + i * c;
        for (int j = 0; j < c; ++j) po[j] = px[j] + b.data[static_cast<std::size_t>(j)];
    }
    return out;
}

template <typename T>
TensorT<T> bias_channels_backward_bias(const TensorT<T>& grad_out, int channels) {
    TensorT<T> gb({channels});
    const std::int64_t spatial = grad_out.numel() / channels;
    for (std::int64_t i = 0; i < spatial; ++i) {
        const T* pg = grad_out.data.data() + i * channels;
        for (int j = 0; j < channels; ++j) gb.data[static_cast<std::size_t>(j)] += pg[j];
    }
    return gb;
}

// ---------------------------------------------------------------------------
// Max pooling (square window, stride = window). Ties resolve to the first
// element in scan order so gradients are deterministic.

template <typename T>
TensorT<T> max_pool2d(const TensorT<T>& x, int window, std::vector<std::int64_t>* argmax = nullptr) {
    if (x.rank() != 4) throw Error::numeric("max_pool2d: input must be NHWC, got shape " + shape_str(x.shape));
    if (window < 1) throw Error::numeric("max_pool2d: window must be positive, got " + std::to_string(window));
    const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
    if (h % window != 0 || w % window != 0)
        throw Error::numeric("max_pool2d: window " + std::to_string(window) + " does not tile input " + shape_str(x.shape));
    const int oh = h / window, ow = w / window;
    TensorT<T> out({n, oh, ow, c});
    if (argmax) argmax->assign(static_cast<std::size_t>(out.numel()), 0);
    std::int64_t oi = 0;
    for (int in = 0; in < n; ++in)
        for (int y = 0; y < oh; ++y)
            for (int xw = 0; xw < ow; ++xw)
                for (int ch = 0; ch < c; ++ch, ++oi) {
                    T best = -std::numeric_limits<T>::infinity();
                    std::int64_t best_idx = 0;
                    for (int dy = 0; dy < window; ++dy)
                        for (int dx = 0; dx < window; ++dx) {
                            const std::int64_t idx =
                                ((static_cast<std::int64_t>(in) * h + y * window + dy) * w + xw * window + dx) * c + ch;
                            const T v = x.data[static_cast<std::size_t>(idx)];
                            if (v > best) {
                                best = v;
                                best_idx = idx;
                            }
                        }
                    out.data[static_cast<std::size_t>(oi)] = best;
                    if (argmax) (*argmax)[static_cast<std::size_t>(oi)] = best_idx;
                }
    return out;
}

template <typename T>
TensorT<T> max_pool2d_backward(const std::vector<int>& input_shape, const std::vector<std::int64_t>& argmax,
                               const TensorT<T>& grad_out) {
    TensorT<T> gx(input_shape);
    for (std::int64_t i = 0; i < grad_out.numel(); ++i)
        gx.data[static_cast<std::size_t>(argmax[static_cast<std::size_t>(i)])] += grad_out.data[static_cast<std::size_t>(i)];
    return gx;
}

// ---------------------------------------------------------------------------
// Losses

// Mean negative log softmax likelihood. Returns the loss; probs (N x C) are
// written to `probs_out` for the backward rule.
template <typename T>
T softmax_cross_entropy(const TensorT<T>& logits, const std::vector<int>& labels, TensorT<T>* probs_out = nullptr) {
    if (logits.rank() != 2) throw Error::numeric("softmax_cross_entropy: logits must be NxC, got " + shape_str(logits.shape));
    const int n = logits.dim(0), c = logits.dim(1);
    if (static_cast<int>(labels.size()) != n)
        throw Error::numeric("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(n) + " rows");
    TensorT<T> probs({n, c});
    T loss = T(0);
    for (int i = 0; i < n; ++i) {
        if (labels[static_cast<std::size_t>(i)] < 0 || labels[static_cast<std::size_t>(i)] >= c)
            throw Error::data("softmax_cross_entropy: label " + std::to_string(labels[static_cast<std::size_t>(i)]) +
                              " out of range [0," + std::to_string(c) + ")");
        const T* row = logits.data.data() + static_cast<std::int64_t>(i) * c;
        T* prow = probs.data.data() + static_cast<std::int64_t>(i) * c;
        T mx = row[0];
        for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        T sum = T(0);
        for (int j = 0; j < c; ++j) {
            prow[j] = std::exp(row[j] - mx);
            sum += prow[j];
        }
        for (int j = 0; j < c; ++j) prow[j] /= sum;
        loss -= std::log(prow[labels[static_cast<std::size_t>(i)]]);
    }
    loss /= static_cast<T>(n);
    if (probs_out) *probs_out = std::move(probs);
    return loss;
}

// grad = (softmax - one_hot) / N, scaled by the incoming scalar gradient.
template <typename T>
TensorT<T> softmax_cross_entropy_backward(const TensorT<T>& probs, const std::vector<int>& labels, T grad_scale) {
    const int n = probs.dim(0), c = probs.dim(1);
    TensorT<T> g(probs.shape);
    for (int i = 0; i < n; ++i) {
        const T* prow = probs.data.data() + static_cast<std::int64_t>(i) * c;
        T* grow = g.data.data() + static_cast<std::int64_t>(i) * c;
        for (int j = 0; j < c; ++j) grow[j] = prow[j] * grad_scale / static_cast<T>(n);
        grow[labels[static_cast<std::size_t>(i)]] -= grad_scale / static_cast<T>(n);
    }
    return g;
}

inline constexpr double kBceClamp = 1e-7;

template <typename T>
T binary_cross_entropy(const TensorT<T>& predictions, const TensorT<T>& targets) {
    if (!predictions.same_shape(targets))
        throw Error::numeric("binary_cross_entropy: predictions " + shape_str(predictions.shape) +
                             " vs targets " + shape_str(targets.shape));
    const std::int64_t n = predictions.numel();
    T loss = T(0);
    for (std::int64_t i = 0; i < n; ++i) {
        const T p = std::clamp(predictions.data[static_cast<std::size_t>(i)], static_cast<T>(kBceClamp),
                               static_cast<T>(1.0 - kBceClamp));
        const T t = targets.data[static_cast<std::size_t>(i)];
        loss -= t * std::log(p) + (T(1) - t) * std::log(T(1) - p);
    }
    return loss / static_cast<T>(n);
}

template <typename T>
void binary_cross_entropy_backward(const TensorT<T>& predictions, const TensorT<T>& targets, T grad_scale,
                                   TensorT<T>& grad_pred, TensorT<T>& grad_targets) {
    const std::int64_t n = predictions.numel();
    grad_pred = TensorT<T>(predictions.shape);
    grad_targets = TensorT<T>(targets.shape);
    for (std::int64_t i = 0; i < n; ++i) {
        const T raw = predictions.data[static_cast<std::size_t>(i)];
        const T p = std::clamp(raw, static_cast<T>(kBceClamp), static_cast<T>(1.0 - kBceClamp));
        const T t = targets.data[static_cast<std::size_t>(i)];
        // Zero slope where the clamp is active.
        grad_pred.data[static_cast<std::size_t>(i)] =
            (raw == p) ? grad_scale * (-t / p + (T(1) - t) / (T(1) - p)) / static_cast<T>(n) : T(0);
        grad_targets.data[static_cast<std::size_t>(i)] = grad_scale * (std::log(T(1) - p) - std::log(p)) / static_cast<T>(n);
    }
}

// ---------------------------------------------------------------------------
// Elastic-net penalty: lambda1 * sum|w| + lambda2 * sum w^2 over all tensors.

template <typename T>
T elastic_net_penalty(const std::vector<const TensorT<T>*>& params, T lambda1, T lambda2) {
    if (lambda1 < T(0) || lambda2 < T(0))
        throw Error::numeric("elastic_net_penalty: lambdas must be non-negative, got lambda1=" +
                             std::to_string(static_cast<double>(lambda1)) + " lambda2=" +
                             std::to_string(static_cast<double>(lambda2)));
    T penalty = T(0);
    for (const auto* p : params)
        for (T v : p->data) penalty += lambda1 * std::abs(v) + lambda2 * v * v;
    return penalty;
}

// gradient = lambda1 * sign(w) + 2 * lambda2 * w, with sign(0) = 0.
template <typename T>
TensorT<T> elastic_net_gradient(const TensorT<T>& param, T lambda1, T lambda2, T grad_scale) {
    TensorT<T> g(param.shape);
    for (std::int64_t i = 0; i < param.numel(); ++i) {
        const T v = param.data[static_cast<std::size_t>(i)];
        const T s = v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0));
        g.data[static_cast<std::size_t>(i)] = grad_scale * (lambda1 * s + T(2) * lambda2 * v);
    }
    return g;
}

}  // namespace signet::ops
