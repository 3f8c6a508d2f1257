#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "signet/error.hpp"

namespace signet {

inline std::string shape_str(const std::vector<int>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

// Dense row-major N-d array, the single value currency of the pipeline.
// T is float for training and double for gradient verification.
template <typename T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;

    TensorT() = default;

    explicit TensorT(std::vector<int> dims) : shape(std::move(dims)) {
        data.assign(static_cast<std::size_t>(checked_numel(shape)), T(0));
    }

    TensorT(std::vector<int> dims, std::vector<T> values) : shape(std::move(dims)), data(std::move(values)) {
        if (static_cast<std::int64_t>(data.size()) != checked_numel(shape))
            throw Error::data("tensor: " + std::to_string(data.size()) + " elements do not fill shape " + shape_str(shape));
    }

    static TensorT zeros(std::vector<int> dims) { return TensorT(std::move(dims)); }

    static TensorT full(std::vector<int> dims, T value) {
        TensorT t(std::move(dims));
        for (auto& v : t.data) v = value;
        return t;
    }

    static TensorT scalar(T value) { return TensorT({1}, {value}); }

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }

    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

    bool same_shape(const TensorT& other) const { return shape == other.shape; }

    bool is_scalar() const { return numel() == 1; }

    T scalar_value() const {
        if (!is_scalar()) throw Error::numeric("tensor: expected scalar, got shape " + shape_str(shape));
        return data[0];
    }

    // 4-d NHWC access.
    T& at(int n, int h, int w, int c) {
        return data[static_cast<std::size_t>(((static_cast<std::int64_t>(n) * shape[1] + h) * shape[2] + w) * shape[3] + c)];
    }
    T at(int n, int h, int w, int c) const {
        return data[static_cast<std::size_t>(((static_cast<std::int64_t>(n) * shape[1] + h) * shape[2] + w) * shape[3] + c)];
    }

    // 2-d access.
    T& at(int r, int c) { return data[static_cast<std::size_t>(static_cast<std::int64_t>(r) * shape[1] + c)]; }
    T at(int r, int c) const { return data[static_cast<std::size_t>(static_cast<std::int64_t>(r) * shape[1] + c)]; }

    // 3-d HWC access.
    T& at3(int h, int w, int c) {
        return data[static_cast<std::size_t>((static_cast<std::int64_t>(h) * shape[1] + w) * shape[2] + c)];
    }
    T at3(int h, int w, int c) const {
        return data[static_cast<std::size_t>((static_cast<std::int64_t>(h) * shape[1] + w) * shape[2] + c)];
    }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    TensorT reshaped(std::vector<int> dims) const {
        if (checked_numel(dims) != numel())
            throw Error::data("reshape: " + shape_str(shape) + " has " + std::to_string(numel()) +
                              " elements, target " + shape_str(dims) + " needs " + std::to_string(checked_numel(dims)));
        TensorT t;
        t.shape = std::move(dims);
        t.data = data;
        return t;
    }

    static std::int64_t checked_numel(const std::vector<int>& dims) {
        std::int64_t n = 1;
        for (int d : dims) {
            if (d <= 0) throw Error::data("tensor: non-positive dimension in shape " + shape_str(dims));
            n *= d;
        }
        return n;
    }
};

using Tensor = TensorT<float>;

template <typename T>
bool bit_equal(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.shape != b.shape) return false;
    for (std::int64_t i = 0; i < a.numel(); ++i)
        if (a.data[static_cast<std::size_t>(i)] != b.data[static_cast<std::size_t>(i)]) return false;
    return true;
}

}  // namespace signet
