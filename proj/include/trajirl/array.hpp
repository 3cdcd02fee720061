#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace trajirl {

/// Dense row-major array of doubles, rank 1 or 2. Scalars are length-1
/// vectors. All model arithmetic is 64-bit.
struct Array {
    std::vector<int> shape;
    std::vector<double> data;

    Array() = default;
    Array(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {}

    static Array zeros(std::vector<int> s) {
        size_t n = 1;
        for (int d : s) n *= static_cast<size_t>(d);
        return Array(std::move(s), std::vector<double>(n, 0.0));
    }
    static Array scalar(double v) { return Array({1}, {v}); }
    static Array vec(std::vector<double> v) {
        int n = static_cast<int>(v.size());
        return Array({n}, std::move(v));
    }
    static Array matrix(int rows, int cols, std::vector<double> d) {
        return Array({rows, cols}, std::move(d));
    }

    int numel() const { return static_cast<int>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int rows() const { return shape[0]; }
    int cols() const { return shape.size() > 1 ? shape[1] : 1; }
    bool is_scalar() const { return data.size() == 1; }

    double& operator[](size_t i) { return data[i]; }
    double operator[](size_t i) const { return data[i]; }

    double& at(int r, int c) { return data[static_cast<size_t>(r) * shape[1] + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * shape[1] + c]; }

    bool same_shape(const Array& o) const { return shape == o.shape; }

    std::string shape_str() const {
        std::string s = "(";
        for (size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape[i]);
        }
        return s + ")";
    }
};

}  // namespace trajirl
