#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "sqlgrader/errors.hpp"
#include "sqlgrader/rng.hpp"

namespace sqlgrader {

// Dense row-major array of 64-bit floats. Shapes are checked at every op
// boundary; a mismatch throws ShapeError naming both shapes.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims);
    Tensor(std::vector<std::size_t> dims, std::vector<double> values);

    static Tensor zeros(std::vector<std::size_t> dims) { return Tensor(std::move(dims)); }
    static Tensor full(std::vector<std::size_t> dims, double value);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }

    double& operator()(std::size_t i) { return data[i]; }
    double operator()(std::size_t i) const { return data[i]; }
    double& operator()(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }
    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data[(i * shape[1] + j) * shape[2] + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data[(i * shape[1] + j) * shape[2] + k];
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    void fill(double value);
};

std::string shape_str(const std::vector<std::size_t>& shape);

// c[i,j] = sum_t a[i,t] * b[t,j]
Tensor matmul(const Tensor& a, const Tensor& b);

// Like matmul but with a transposed on the fly: c = a^T * b, a is [k,m].
Tensor matmul_tn(const Tensor& a, const Tensor& b);

// c = a * b^T, b is [n,k].
Tensor matmul_nt(const Tensor& a, const Tensor& b);

// Row-wise softmax with max subtraction.
Tensor softmax_rows(const Tensor& x);

// out[j] = mean_i x[i,j]
Tensor mean_axis0(const Tensor& x);

// Uniform Glorot initialization: U[-L, L], L = sqrt(6 / (fan_in + fan_out)).
// fan_in = product of all dims but the last, fan_out = last dim.
Tensor glorot_init(const std::vector<std::size_t>& dims, SeededRng& rng);

}  // namespace sqlgrader
