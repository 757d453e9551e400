#include "sqlgrader/tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace sqlgrader {

namespace {

std::size_t checked_product(const std::vector<std::size_t>& dims) {
    if (dims.empty()) throw ShapeError("tensor shape must have at least one dimension");
    std::size_t n = 1;
    for (std::size_t d : dims) {
        if (d == 0) throw ShapeError("zero-sized dimension in shape " + shape_str(dims));
        n *= d;
    }
    return n;
}

using MatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MutMatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void require_matrix(const Tensor& t, const char* name) {
    if (t.rank() != 2)
        throw ShapeError(std::string(name) + " must be a matrix, got shape " + shape_str(t.shape));
}

}  // namespace

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream out;
    out << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << ",";
        out << shape[i];
    }
    out << "]";
    return out.str();
}

Tensor::Tensor(std::vector<std::size_t> dims) : shape(std::move(dims)) {
    data.assign(checked_product(shape), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> values)
    : shape(std::move(dims)), data(std::move(values)) {
    if (data.size() != checked_product(shape))
        throw ShapeError("data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
}

Tensor Tensor::full(std::vector<std::size_t> dims, double value) {
    Tensor t(std::move(dims));
    t.fill(value);
    return t;
}

void Tensor::fill(double value) { std::fill(data.begin(), data.end(), value); }

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul lhs");
    require_matrix(b, "matmul rhs");
    if (a.shape[1] != b.shape[0])
        throw ShapeError("matmul dimension mismatch: " + shape_str(a.shape) + " x " +
                         shape_str(b.shape));
    Tensor c({a.shape[0], b.shape[1]});
    MutMatMap(c.data.data(), (Eigen::Index)c.shape[0], (Eigen::Index)c.shape[1]) =
        MatMap(a.data.data(), (Eigen::Index)a.shape[0], (Eigen::Index)a.shape[1]) *
        MatMap(b.data.data(), (Eigen::Index)b.shape[0], (Eigen::Index)b.shape[1]);
    return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul_tn lhs");
    require_matrix(b, "matmul_tn rhs");
    if (a.shape[0] != b.shape[0])
        throw ShapeError("matmul_tn dimension mismatch: " + shape_str(a.shape) + "^T x " +
                         shape_str(b.shape));
    Tensor c({a.shape[1], b.shape[1]});
    MutMatMap(c.data.data(), (Eigen::Index)c.shape[0], (Eigen::Index)c.shape[1]) =
        MatMap(a.data.data(), (Eigen::Index)a.shape[0], (Eigen::Index)a.shape[1]).transpose() *
        MatMap(b.data.data(), (Eigen::Index)b.shape[0], (Eigen::Index)b.shape[1]);
    return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul_nt lhs");
    require_matrix(b, "matmul_nt rhs");
    if (a.shape[1] != b.shape[1])
        throw ShapeError("matmul_nt dimension mismatch: " + shape_str(a.shape) + " x " +
                         shape_str(b.shape) + "^T");
    Tensor c({a.shape[0], b.shape[0]});
    MutMatMap(c.data.data(), (Eigen::Index)c.shape[0], (Eigen::Index)c.shape[1]) =
        MatMap(a.data.data(), (Eigen::Index)a.shape[0], (Eigen::Index)a.shape[1]) *
        MatMap(b.data.data(), (Eigen::Index)b.shape[0], (Eigen::Index)b.shape[1]).transpose();
    return c;
}

Tensor softmax_rows(const Tensor& x) {
    require_matrix(x, "softmax_rows input");
    const std::size_t m = x.shape[0], n = x.shape[1];
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = &x.data[i * n];
        double mx = row[0];
        for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        double* orow = &out.data[i * n];
        for (std::size_t j = 0; j < n; ++j) {
            orow[j] = std::exp(row[j] - mx);
            sum += orow[j];
        }
        for (std::size_t j = 0; j < n; ++j) orow[j] /= sum;
    }
    return out;
}

Tensor mean_axis0(const Tensor& x) {
    require_matrix(x, "mean_axis0 input");
    const std::size_t m = x.shape[0], n = x.shape[1];
    Tensor out({n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.data[j] += x.data[i * n + j];
    for (std::size_t j = 0; j < n; ++j) out.data[j] /= static_cast<double>(m);
    return out;
}

Tensor glorot_init(const std::vector<std::size_t>& dims, SeededRng& rng) {
    Tensor t(dims);
    std::size_t fan_out = dims.back();
    std::size_t fan_in = t.size() / fan_out;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : t.data) v = rng.uniform(-limit, limit);
    return t;
}

}  // namespace sqlgrader
