#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lupi {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. The numeric substrate for datasets,
/// model parameters and loss gradients.
class Tensor2D {
public:
    Tensor2D() = default;

    Tensor2D(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Tensor2D from_rows(std::initializer_list<std::initializer_list<double>> rows);

    /// Wraps a single row vector as an n x 1 column tensor.
    static Tensor2D column(const Vector& values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    Vector& data() { return data_; }
    const Vector& data() const { return data_; }

    bool all_finite() const;

    /// New tensor holding the listed rows, in the given order.
    Tensor2D gather_rows(std::span<const std::size_t> indices) const;

    bool operator==(const Tensor2D& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

/// a (m x k) * b (k x n) -> (m x n)
Tensor2D matmul(const Tensor2D& a, const Tensor2D& b);

/// a^T (k x m) * b (k x n) -> (m x n)
Tensor2D matmul_transpose_a(const Tensor2D& a, const Tensor2D& b);

/// a (m x k) * b^T (n x k) -> (m x n)
Tensor2D matmul_transpose_b(const Tensor2D& a, const Tensor2D& b);

} // namespace lupi
