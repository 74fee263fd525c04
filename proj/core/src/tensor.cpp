#include "lupi/tensor.hpp"

#include <cmath>
#include <string>

#include "lupi/errors.hpp"

namespace lupi {

Tensor2D Tensor2D::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Tensor2D t(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t r = 0;
    for (const auto& row : rows) {
        if (row.size() != t.cols_)
            throw ShapeError("from_rows: ragged row lengths");
        std::size_t c = 0;
        for (double v : row) t(r, c++) = v;
        ++r;
    }
    return t;
}

Tensor2D Tensor2D::column(const Vector& values) {
    Tensor2D t(values.size(), 1);
    for (std::size_t i = 0; i < values.size(); ++i) t(i, 0) = values[i];
    return t;
}

bool Tensor2D::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor2D Tensor2D::gather_rows(std::span<const std::size_t> indices) const {
    Tensor2D out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows_)
            throw ShapeError("gather_rows: row index " + std::to_string(indices[i]) +
                             " out of range for " + std::to_string(rows_) + " rows");
        const double* src = data_.data() + indices[i] * cols_;
        double* dst = out.data_.data() + i * cols_;
        for (std::size_t c = 0; c < cols_; ++c) dst[c] = src[c];
    }
    return out;
}

namespace {

void check_inner(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw ShapeError(std::string(what) + ": inner dimensions disagree (" +
                         std::to_string(a) + " vs " + std::to_string(b) + ")");
}

} // namespace

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b) {
    check_inner(a.cols(), b.rows(), "matmul");
    Tensor2D c(a.rows(), b.cols());
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c.data().data() + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = a(i, l);
            if (ail == 0.0) continue;
            const double* bl = b.data().data() + l * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
        }
    }
    return c;
}

Tensor2D matmul_transpose_a(const Tensor2D& a, const Tensor2D& b) {
    check_inner(a.rows(), b.rows(), "matmul_transpose_a");
    Tensor2D c(a.cols(), b.cols());
    const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
    for (std::size_t l = 0; l < k; ++l) {
        const double* al = a.data().data() + l * m;
        const double* bl = b.data().data() + l * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double ali = al[i];
            if (ali == 0.0) continue;
            double* ci = c.data().data() + i * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += ali * bl[j];
        }
    }
    return c;
}

Tensor2D matmul_transpose_b(const Tensor2D& a, const Tensor2D& b) {
    check_inner(a.cols(), b.cols(), "matmul_transpose_b");
    Tensor2D c(a.rows(), b.rows());
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a.data().data() + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b.data().data() + j * k;
            double acc = 0.0;
            for (std::size_t l = 0; l < k; ++l) acc += ai[l] * bj[l];
            c(i, j) = acc;
        }
    }
    return c;
}

} // namespace lupi
