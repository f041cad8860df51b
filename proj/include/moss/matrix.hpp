#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "moss/error.hpp"
#include "moss/rng.hpp"

namespace moss {

/// Dense row-major matrix. Rows are samples throughout the codebase, so a
/// batch of N observations of dimension d is an [N x d] matrix with each row
/// contiguous in memory.
template <class T>
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T(0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<T>> rows) {
        Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != m.cols_)
                throw Error(ErrorCode::InvalidArgument, "Matrix::from_rows: ragged rows");
            std::size_t j = 0;
            for (T v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    T operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& storage() { return data_; }
    const std::vector<T>& storage() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool all_finite() const {
        for (T v : data_)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    void fill(T value) { data_.assign(data_.size(), value); }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

template <class T>
using EigenMap =
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <class T>
using EigenConstMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

template <class T>
EigenConstMap<T> eigen_view(const Matrix<T>& m) {
    return EigenConstMap<T>(m.data(), static_cast<Eigen::Index>(m.rows()),
                            static_cast<Eigen::Index>(m.cols()));
}

template <class T>
EigenMap<T> eigen_view(Matrix<T>& m) {
    return EigenMap<T>(m.data(), static_cast<Eigen::Index>(m.rows()),
                       static_cast<Eigen::Index>(m.cols()));
}

/// c = a * b
template <class T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() != b.rows())
        throw Error(ErrorCode::Config, "matmul: inner dimensions disagree");
    Matrix<T> c(a.rows(), b.cols());
    eigen_view(c).noalias() = eigen_view(a) * eigen_view(b);
    return c;
}

/// c = a^T * b, with a of shape [k x m] and b of shape [k x n].
template <class T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows() != b.rows())
        throw Error(ErrorCode::Config, "matmul_tn: inner dimensions disagree");
    Matrix<T> c(a.cols(), b.cols());
    eigen_view(c).noalias() = eigen_view(a).transpose() * eigen_view(b);
    return c;
}

/// c = a * b^T, with a of shape [m x k] and b of shape [n x k].
template <class T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() != b.cols())
        throw Error(ErrorCode::Config, "matmul_nt: inner dimensions disagree");
    Matrix<T> c(a.rows(), b.rows());
    eigen_view(c).noalias() = eigen_view(a) * eigen_view(b).transpose();
    return c;
}

/// Horizontal concatenation of equally tall blocks.
template <class T>
Matrix<T> hcat(std::initializer_list<const Matrix<T>*> blocks) {
    std::size_t rows = 0, cols = 0;
    for (const Matrix<T>* b : blocks) {
        if (rows == 0) rows = b->rows();
        if (b->rows() != rows)
            throw Error(ErrorCode::InvalidArgument, "hcat: row counts disagree");
        cols += b->cols();
    }
    Matrix<T> out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        std::size_t offset = 0;
        for (const Matrix<T>* b : blocks) {
            auto src = b->row(i);
            std::copy(src.begin(), src.end(), out.row(i).begin() + offset);
            offset += b->cols();
        }
    }
    return out;
}

template <class T>
Matrix<T> hcat(const Matrix<T>& a, const Matrix<T>& b) {
    return hcat<T>({&a, &b});
}

template <class T>
Matrix<T> hcat(const Matrix<T>& a, const Matrix<T>& b, const Matrix<T>& c) {
    return hcat<T>({&a, &b, &c});
}

template <class T, class U>
Matrix<T> cast_matrix(const Matrix<U>& m) {
    Matrix<T> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.size(); ++i)
        out.data()[i] = static_cast<T>(m.data()[i]);
    return out;
}

template <class T>
void fill_uniform(Matrix<T>& m, Rng& rng, double lo, double hi) {
    for (std::size_t i = 0; i < m.size(); ++i)
        m.data()[i] = static_cast<T>(rng.uniform(lo, hi));
}

template <class T>
void fill_normal(Matrix<T>& m, Rng& rng, double mean = 0.0, double stddev = 1.0) {
    for (std::size_t i = 0; i < m.size(); ++i)
        m.data()[i] = static_cast<T>(rng.normal(mean, stddev));
}

}  // namespace moss
