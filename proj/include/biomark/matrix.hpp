#pragma once

#include <cstddef>
#include <vector>

namespace biomark {

// Minimal dense row-major matrix of doubles.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_columns(const std::vector<std::vector<double>>& cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<double> column(std::size_t j) const;

    std::vector<double> multiply(const std::vector<double>& v) const;   // A v
    std::vector<double> multiply_t(const std::vector<double>& v) const; // A' v

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// Householder QR of an m-by-n matrix, m >= n.  Solves least squares in place;
// rank deficiency is reported through full_rank().
class QrDecomposition {
  public:
    explicit QrDecomposition(Matrix a);

    bool full_rank() const;

    // Least-squares solution of min ||Ax - y||; valid only when full_rank().
    std::vector<double> solve(const std::vector<double>& y) const;

  private:
    Matrix qr_;
    std::vector<double> rdiag_;
    double rank_tol_ = 0.0;
};

}  // namespace biomark
