#include "biomark/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace biomark {

Matrix Matrix::from_columns(const std::vector<std::vector<double>>& cols) {
    if (cols.empty()) return Matrix();
    Matrix m(cols[0].size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j].size() != m.rows_) throw std::invalid_argument("from_columns: ragged input");
        for (std::size_t i = 0; i < m.rows_; ++i) m(i, j) = cols[j][i];
    }
    return m;
}

std::vector<double> Matrix::column(std::size_t j) const {
    std::vector<double> v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

std::vector<double> Matrix::multiply(const std::vector<double>& v) const {
    std::vector<double> out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

std::vector<double> Matrix::multiply_t(const std::vector<double>& v) const {
    std::vector<double> out(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out[j] += (*this)(i, j) * v[i];
    return out;
}

QrDecomposition::QrDecomposition(Matrix a) : qr_(std::move(a)), rdiag_(qr_.cols()) {
    const std::size_t m = qr_.rows(), n = qr_.cols();
    if (m < n) throw std::invalid_argument("QrDecomposition: fewer rows than columns");

    double max_colnorm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double nrm = 0.0;
        for (std::size_t i = k; i < m; ++i) nrm = std::hypot(nrm, qr_(i, k));
        if (nrm != 0.0) {
            if (qr_(k, k) < 0.0) nrm = -nrm;
            for (std::size_t i = k; i < m; ++i) qr_(i, k) /= nrm;
            qr_(k, k) += 1.0;
            for (std::size_t j = k + 1; j < n; ++j) {
                double s = 0.0;
                for (std::size_t i = k; i < m; ++i) s += qr_(i, k) * qr_(i, j);
                s = -s / qr_(k, k);
                for (std::size_t i = k; i < m; ++i) qr_(i, j) += s * qr_(i, k);
            }
        }
        rdiag_[k] = -nrm;
        max_colnorm = std::max(max_colnorm, std::fabs(nrm));
    }
    rank_tol_ = max_colnorm * double(std::max(m, n)) * 1e-14;
}

bool QrDecomposition::full_rank() const {
    for (double d : rdiag_)
        if (std::fabs(d) <= rank_tol_) return false;
    return true;
}

std::vector<double> QrDecomposition::solve(const std::vector<double>& y) const {
    const std::size_t m = qr_.rows(), n = qr_.cols();
    if (y.size() != m) throw std::invalid_argument("QR solve: length mismatch");
    std::vector<double> b = y;

    // Apply Householder reflections: b <- Q' b.
    for (std::size_t k = 0; k < n; ++k) {
        if (qr_(k, k) == 0.0) continue;
        double s = 0.0;
        for (std::size_t i = k; i < m; ++i) s += qr_(i, k) * b[i];
        s = -s / qr_(k, k);
        for (std::size_t i = k; i < m; ++i) b[i] += s * qr_(i, k);
    }
    // Back-substitute R x = b.
    std::vector<double> x(n, 0.0);
    for (std::size_t kk = n; kk-- > 0;) {
        double s = b[kk];
        for (std::size_t j = kk + 1; j < n; ++j) s -= qr_(kk, j) * x[j];
        x[kk] = rdiag_[kk] != 0.0 ? s / rdiag_[kk] : 0.0;
    }
    return x;
}

}  // namespace biomark
