#pragma once

// Small dense linear-algebra kernel. Everything here is sized for formations
// of a few dozen spacecraft at most, so storage is dense and row-major.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace coulomb {

using Vector = std::vector<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    // Row-wise nested initializer: Matrix{{1, 2}, {3, 4}}.
    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) {
                throw Error(ErrorCode::invalid_input, "ragged matrix initializer");
            }
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(std::span<const double> d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    // Outer product a·bᵀ.
    static Matrix outer(std::span<const double> a, std::span<const double> b) {
        Matrix m(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    Vector column(std::size_t j) const {
        Vector c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    std::span<const double> data() const noexcept { return data_; }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double trace() const {
        double s = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
        return s;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    Matrix& operator+=(const Matrix& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    Matrix& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw Error(ErrorCode::invalid_input, "matrix product shape mismatch");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend Vector operator*(const Matrix& a, std::span<const double> x) {
        if (a.cols_ != x.size()) throw Error(ErrorCode::invalid_input, "matrix-vector shape mismatch");
        Vector y(a.rows_, 0.0);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            double s = 0.0;
            const double* r = a.data_.data() + i * a.cols_;
            for (std::size_t j = 0; j < a.cols_; ++j) s += r[j] * x[j];
            y[i] = s;
        }
        return y;
    }
    friend Vector operator*(const Matrix& a, const Vector& x) { return a * std::span<const double>(x); }

    // Aᵀx without forming the transpose.
    Vector transpose_times(std::span<const double> x) const {
        if (rows_ != x.size()) throw Error(ErrorCode::invalid_input, "transpose product shape mismatch");
        Vector y(cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            const double xi = x[i];
            if (xi == 0.0) continue;
            const double* r = data_.data() + i * cols_;
            for (std::size_t j = 0; j < cols_; ++j) y[j] += r[j] * xi;
        }
        return y;
    }

    bool operator==(const Matrix&) const = default;

private:
    void check_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw Error(ErrorCode::invalid_input, "matrix shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

// ---- vector helpers -------------------------------------------------------

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vector operator+(Vector a, const Vector& b) {
    assert(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Vector operator-(Vector a, const Vector& b) {
    assert(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline Vector operator*(double s, Vector a) {
    for (double& v : a) v *= s;
    return a;
}

inline double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

// ---- structural operations ------------------------------------------------

// Column-major stacking, leftmost column first.
inline Vector vec(const Matrix& m) {
    Vector v;
    v.reserve(m.rows() * m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) v.push_back(m(i, j));
    return v;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t r = 0; r < b.rows(); ++r)
                for (std::size_t s = 0; s < b.cols(); ++s)
                    k(i * b.rows() + r, j * b.cols() + s) = aij * b(r, s);
        }
    return k;
}

// Kronecker product of two column vectors.
inline Vector kron(std::span<const double> a, std::span<const double> b) {
    Vector k;
    k.reserve(a.size() * b.size());
    for (double ai : a)
        for (double bj : b) k.push_back(ai * bj);
    return k;
}

// He(A) = ½(A + Aᵀ)
inline Matrix symmetric_part(const Matrix& a) {
    if (a.rows() != a.cols()) throw Error(ErrorCode::invalid_input, "symmetric part of a non-square matrix");
    Matrix h(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) h(i, j) = 0.5 * (a(i, j) + a(j, i));
    return h;
}

// Square matrix that is symmetric by construction. Inputs are symmetrized on
// entry, so callers may pass matrices carrying small rounding asymmetry.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t n) : m_(n, n) {}
    explicit SymMatrix(const Matrix& m) : m_(symmetric_part(m)) {}

    std::size_t size() const noexcept { return m_.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

    void set(std::size_t i, std::size_t j, double v) {
        m_(i, j) = v;
        m_(j, i) = v;
    }

    const Matrix& matrix() const noexcept { return m_; }
    double trace() const { return m_.trace(); }

private:
    Matrix m_;
};

struct EigenPair {
    double value = 0.0;
    Vector vector;
};

struct JacobiSettings {
    int max_sweeps = 100;
    double off_tolerance = 1e-12;  // relative to ‖M‖_F
};

// Cyclic Jacobi eigendecomposition. Returns pairs sorted ascending by value.
inline std::vector<EigenPair> sym_eig(const SymMatrix& sym, JacobiSettings settings = {}) {
    const std::size_t n = sym.size();
    Matrix a = sym.matrix();
    Matrix v = Matrix::identity(n);

    const double scale = a.frobenius_norm();
    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
        return std::sqrt(s);
    };

    bool converged = scale == 0.0 || off_norm() <= settings.off_tolerance * scale;
    for (int sweep = 0; sweep < settings.max_sweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a(r, p);
                    const double arq = a(r, q);
                    a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
                    a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
        converged = off_norm() <= settings.off_tolerance * scale;
    }
    if (!converged) {
        throw Error(ErrorCode::numerical_failure,
                    "Jacobi eigensolver did not converge in " + std::to_string(settings.max_sweeps) + " sweeps");
    }

    std::vector<EigenPair> pairs(n);
    for (std::size_t k = 0; k < n; ++k) pairs[k] = {a(k, k), v.column(k)};
    std::sort(pairs.begin(), pairs.end(), [](const EigenPair& x, const EigenPair& y) { return x.value < y.value; });
    return pairs;
}

// ---- Cholesky ---------------------------------------------------------------

// Dense Cholesky factor L (lower) of an SPD matrix, with triangular solves.
class Cholesky {
public:
    explicit Cholesky(const Matrix& spd) : l_(spd.rows(), spd.cols()) {
        const std::size_t n = spd.rows();
        if (spd.cols() != n) throw Error(ErrorCode::invalid_input, "Cholesky of a non-square matrix");
        const double scale = std::max(spd.max_abs(), 1e-300);
        for (std::size_t j = 0; j < n; ++j) {
            double d = spd(j, j);
            for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
            if (!(d > 1e-13 * scale)) throw Error(ErrorCode::singular_system, "matrix is not positive definite");
            const double ljj = std::sqrt(d);
            l_(j, j) = ljj;
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = spd(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
                l_(i, j) = s / ljj;
            }
        }
    }

    void solve_in_place(std::span<double> b) const {
        const std::size_t n = l_.rows();
        assert(b.size() == n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[i];
            for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * b[k];
            b[i] = s / l_(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = b[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= l_(k, ii) * b[k];
            b[ii] = s / l_(ii, ii);
        }
    }

    Vector solve(Vector b) const {
        solve_in_place(b);
        return b;
    }

    Matrix inverse() const {
        const std::size_t n = l_.rows();
        Matrix inv(n, n);
        for (std::size_t j = 0; j < n; ++j) {
            Vector e(n, 0.0);
            e[j] = 1.0;
            solve_in_place(e);
            for (std::size_t i = 0; i < n; ++i) inv(i, j) = e[i];
        }
        return inv;
    }

    const Matrix& factor() const noexcept { return l_; }

private:
    Matrix l_;
};

// ---- relative-force difference map -----------------------------------------

// B = D ⊗ I_d, with D the (N−1)×N first-difference matrix (rows …,−1,1,…).
inline Matrix difference_matrix(std::size_t count, std::size_t dim) {
    if (count < 2) throw Error(ErrorCode::invalid_formation, "difference map needs at least two spacecraft");
    if (dim < 1) throw Error(ErrorCode::invalid_formation, "spatial dimension must be positive");
    Matrix d(count - 1, count);
    for (std::size_t i = 0; i + 1 < count; ++i) {
        d(i, i) = -1.0;
        d(i, i + 1) = 1.0;
    }
    return kron(d, Matrix::identity(dim));
}

// B† = Bᵀ(BBᵀ)⁻¹ for a matrix with linearly independent rows.
inline Matrix right_pseudoinverse(const Matrix& b) {
    const Matrix bt = b.transpose();
    try {
        const Cholesky chol(b * bt);
        return bt * chol.inverse();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::singular_system)
            throw Error(ErrorCode::singular_system, "rows are linearly dependent; no right inverse");
        throw;
    }
}

// Right pseudoinverse of difference_matrix(count, dim). DDᵀ is the tridiagonal
// second-difference matrix tridiag(−1, 2, −1), factored in O(N) and expanded
// with B† = (Dᵀ(DDᵀ)⁻¹) ⊗ I_d.
inline Matrix difference_pseudoinverse(std::size_t count, std::size_t dim) {
    if (count < 2) throw Error(ErrorCode::invalid_formation, "difference map needs at least two spacecraft");
    if (dim < 1) throw Error(ErrorCode::invalid_formation, "spatial dimension must be positive");
    const std::size_t m = count - 1;

    // Bidiagonal Cholesky of tridiag(−1, 2, −1): diag l_k, subdiag s_k.
    Vector diag(m), sub(m, 0.0);
    diag[0] = std::sqrt(2.0);
    for (std::size_t k = 1; k < m; ++k) {
        sub[k] = -1.0 / diag[k - 1];
        diag[k] = std::sqrt(2.0 - sub[k] * sub[k]);
    }
    auto solve = [&](Vector b) {
        for (std::size_t k = 0; k < m; ++k) b[k] = (b[k] - (k > 0 ? sub[k] * b[k - 1] : 0.0)) / diag[k];
        for (std::size_t k = m; k-- > 0;) b[k] = (b[k] - (k + 1 < m ? sub[k + 1] * b[k + 1] : 0.0)) / diag[k];
        return b;
    };

    // Columns of Dᵀ(DDᵀ)⁻¹: for unit e_j, y = (DDᵀ)⁻¹e_j, then Dᵀy.
    Matrix dpinv(count, m);
    for (std::size_t j = 0; j < m; ++j) {
        Vector e(m, 0.0);
        e[j] = 1.0;
        const Vector y = solve(std::move(e));
        for (std::size_t i = 0; i < count; ++i) {
            const double left = i < m ? -y[i] : 0.0;
            const double right = i > 0 ? y[i - 1] : 0.0;
            dpinv(i, j) = left + right;
        }
    }
    return kron(dpinv, Matrix::identity(dim));
}

}  // namespace coulomb
