#pragma once

// Dense kernels and an updatable thin QR factorization.
//
// The factorization keeps the active column matrix A (ambient_dim x k) together
// with Q (ambient_dim x k, orthonormal columns) and R (k x k, upper triangular)
// such that A = Q R. Column append, column removal and rank-one updates each
// cost O(ambient_dim * k + k^2).

#include <cstddef>
#include <span>
#include <vector>

namespace feas {

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(std::span<double> x, double alpha);
/// Normalized copy; throws NonFinite for a zero or non-finite vector.
Vector normalized(std::span<const double> x);
bool all_finite(std::span<const double> x);

/// Dense column-major matrix of finite doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    static Matrix from_columns(std::span<const Vector> columns);
    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

    std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

    void append_col(std::span<const double> c);
    void remove_col(std::size_t j);

    /// y = M x
    Vector apply(std::span<const double> x) const;
    /// y = M^T x
    Vector apply_transpose(std::span<const double> x) const;

    std::span<const double> data() const noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);
double max_abs_diff(const Matrix& a, const Matrix& b);

struct LeastSquares {
    Vector coefficients;
    Vector residual;
};

/// Thin QR factorization of a full-column-rank matrix with O(d^2) updates.
///
/// Rank is judged against tau_rank = 1e-8 * (largest column norm). Updates keep
/// a counter and the factorization is recomputed from the stored columns every
/// kRefreshInterval updates.
class OrthoFactorization {
public:
    static constexpr double kRankFactor = 1e-8;
    static constexpr std::size_t kRefreshInterval = 1000;

    explicit OrthoFactorization(std::size_t ambient_dim);

    /// Householder QR from scratch. Throws RankDeficient(j) on the first
    /// dependent column.
    static OrthoFactorization factorize(const Matrix& m);

    std::size_t ambient_dim() const noexcept { return ambient_; }
    std::size_t size() const noexcept { return cols_.cols(); }
    bool empty() const noexcept { return size() == 0; }

    const Matrix& columns() const noexcept { return cols_; }
    const Matrix& q() const noexcept { return q_; }
    const Matrix& r() const noexcept { return r_; }
    std::size_t updates_since_refresh() const noexcept { return updates_; }

    /// Throws RankDeficient(size()) when a lies in the current span; the
    /// factorization is left unchanged in that case.
    void append_column(std::span<const double> a);
    void remove_column(std::size_t idx);
    /// Replaces A by scale * (A + w v^T); w has ambient_dim entries and v has
    /// size() entries.
    void rank_one_update(std::span<const double> w, std::span<const double> v, double scale);

    LeastSquares least_squares(std::span<const double> b) const;

    /// Solves R x = b (back substitution).
    Vector solve_r(std::span<const double> b) const;
    /// Solves R^T x = b (forward substitution).
    Vector solve_rt(std::span<const double> b) const;

    /// max |(QR - A)_ij| / max(1, largest column norm)
    double reconstruction_error() const;
    /// max |Q^T Q - I|
    double orthogonality_error() const;

    double rank_threshold() const;

    void refresh();

private:
    void bump();

    std::size_t ambient_;
    Matrix cols_;
    Matrix q_;
    Matrix r_;
    std::size_t updates_ = 0;
};

OrthoFactorization factorize(const Matrix& m);
OrthoFactorization append_column(OrthoFactorization f, std::span<const double> a);
OrthoFactorization remove_column(OrthoFactorization f, std::size_t idx);
OrthoFactorization rank_one_update(OrthoFactorization f, std::span<const double> w,
                                   std::span<const double> v, double scale);
LeastSquares least_squares(const OrthoFactorization& f, std::span<const double> b);

} // namespace feas
