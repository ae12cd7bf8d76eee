#include "feas/numkit.hpp"

#include <algorithm>
#include <cmath>

#include "feas/errors.hpp"

namespace feas {

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) {
    double scale_ = 0.0;
    for (double v : a) scale_ = std::max(scale_, std::abs(v));
    if (scale_ == 0.0) return 0.0;
    double s = 0.0;
    for (double v : a) {
        const double t = v / scale_;
        s += t * t;
    }
    return scale_ * std::sqrt(s);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw DimensionMismatch("axpy: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(std::span<double> x, double alpha) {
    for (double& v : x) v *= alpha;
}

Vector normalized(std::span<const double> x) {
    const double n = norm(x);
    if (!(n > 0.0) || !std::isfinite(n)) throw NonFinite("cannot normalize a zero or non-finite vector");
    Vector out(x.begin(), x.end());
    scale(out, 1.0 / n);
    return out;
}

bool all_finite(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::from_columns(std::span<const Vector> columns) {
    if (columns.empty()) return Matrix();
    Matrix m(columns.front().size(), 0);
    for (const auto& c : columns) m.append_col(c);
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void Matrix::append_col(std::span<const double> c) {
    if (cols_ == 0 && rows_ == 0) rows_ = c.size();
    if (c.size() != rows_) throw DimensionMismatch("append_col: wrong column length");
    if (!all_finite(c)) throw NonFinite("append_col: non-finite entry");
    data_.insert(data_.end(), c.begin(), c.end());
    ++cols_;
}

void Matrix::remove_col(std::size_t j) {
    if (j >= cols_) throw IndexOutOfRange("remove_col: column " + std::to_string(j));
    auto first = data_.begin() + static_cast<std::ptrdiff_t>(j * rows_);
    data_.erase(first, first + static_cast<std::ptrdiff_t>(rows_));
    --cols_;
}

Vector Matrix::apply(std::span<const double> x) const {
    if (x.size() != cols_) throw DimensionMismatch("apply: wrong vector length");
    Vector y(rows_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) axpy(x[j], col(j), y);
    return y;
}

Vector Matrix::apply_transpose(std::span<const double> x) const {
    if (x.size() != rows_) throw DimensionMismatch("apply_transpose: wrong vector length");
    Vector y(cols_);
    for (std::size_t j = 0; j < cols_; ++j) y[j] = dot(col(j), x);
    return y;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("multiply: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j)
        for (std::size_t k = 0; k < a.cols(); ++k) axpy(b(k, j), a.col(k), c.col(j));
    return c;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("max_abs_diff: shapes differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

// ---------------------------------------------------------------------------
// Givens rotations acting on rows (i, k) of R and columns (i, k) of Q.

namespace {

struct Givens {
    double c = 1.0;
    double s = 0.0;
};

// Rotation that maps (a, b) to (r, 0).
Givens make_givens(double a, double b) {
    if (b == 0.0) return {};
    const double r = std::hypot(a, b);
    return {a / r, b / r};
}

void rotate_rows(Matrix& m, std::size_t i, std::size_t k, Givens g, std::size_t first_col = 0) {
    for (std::size_t j = first_col; j < m.cols(); ++j) {
        const double x = m(i, j);
        const double y = m(k, j);
        m(i, j) = g.c * x + g.s * y;
        m(k, j) = -g.s * x + g.c * y;
    }
}

void rotate_cols(Matrix& m, std::size_t i, std::size_t k, Givens g) {
    auto ci = m.col(i);
    auto ck = m.col(k);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double x = ci[r];
        const double y = ck[r];
        ci[r] = g.c * x + g.s * y;
        ck[r] = -g.s * x + g.c * y;
    }
}

double max_column_norm(const Matrix& m) {
    double best = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) best = std::max(best, norm(m.col(j)));
    return best;
}

// Two passes of classical Gram-Schmidt: returns coefficients, leaves the
// orthogonal remainder in r.
Vector project_out(const Matrix& q, Vector& r) {
    Vector z(q.cols(), 0.0);
    for (int pass = 0; pass < 2; ++pass) {
        const Vector dz = q.apply_transpose(r);
        for (std::size_t j = 0; j < q.cols(); ++j) {
            axpy(-dz[j], q.col(j), r);
            z[j] += dz[j];
        }
    }
    return z;
}

} // namespace

// ---------------------------------------------------------------------------
// OrthoFactorization

OrthoFactorization::OrthoFactorization(std::size_t ambient_dim)
    : ambient_(ambient_dim), cols_(ambient_dim, 0), q_(ambient_dim, 0), r_(0, 0) {
    if (ambient_dim == 0) throw DimensionMismatch("OrthoFactorization: ambient dimension must be positive");
}

double OrthoFactorization::rank_threshold() const { return kRankFactor * max_column_norm(cols_); }

OrthoFactorization OrthoFactorization::factorize(const Matrix& m) {
    const std::size_t d = m.rows();
    const std::size_t k = m.cols();
    OrthoFactorization f(d);
    if (k == 0) return f;
    if (!all_finite(m.data())) throw NonFinite("factorize: non-finite entry");

    const double tau = kRankFactor * max_column_norm(m);
    Matrix work = m;
    Matrix r(k, k);
    std::vector<Vector> reflectors;
    reflectors.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        if (j >= d) throw RankDeficient(j);
        auto cj = work.col(j);
        const double xnorm = norm(cj.subspan(j));
        if (xnorm <= tau) throw RankDeficient(j);
        const double alpha = cj[j] > 0 ? -xnorm : xnorm;
        Vector v(d - j);
        for (std::size_t i = j; i < d; ++i) v[i - j] = cj[i];
        v[0] -= alpha;
        const double vn = norm(v);
        scale(v, 1.0 / vn);
        for (std::size_t c = j; c < k; ++c) {
            auto col = work.col(c);
            double s = 0.0;
            for (std::size_t i = j; i < d; ++i) s += v[i - j] * col[i];
            for (std::size_t i = j; i < d; ++i) col[i] -= 2.0 * s * v[i - j];
        }
        for (std::size_t c = j; c < k; ++c) r(j, c) = work(j, c);
        r(j, j) = alpha;
        reflectors.push_back(std::move(v));
    }

    Matrix q(d, k);
    for (std::size_t c = 0; c < k; ++c) q(c, c) = 1.0;
    for (std::size_t jj = k; jj-- > 0;) {
        const Vector& v = reflectors[jj];
        for (std::size_t c = 0; c < k; ++c) {
            auto col = q.col(c);
            double s = 0.0;
            for (std::size_t i = jj; i < d; ++i) s += v[i - jj] * col[i];
            for (std::size_t i = jj; i < d; ++i) col[i] -= 2.0 * s * v[i - jj];
        }
    }

    f.cols_ = m;
    f.q_ = std::move(q);
    f.r_ = std::move(r);
    return f;
}

void OrthoFactorization::append_column(std::span<const double> a) {
    if (a.size() != ambient_) throw DimensionMismatch("append_column: wrong column length");
    if (!all_finite(a)) throw NonFinite("append_column: non-finite entry");
    const std::size_t k = size();
    if (k >= ambient_) throw RankDeficient(k);

    Vector rem(a.begin(), a.end());
    Vector z = project_out(q_, rem);
    const double rho = norm(rem);
    const double tau = kRankFactor * std::max(max_column_norm(cols_), norm(a));
    if (rho <= tau) throw RankDeficient(k);

    scale(rem, 1.0 / rho);
    Matrix r(k + 1, k + 1);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i <= j; ++i) r(i, j) = r_(i, j);
    for (std::size_t i = 0; i < k; ++i) r(i, k) = z[i];
    r(k, k) = rho;

    cols_.append_col(a);
    q_.append_col(rem);
    r_ = std::move(r);
    bump();
}

void OrthoFactorization::remove_column(std::size_t idx) {
    const std::size_t k = size();
    if (idx >= k) throw IndexOutOfRange("remove_column: index " + std::to_string(idx) + " of " + std::to_string(k));

    // Dropping column idx of R leaves an upper Hessenberg tail.
    Matrix h(k, k - 1);
    for (std::size_t j = 0, jj = 0; j < k; ++j) {
        if (j == idx) continue;
        for (std::size_t i = 0; i < k; ++i) h(i, jj) = r_(i, j);
        ++jj;
    }
    for (std::size_t j = idx; j + 1 < k; ++j) {
        const Givens g = make_givens(h(j, j), h(j + 1, j));
        rotate_rows(h, j, j + 1, g, j);
        h(j + 1, j) = 0.0;
        rotate_cols(q_, j, j + 1, g);
    }

    Matrix r(k - 1, k - 1);
    for (std::size_t j = 0; j + 1 < k; ++j)
        for (std::size_t i = 0; i <= j; ++i) r(i, j) = h(i, j);
    q_.remove_col(k - 1);
    cols_.remove_col(idx);
    r_ = std::move(r);
    bump();
}

void OrthoFactorization::rank_one_update(std::span<const double> w, std::span<const double> v, double scale_by) {
    const std::size_t k = size();
    if (w.size() != ambient_) throw DimensionMismatch("rank_one_update: w has wrong length");
    if (v.size() != k) throw DimensionMismatch("rank_one_update: v must have one entry per column");
    if (!all_finite(w) || !all_finite(v) || !std::isfinite(scale_by))
        throw NonFinite("rank_one_update: non-finite input");
    if (k == 0) return;

    // A + w v^T = [Q q] ([R; 0] + [z; rho] v^T)
    Vector rem(w.begin(), w.end());
    Vector z = project_out(q_, rem);
    double rho = norm(rem);
    if (rho <= 1e-14 * std::max(1.0, norm(w))) {
        rho = 0.0;
        std::fill(rem.begin(), rem.end(), 0.0);
    } else {
        scale(rem, 1.0 / rho);
    }

    Matrix qe = q_;
    qe.append_col(rem);
    Matrix re(k + 1, k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i <= j; ++i) re(i, j) = r_(i, j);
    Vector ze(z);
    ze.push_back(rho);

    // Rotate ze onto e_1, bottom up; R picks up a subdiagonal.
    for (std::size_t i = k; i > 0; --i) {
        const Givens g = make_givens(ze[i - 1], ze[i]);
        const double x = ze[i - 1];
        const double y = ze[i];
        ze[i - 1] = g.c * x + g.s * y;
        ze[i] = 0.0;
        rotate_rows(re, i - 1, i, g);
        rotate_cols(qe, i - 1, i, g);
    }
    for (std::size_t j = 0; j < k; ++j) re(0, j) += ze[0] * v[j];

    // Re-triangularize the upper Hessenberg result.
    for (std::size_t j = 0; j < k; ++j) {
        const Givens g = make_givens(re(j, j), re(j + 1, j));
        rotate_rows(re, j, j + 1, g, j);
        re(j + 1, j) = 0.0;
        rotate_cols(qe, j, j + 1, g);
    }

    Matrix cols = cols_;
    for (std::size_t j = 0; j < k; ++j) {
        auto c = cols.col(j);
        axpy(v[j], w, c);
        scale(c, scale_by);
    }
    Matrix r(k, k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i <= j; ++i) r(i, j) = re(i, j) * scale_by;
    qe.remove_col(k);

    const double tau = kRankFactor * max_column_norm(cols);
    for (std::size_t j = 0; j < k; ++j)
        if (std::abs(r(j, j)) <= tau) throw RankDeficient(j);

    cols_ = std::move(cols);
    q_ = std::move(qe);
    r_ = std::move(r);
    bump();
}

LeastSquares OrthoFactorization::least_squares(std::span<const double> b) const {
    if (b.size() != ambient_) throw DimensionMismatch("least_squares: wrong right-hand side length");
    Vector rem(b.begin(), b.end());
    Vector z = project_out(q_, rem);
    return {solve_r(z), std::move(rem)};
}

Vector OrthoFactorization::solve_r(std::span<const double> b) const {
    const std::size_t k = size();
    if (b.size() != k) throw DimensionMismatch("solve_r: wrong length");
    Vector x(b.begin(), b.end());
    for (std::size_t i = k; i-- > 0;) {
        double s = x[i];
        for (std::size_t j = i + 1; j < k; ++j) s -= r_(i, j) * x[j];
        x[i] = s / r_(i, i);
    }
    return x;
}

Vector OrthoFactorization::solve_rt(std::span<const double> b) const {
    const std::size_t k = size();
    if (b.size() != k) throw DimensionMismatch("solve_rt: wrong length");
    Vector x(b.begin(), b.end());
    for (std::size_t i = 0; i < k; ++i) {
        double s = x[i];
        for (std::size_t j = 0; j < i; ++j) s -= r_(j, i) * x[j];
        x[i] = s / r_(i, i);
    }
    return x;
}

double OrthoFactorization::reconstruction_error() const {
    if (empty()) return 0.0;
    const Matrix qr = multiply(q_, r_);
    return max_abs_diff(qr, cols_) / std::max(1.0, max_column_norm(cols_));
}

double OrthoFactorization::orthogonality_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double g = dot(q_.col(i), q_.col(j)) - (i == j ? 1.0 : 0.0);
            worst = std::max(worst, std::abs(g));
        }
    return worst;
}

void OrthoFactorization::refresh() {
    OrthoFactorization fresh = factorize(cols_);
    q_ = std::move(fresh.q_);
    r_ = std::move(fresh.r_);
    updates_ = 0;
}

void OrthoFactorization::bump() {
    if (++updates_ >= kRefreshInterval) refresh();
}

// ---------------------------------------------------------------------------

OrthoFactorization factorize(const Matrix& m) { return OrthoFactorization::factorize(m); }

OrthoFactorization append_column(OrthoFactorization f, std::span<const double> a) {
    f.append_column(a);
    return f;
}

OrthoFactorization remove_column(OrthoFactorization f, std::size_t idx) {
    f.remove_column(idx);
    return f;
}

OrthoFactorization rank_one_update(OrthoFactorization f, std::span<const double> w, std::span<const double> v,
                                   double scale) {
    f.rank_one_update(w, v, scale);
    return f;
}

LeastSquares least_squares(const OrthoFactorization& f, std::span<const double> b) { return f.least_squares(b); }

} // namespace feas
