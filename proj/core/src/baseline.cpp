#include "feas/baseline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "feas/errors.hpp"

namespace feas {

namespace {

// Row-major square matrix helpers for the basis inverse.
using Square = std::vector<double>;

std::optional<Square> invert(Square m, std::size_t d) {
    Square inv(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) inv[i * d + i] = 1.0;
    double scale_ref = 0.0;
    for (double v : m) scale_ref = std::max(scale_ref, std::abs(v));
    for (std::size_t c = 0; c < d; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < d; ++r)
            if (std::abs(m[r * d + c]) > std::abs(m[piv * d + c])) piv = r;
        if (std::abs(m[piv * d + c]) <= 1e-13 * scale_ref) return std::nullopt;
        if (piv != c)
            for (std::size_t j = 0; j < d; ++j) {
                std::swap(m[c * d + j], m[piv * d + j]);
                std::swap(inv[c * d + j], inv[piv * d + j]);
            }
        const double p = m[c * d + c];
        for (std::size_t j = 0; j < d; ++j) {
            m[c * d + j] /= p;
            inv[c * d + j] /= p;
        }
        for (std::size_t r = 0; r < d; ++r) {
            if (r == c) continue;
            const double f = m[r * d + c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < d; ++j) {
                m[r * d + j] -= f * m[c * d + j];
                inv[r * d + j] -= f * inv[c * d + j];
            }
        }
    }
    return inv;
}

Square basis_rows(const EuclideanInstance& inst, const std::vector<std::size_t>& basis) {
    const std::size_t d = inst.d;
    Square m(d * d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t j = 0; j < d; ++j) m[r * d + j] = inst.normals[basis[r]][j];
    return m;
}

// y = M x
Vector mul(const Square& m, std::span<const double> x, std::size_t d) {
    Vector y(d, 0.0);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t j = 0; j < d; ++j) y[r] += m[r * d + j] * x[j];
    return y;
}

// y = M^T x
Vector mul_t(const Square& m, std::span<const double> x, std::size_t d) {
    Vector y(d, 0.0);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t j = 0; j < d; ++j) y[j] += m[r * d + j] * x[r];
    return y;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Greedy complete-pivoting elimination picking d rows of A.
std::vector<std::size_t> starting_basis(const EuclideanInstance& inst) {
    const std::size_t d = inst.d;
    const std::size_t n = inst.n();
    std::vector<Vector> w = inst.normals;
    std::vector<bool> row_used(n, false), col_used(d, false);
    double ref = 0.0;
    for (const auto& a : w) ref = std::max(ref, max_abs(a));
    std::vector<std::size_t> basis;
    for (std::size_t step = 0; step < d; ++step) {
        double best = 0.0;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (row_used[i]) continue;
            for (std::size_t j = 0; j < d; ++j)
                if (!col_used[j] && std::abs(w[i][j]) > best) {
                    best = std::abs(w[i][j]);
                    bi = i;
                    bj = j;
                }
        }
        if (best <= 1e-10 * ref) throw DimensionTooSmall("constraint normals do not span R^d");
        row_used[bi] = true;
        col_used[bj] = true;
        basis.push_back(bi);
        for (std::size_t i = 0; i < n; ++i) {
            if (row_used[i]) continue;
            const double f = w[i][bj] / w[bi][bj];
            if (f != 0.0) axpy(-f, w[bi], w[i]);
        }
    }
    return basis;
}

} // namespace

SimplexResult simplex_feasibility(const EuclideanInstance& inst, const SimplexConfig& cfg) {
    inst.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t d = inst.d;
    const std::size_t n = inst.n();
    if (n < d) throw DimensionTooSmall("simplex needs n >= d");
    const double tol = cfg.tol * (1.0 + max_abs(inst.offsets));

    SimplexResult res;
    std::vector<std::size_t> basis = starting_basis(inst);
    res.init_pivots = d;
    std::vector<bool> in_basis(n, false);
    for (std::size_t i : basis) in_basis[i] = true;

    auto fresh_inverse = [&]() {
        auto inv = invert(basis_rows(inst, basis), d);
        if (!inv) throw NumericalBreakdown(res.steps, "simplex basis became singular");
        return std::move(*inv);
    };
    Square binv = fresh_inverse();
    // Right-hand side chosen so that y_B = 1 is the starting basic solution.
    Vector c(d, 0.0);
    for (std::size_t i : basis) axpy(1.0, inst.normals[i], c);
    Vector yb(d, 1.0);

    std::size_t consecutive_degenerate = 0;
    std::size_t since_refactor = 0;
    bool verified = false;
    const std::size_t step_cap = 1000 * n * std::max<std::size_t>(d, 1);

    for (;;) {
        Vector bb(d);
        for (std::size_t r = 0; r < d; ++r) bb[r] = inst.offsets[basis[r]];
        const Vector x = mul(binv, bb, d);

        const bool bland = consecutive_degenerate >= d;
        std::optional<std::size_t> enter;
        double best = tol;
        for (std::size_t j = 0; j < n; ++j) {
            if (in_basis[j]) continue;
            const double rc = inst.offsets[j] - dot(inst.normals[j], x);
            if (rc <= tol) continue;
            if (bland) {
                enter = j;
                break;
            }
            if (rc > best) {
                best = rc;
                enter = j;
            }
        }
        if (!enter) {
            if (!verified && since_refactor > 0) {
                binv = fresh_inverse();
                yb = mul_t(binv, c, d);
                since_refactor = 0;
                verified = true;
                continue;
            }
            res.status = SimplexStatus::feasible;
            res.point = x;
            break;
        }
        verified = false;

        // A_B^T dy = -a_j
        Vector dy = mul_t(binv, inst.normals[*enter], d);
        scale(dy, -1.0);
        double t_min = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < d; ++r)
            if (dy[r] < -1e-12) t_min = std::min(t_min, std::max(0.0, yb[r]) / -dy[r]);
        std::optional<std::size_t> leave;
        for (std::size_t r = 0; r < d; ++r) {
            if (dy[r] >= -1e-12) continue;
            const double t = std::max(0.0, yb[r]) / -dy[r];
            if (t <= t_min + 1e-12 * std::max(1.0, t_min) && (!leave || basis[r] < basis[*leave])) leave = r;
        }
        if (!leave) {
            res.status = SimplexStatus::infeasible;
            break;
        }

        const std::size_t r = *leave;
        for (std::size_t i = 0; i < d; ++i) yb[i] += t_min * dy[i];
        yb[r] = t_min;

        // Sherman-Morrison for replacing row r of A_B by a_enter.
        Vector u(inst.normals[*enter]);
        axpy(-1.0, inst.normals[basis[r]], u);
        Vector col_r(d);
        for (std::size_t i = 0; i < d; ++i) col_r[i] = binv[i * d + r];
        const Vector ut_binv = mul_t(binv, u, d);
        const double denom = 1.0 + dot(u, col_r);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) binv[i * d + j] -= col_r[i] * ut_binv[j] / denom;

        in_basis[basis[r]] = false;
        in_basis[*enter] = true;
        basis[r] = *enter;
        ++res.steps;
        ++since_refactor;

        if (t_min <= 1e-12) {
            ++res.degenerate_pivots;
            if (++consecutive_degenerate >= 50 * n) throw Cycling("50 n consecutive degenerate pivots");
        } else {
            consecutive_degenerate = 0;
        }
        if (res.steps >= step_cap) throw Cycling("pivot limit reached");
        if (since_refactor >= cfg.refactor_interval) {
            binv = fresh_inverse();
            yb = mul_t(binv, c, d);
            since_refactor = 0;
        }
    }
    res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// ---------------------------------------------------------------------------

namespace {

// Rank of the normals by Gaussian elimination with complete pivoting.
std::size_t normal_rank(const EuclideanInstance& inst) {
    std::vector<Vector> w = inst.normals;
    double ref = 0.0;
    for (const auto& a : w) ref = std::max(ref, max_abs(a));
    std::vector<bool> row_used(w.size(), false), col_used(inst.d, false);
    std::size_t rank = 0;
    for (;;) {
        double best = 0.0;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (row_used[i]) continue;
            for (std::size_t j = 0; j < inst.d; ++j)
                if (!col_used[j] && std::abs(w[i][j]) > best) {
                    best = std::abs(w[i][j]);
                    bi = i;
                    bj = j;
                }
        }
        if (best <= 1e-10 * ref) return rank;
        row_used[bi] = col_used[bj] = true;
        ++rank;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (row_used[i]) continue;
            const double f = w[i][bj] / w[bi][bj];
            if (f != 0.0) axpy(-f, w[bi], w[i]);
        }
    }
}

// Least-norm solution of A_S x = b_S when the rows of S are independent.
std::optional<Vector> solve_subset(const EuclideanInstance& inst, const std::vector<std::size_t>& s) {
    const std::size_t r = s.size();
    Square gram(r * r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) gram[i * r + j] = dot(inst.normals[s[i]], inst.normals[s[j]]);
    auto inv = invert(std::move(gram), r);
    if (!inv) return std::nullopt;
    Vector bs(r);
    for (std::size_t i = 0; i < r; ++i) bs[i] = inst.offsets[s[i]];
    const Vector z = mul(*inv, bs, r);
    Vector x(inst.d, 0.0);
    for (std::size_t i = 0; i < r; ++i) axpy(z[i], inst.normals[s[i]], x);
    return x;
}

} // namespace

bool brute_force_feasible(const EuclideanInstance& inst) {
    inst.validate();
    if (inst.d > 4 || inst.n() > 60) throw TooLarge("brute force needs d <= 4 and n <= 60");
    const double tol = 1e-9 * (1.0 + max_abs(inst.offsets));
    auto ok = [&](std::span<const double> x) { return inst.violation(x) <= tol; };

    const Vector origin(inst.d, 0.0);
    if (ok(origin)) return true;
    if (!inst.provenance.translation.empty() && ok(inst.provenance.translation)) return true;

    const std::size_t rank = normal_rank(inst);
    const std::size_t n = inst.n();
    double radius = 1.0;
    if (rank > 0) {
        std::vector<std::size_t> s(rank);
        for (std::size_t i = 0; i < rank; ++i) s[i] = i;
        for (;;) {
            if (auto x = solve_subset(inst, s)) {
                if (ok(*x)) return true;
                radius = std::max(radius, max_abs(*x));
            }
            // next combination
            std::size_t i = rank;
            while (i > 0 && s[i - 1] == n - rank + i - 1) --i;
            if (i == 0) break;
            ++s[i - 1];
            for (std::size_t j = i; j < rank; ++j) s[j] = s[j - 1] + 1;
        }
    }

    Rng rng(0x5eed);
    Vector x(inst.d);
    for (int k = 0; k < 4000; ++k) {
        for (auto& v : x) v = rng.uniform(-2.0 * radius, 2.0 * radius);
        if (ok(x)) return true;
    }
    return false;
}

} // namespace feas
