#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rmlab/exact.hpp"
#include "rmlab/matrix.hpp"

namespace rmlab {

namespace detail {

// exact rank over the rationals; doubles are converted exactly
inline int rank_exact_rational(const Mat& m) {
    int r = m.rows, c = m.cols;
    std::vector<Rational> a(static_cast<size_t>(r) * c);
    for (size_t i = 0; i < a.size(); ++i) a[i] = Rational::from_double_exact(m.a[i]);
    int rank = 0;
    for (int col = 0; col < c && rank < r; ++col) {
        int piv = -1;
        for (int row = rank; row < r; ++row)
            if (!a[static_cast<size_t>(row) * c + col].is_zero()) { piv = row; break; }
        if (piv < 0) continue;
        for (int j = 0; j < c; ++j)
            std::swap(a[static_cast<size_t>(piv) * c + j], a[static_cast<size_t>(rank) * c + j]);
        Rational inv = Rational(1) / a[static_cast<size_t>(rank) * c + col];
        for (int row = rank + 1; row < r; ++row) {
            Rational f = a[static_cast<size_t>(row) * c + col] * inv;
            if (f.is_zero()) continue;
            for (int j = col; j < c; ++j)
                a[static_cast<size_t>(row) * c + j] -= f * a[static_cast<size_t>(rank) * c + j];
        }
        ++rank;
    }
    return rank;
}

inline bool integer_entries(const Mat& m, std::vector<int64_t>& out) {
    out.resize(m.a.size());
    for (size_t i = 0; i < m.a.size(); ++i) {
        double v = m.a[i];
        if (std::floor(v) != v || std::abs(v) > 1e15) return false;
        out[i] = static_cast<int64_t>(v);
    }
    return true;
}

} // namespace detail

// one-sided Jacobi on columns: high relative accuracy for small singular values
inline std::vector<double> singular_values_jacobi(Mat m) {
    const int n = m.rows, c = m.cols;
    if (n != c) throw ValidationError("singular_values: square matrix required");
    const double tol = 1e-15;
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < c - 1; ++p) {
            for (int q = p + 1; q < c; ++q) {
                double app = 0, aqq = 0, apq = 0;
                for (int i = 0; i < n; ++i) {
                    app += m(i, p) * m(i, p);
                    aqq += m(i, q) * m(i, q);
                    apq += m(i, p) * m(i, q);
                }
                if (std::abs(apq) <= tol * std::sqrt(app * aqq)) continue;
                rotated = true;
                double zeta = (aqq - app) / (2.0 * apq);
                double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double cs = 1.0 / std::sqrt(1.0 + t * t);
                double sn = cs * t;
                for (int i = 0; i < n; ++i) {
                    double vp = m(i, p), vq = m(i, q);
                    m(i, p) = cs * vp - sn * vq;
                    m(i, q) = sn * vp + cs * vq;
                }
            }
        }
        if (!rotated) break;
    }
    std::vector<double> sv(static_cast<size_t>(c));
    for (int j = 0; j < c; ++j) {
        double s = 0;
        for (int i = 0; i < n; ++i) s += m(i, j) * m(i, j);
        sv[static_cast<size_t>(j)] = std::sqrt(s);
    }
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    return sv;
}

// Smallest singular value. Rank-deficient matrices with exactly representable
// entries return exactly zero via the exact-rank pre-check, so singularity is
// never a floating-point judgment.
inline double smallest_singular(const Mat& m, bool exact_precheck = true) {
    if (m.rows != m.cols) throw ValidationError("smallest_singular: square matrix required");
    if (exact_precheck) {
        std::vector<int64_t> ints;
        if (detail::integer_entries(m, ints) && hadamard_log2_bound(ints, m.rows) < 126.0) {
            if (det_bareiss_i128(ints, m.rows) == 0) return 0.0;
        } else if (m.rows <= 64) {
            if (detail::rank_exact_rational(m) < m.rows) return 0.0;
        }
    }
    return singular_values_jacobi(m).back();
}

// unit right-kernel vector of an (n-1) x n matrix via Householder QR of A^T;
// sign fixed so the first coordinate above 1e-8 in magnitude is positive
inline std::vector<double> kernel_vector(const Mat& a) {
    if (a.cols != a.rows + 1) throw ValidationError("kernel_vector: expected (n-1) x n input");
    const int n = a.cols;
    Mat t = a.transposed(); // n x (n-1)
    // accumulate Householder reflectors; then v = H_1 ... H_{n-1} e_n
    std::vector<std::vector<double>> vs;
    std::vector<double> betas;
    for (int j = 0; j < n - 1; ++j) {
        double norm = 0;
        for (int i = j; i < n; ++i) norm += t(i, j) * t(i, j);
        norm = std::sqrt(norm);
        double alpha = t(j, j) >= 0 ? -norm : norm;
        std::vector<double> v(static_cast<size_t>(n), 0.0);
        v[static_cast<size_t>(j)] = t(j, j) - alpha;
        for (int i = j + 1; i < n; ++i) v[static_cast<size_t>(i)] = t(i, j);
        double vnorm2 = 0;
        for (double x : v) vnorm2 += x * x;
        double beta = vnorm2 > 0 ? 2.0 / vnorm2 : 0.0;
        if (beta > 0) {
            for (int col = j; col < n - 1; ++col) {
                double dot = 0;
                for (int i = j; i < n; ++i) dot += v[static_cast<size_t>(i)] * t(i, col);
                dot *= beta;
                for (int i = j; i < n; ++i) t(i, col) -= dot * v[static_cast<size_t>(i)];
            }
        }
        vs.push_back(std::move(v));
        betas.push_back(beta);
    }
    std::vector<double> e(static_cast<size_t>(n), 0.0);
    e.back() = 1.0;
    for (int j = n - 2; j >= 0; --j) {
        if (betas[static_cast<size_t>(j)] == 0.0) continue;
        double dot = 0;
        for (int i = 0; i < n; ++i) dot += vs[static_cast<size_t>(j)][static_cast<size_t>(i)] * e[static_cast<size_t>(i)];
        dot *= betas[static_cast<size_t>(j)];
        for (int i = 0; i < n; ++i) e[static_cast<size_t>(i)] -= dot * vs[static_cast<size_t>(j)][static_cast<size_t>(i)];
    }
    double norm = 0;
    for (double x : e) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : e) x /= norm;
    for (double x : e) {
        if (std::abs(x) > 1e-8) {
            if (x < 0)
                for (double& y : e) y = -y;
            break;
        }
    }
    return e;
}

// Euclidean distance from column i (1-based per the calling convention used
// throughout: callers pass 0-based) to the span of the remaining columns
inline double dist_to_colspan(const Mat& m, int col) {
    if (col < 0 || col >= m.cols) throw ValidationError("dist_to_colspan: column out of range");
    const int n = m.rows;
    Mat rest(n, m.cols - 1);
    std::vector<double> target(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        target[static_cast<size_t>(i)] = m(i, col);
        int cc = 0;
        for (int j = 0; j < m.cols; ++j) {
            if (j == col) continue;
            rest(i, cc++) = m(i, j);
        }
    }
    // Householder QR with column pivoting; project target onto the range
    int r = rest.rows, c = rest.cols;
    std::vector<int> perm(static_cast<size_t>(c));
    for (int j = 0; j < c; ++j) perm[static_cast<size_t>(j)] = j;
    std::vector<double> colnorm(static_cast<size_t>(c), 0.0);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) colnorm[static_cast<size_t>(j)] += rest(i, j) * rest(i, j);
    int rank_cap = std::min(r, c);
    for (int j = 0; j < rank_cap; ++j) {
        int best = j;
        for (int jj = j + 1; jj < c; ++jj)
            if (colnorm[static_cast<size_t>(jj)] > colnorm[static_cast<size_t>(best)]) best = jj;
        if (best != j) {
            for (int i = 0; i < r; ++i) std::swap(rest(i, j), rest(i, best));
            std::swap(colnorm[static_cast<size_t>(j)], colnorm[static_cast<size_t>(best)]);
            std::swap(perm[static_cast<size_t>(j)], perm[static_cast<size_t>(best)]);
        }
        double norm = 0;
        for (int i = j; i < r; ++i) norm += rest(i, j) * rest(i, j);
        norm = std::sqrt(norm);
        if (norm < 1e-14) break; // numerically rank deficient; remaining columns negligible
        double alpha = rest(j, j) >= 0 ? -norm : norm;
        double v0 = rest(j, j) - alpha;
        double vnorm2 = v0 * v0;
        for (int i = j + 1; i < r; ++i) vnorm2 += rest(i, j) * rest(i, j);
        double beta = 2.0 / vnorm2;
        rest(j, j) = v0;
        for (int cc = j + 1; cc < c; ++cc) {
            double dot = 0;
            for (int i = j; i < r; ++i) dot += rest(i, j) * rest(i, cc);
            dot *= beta;
            for (int i = j; i < r; ++i) rest(i, cc) -= dot * rest(i, j);
        }
        // apply to target
        double dot = 0;
        for (int i = j; i < r; ++i) dot += rest(i, j) * target[static_cast<size_t>(i)];
        dot *= beta;
        for (int i = j; i < r; ++i) target[static_cast<size_t>(i)] -= dot * rest(i, j);
        rest(j, j) = alpha;
        for (int jj = j + 1; jj < c; ++jj)
            colnorm[static_cast<size_t>(jj)] -= rest(j, jj) * rest(j, jj);
    }
    // residual = components of the transformed target beyond the achieved rank
    int rank = 0;
    for (int j = 0; j < rank_cap; ++j)
        if (std::abs(rest(j, j)) > 1e-14) rank = j + 1;
    double res = 0;
    for (int i = rank; i < r; ++i) res += target[static_cast<size_t>(i)] * target[static_cast<size_t>(i)];
    return std::sqrt(res);
}

// spectral norm of M - mean * J via power iteration on the Gram operator
inline double opnorm_centered(const Mat& m, double mean, double rel_tol = 1e-6) {
    const int r = m.rows, c = m.cols;
    std::vector<double> x(static_cast<size_t>(c));
    for (int j = 0; j < c; ++j) x[static_cast<size_t>(j)] = 1.0 / std::sqrt(static_cast<double>(c)) + 1e-3 * std::cos(1.0 + j);
    auto apply = [&](const std::vector<double>& v, std::vector<double>& mv, std::vector<double>& mtmv) {
        mv.assign(static_cast<size_t>(r), 0.0);
        double vsum = 0;
        for (double t : v) vsum += t;
        for (int i = 0; i < r; ++i) {
            double s = 0;
            for (int j = 0; j < c; ++j) s += m(i, j) * v[static_cast<size_t>(j)];
            mv[static_cast<size_t>(i)] = s - mean * vsum;
        }
        mtmv.assign(static_cast<size_t>(c), 0.0);
        double msum = 0;
        for (double t : mv) msum += t;
        for (int j = 0; j < c; ++j) {
            double s = 0;
            for (int i = 0; i < r; ++i) s += m(i, j) * mv[static_cast<size_t>(i)];
            mtmv[static_cast<size_t>(j)] = s - mean * msum;
        }
    };
    double prev = 0;
    std::vector<double> mv, mtmv;
    for (int it = 0; it < 2000; ++it) {
        apply(x, mv, mtmv);
        double norm = 0;
        for (double t : mtmv) norm += t * t;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        for (int j = 0; j < c; ++j) x[static_cast<size_t>(j)] = mtmv[static_cast<size_t>(j)] / norm;
        double mvnorm = 0;
        for (double t : mv) mvnorm += t * t;
        double sigma = std::sqrt(mvnorm);
        if (it > 4 && std::abs(sigma - prev) <= rel_tol * std::max(1e-300, sigma)) return sigma;
        prev = sigma;
    }
    return prev;
}

} // namespace rmlab
