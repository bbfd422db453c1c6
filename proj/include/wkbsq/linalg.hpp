#ifndef WKBSQ_LINALG_HPP
#define WKBSQ_LINALG_HPP

#include <optional>
#include <vector>

#include "wkbsq/errors.hpp"

namespace wkbsq {

template <class K>
using Mat = std::vector<std::vector<K>>;

template <class K>
Mat<K> mat_identity(size_t n) {
    Mat<K> m(n, std::vector<K>(n, K(0)));
    for (size_t i = 0; i < n; ++i) m[i][i] = K(1);
    return m;
}

template <class K>
Mat<K> mat_mul(const Mat<K>& a, const Mat<K>& b) {
    size_t n = a.size(), p = b.size(), q = b.empty() ? 0 : b[0].size();
    Mat<K> c(n, std::vector<K>(q, K(0)));
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < p; ++k) {
            if (a[i][k].is_zero()) continue;
            for (size_t j = 0; j < q; ++j) c[i][j] = c[i][j] + a[i][k] * b[k][j];
        }
    return c;
}

/// Determinant over a commutative ring by cofactor expansion (small sizes).
template <class Ring>
Ring det_ring(const Mat<Ring>& m) {
    size_t n = m.size();
    if (n == 0) return Ring(1);
    if (n == 1) return m[0][0];
    if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    Ring acc(0);
    for (size_t j = 0; j < n; ++j) {
        Mat<Ring> minor(n - 1, std::vector<Ring>(n - 1, Ring(0)));
        for (size_t r = 1; r < n; ++r) {
            size_t cc = 0;
            for (size_t c = 0; c < n; ++c) {
                if (c == j) continue;
                minor[r - 1][cc++] = m[r][c];
            }
        }
        Ring term = m[0][j] * det_ring(minor);
        acc = (j % 2 == 0) ? acc + term : acc - term;
    }
    return acc;
}

/// Determinant by fraction-full Gaussian elimination over a field.
template <class K>
K det_field(Mat<K> m) {
    size_t n = m.size();
    K det(1);
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        while (piv < n && m[piv][col].is_zero()) ++piv;
        if (piv == n) return K(0);
        if (piv != col) {
            std::swap(m[piv], m[col]);
            det = -det;
        }
        det = det * m[col][col];
        for (size_t r = col + 1; r < n; ++r) {
            if (m[r][col].is_zero()) continue;
            K f = m[r][col] / m[col][col];
            for (size_t c = col; c < n; ++c) m[r][c] = m[r][c] - f * m[col][c];
        }
    }
    return det;
}

/// One solution of A x = b by row reduction (free variables set to zero);
/// nullopt when inconsistent.
template <class K>
std::optional<std::vector<K>> solve_field(Mat<K> a, std::vector<K> b) {
    size_t rows = a.size(), cols = rows ? a[0].size() : 0;
    std::vector<int> pivot_col(rows, -1);
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t piv = r;
        while (piv < rows && a[piv][c].is_zero()) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[r]);
        std::swap(b[piv], b[r]);
        K inv = K(1) / a[r][c];
        for (size_t j = c; j < cols; ++j) a[r][j] = a[r][j] * inv;
        b[r] = b[r] * inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r || a[i][c].is_zero()) continue;
            K f = a[i][c];
            for (size_t j = c; j < cols; ++j) a[i][j] = a[i][j] - f * a[r][j];
            b[i] = b[i] - f * b[r];
        }
        pivot_col[r] = static_cast<int>(c);
        ++r;
    }
    for (size_t i = r; i < rows; ++i)
        if (!b[i].is_zero()) return std::nullopt;
    std::vector<K> x(cols, K(0));
    for (size_t i = 0; i < r; ++i) x[pivot_col[i]] = b[i];
    return x;
}

/// Nullspace basis by reduced row echelon form. is_pivot decides whether an
/// entry is usable as a pivot (strict nonzero for exact scalars, a magnitude
/// threshold for floats).
template <class K, class IsPivot>
std::vector<std::vector<K>> nullspace_field(Mat<K> a, IsPivot is_pivot) {
    size_t rows = a.size(), cols = rows ? a[0].size() : 0;
    if (cols == 0) return {};
    std::vector<int> pivot_of_col(cols, -1);
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t piv = rows;
        for (size_t i = r; i < rows; ++i)
            if (is_pivot(a[i][c])) {
                piv = i;
                break;
            }
        if (piv == rows) continue;
        std::swap(a[piv], a[r]);
        K inv = K(1) / a[r][c];
        for (size_t j = c; j < cols; ++j) a[r][j] = a[r][j] * inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r) continue;
            if (a[i][c].is_zero()) continue;
            K f = a[i][c];
            for (size_t j = c; j < cols; ++j) a[i][j] = a[i][j] - f * a[r][j];
        }
        pivot_of_col[c] = static_cast<int>(r);
        ++r;
    }
    std::vector<std::vector<K>> basis;
    for (size_t c = 0; c < cols; ++c) {
        if (pivot_of_col[c] >= 0) continue;
        std::vector<K> v(cols, K(0));
        v[c] = K(1);
        for (size_t c2 = 0; c2 < cols; ++c2)
            if (pivot_of_col[c2] >= 0) v[c2] = -a[pivot_of_col[c2]][c];
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Matrix inverse over a field; throws NotInvertible.
template <class K>
Mat<K> inverse_field(Mat<K> a) {
    size_t n = a.size();
    Mat<K> inv = mat_identity<K>(n);
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        while (piv < n && a[piv][col].is_zero()) ++piv;
        if (piv == n) throw NotInvertible("singular matrix");
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        K f = K(1) / a[col][col];
        for (size_t j = 0; j < n; ++j) {
            a[col][j] = a[col][j] * f;
            inv[col][j] = inv[col][j] * f;
        }
        for (size_t r2 = 0; r2 < n; ++r2) {
            if (r2 == col || a[r2][col].is_zero()) continue;
            K g = a[r2][col];
            for (size_t j = 0; j < n; ++j) {
                a[r2][j] = a[r2][j] - g * a[col][j];
                inv[r2][j] = inv[r2][j] - g * inv[col][j];
            }
        }
    }
    return inv;
}

} // namespace wkbsq

#endif
