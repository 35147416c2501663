#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace colombeau {

/// Solve A x = b in place for small dense systems (Gaussian elimination with
/// partial pivoting). A is row-major n*n and is destroyed. Returns false when
/// the pivot collapses (singular matrix).
inline bool solve_linear(std::vector<double>& A, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(A[r * n + col]) > std::fabs(A[pivot * n + col])) pivot = r;
        if (std::fabs(A[pivot * n + col]) < 1e-300) return false;
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(A[col * n + c], A[pivot * n + c]);
            std::swap(b[col], b[pivot]);
        }
        double inv = 1.0 / A[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            double f = A[r * n + col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (int col = n - 1; col >= 0; --col) {
        double s = b[col];
        for (int c = col + 1; c < n; ++c) s -= A[col * n + c] * b[c];
        b[col] = s / A[col * n + col];
    }
    return true;
}

/// Determinant by LU with partial pivoting (copy-in).
inline double determinant(std::vector<double> A, int n) {
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(A[r * n + col]) > std::fabs(A[pivot * n + col])) pivot = r;
        if (A[pivot * n + col] == 0.0) return 0.0;
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(A[col * n + c], A[pivot * n + c]);
            det = -det;
        }
        det *= A[col * n + col];
        double inv = 1.0 / A[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            double f = A[r * n + col] * inv;
            for (int c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
        }
    }
    return det;
}

/// Inverse of a small dense matrix; throws on singularity.
inline std::vector<double> invert_matrix(const std::vector<double>& A, int n) {
    std::vector<double> inv(n * n, 0.0);
    for (int col = 0; col < n; ++col) {
        std::vector<double> a = A;
        std::vector<double> e(n, 0.0);
        e[col] = 1.0;
        if (!solve_linear(a, e, n)) throw std::runtime_error("singular matrix");
        for (int r = 0; r < n; ++r) inv[r * n + col] = e[r];
    }
    return inv;
}

} // namespace colombeau
