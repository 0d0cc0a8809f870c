/*
 * stackselect : motion assessment and reference stack selection
 *
 * Copyright 2026 the stackselect authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "stackselect/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>

#include "stackselect/error.hpp"

namespace stackselect {

namespace {

void check_finite(const Matrix& m, const char* what) {
    for (double v : m.data) {
        if (!std::isfinite(v)) fail(ErrorCode::InvalidMatrix, std::string(what) + " has non-finite entries");
    }
}

double dot(const double* a, const double* b, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

Matrix::Matrix(int r, int c) : rows(r), cols(c) {
    if (r < 0 || c < 0) fail(ErrorCode::InvalidMatrix, "negative matrix shape");
    data.assign(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0);
}

Matrix::Matrix(int r, int c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    if (r < 0 || c < 0) fail(ErrorCode::InvalidMatrix, "negative matrix shape");
    if (data.size() != static_cast<std::size_t>(r) * static_cast<std::size_t>(c))
        fail(ErrorCode::InvalidMatrix, "data length does not match rows*cols");
}

double frobenius_norm(const Matrix& m) {
    double acc = 0.0;
    for (double v : m.data) acc += v * v;
    return std::sqrt(acc);
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) t.at(c, r) = m.at(r, c);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) fail(ErrorCode::ShapeMismatch, "matmul inner dimensions differ");
    Matrix out(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.data.data() + static_cast<std::size_t>(i) * a.cols;
        double* orow = out.data.data() + static_cast<std::size_t>(i) * b.cols;
        for (int k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.data.data() + static_cast<std::size_t>(k) * b.cols;
            for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Matrix gram(const Matrix& a) {
    Matrix g(a.cols, a.cols);
    for (int r = 0; r < a.rows; ++r) {
        const double* row = a.data.data() + static_cast<std::size_t>(r) * a.cols;
        for (int i = 0; i < a.cols; ++i) {
            const double ri = row[i];
            if (ri == 0.0) continue;
            double* grow = g.data.data() + static_cast<std::size_t>(i) * a.cols;
            for (int j = i; j < a.cols; ++j) grow[j] += ri * row[j];
        }
    }
    for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < i; ++j) g.at(i, j) = g.at(j, i);
    return g;
}

Matrix cholesky_solve_spd(Matrix g, const Matrix& rhs, double ridge_scale) {
    if (g.rows != g.cols) fail(ErrorCode::ShapeMismatch, "normal matrix must be square");
    if (rhs.rows != g.rows) fail(ErrorCode::ShapeMismatch, "rhs rows do not match system size");
    const int n = g.rows;
    if (n == 0) return Matrix(0, rhs.cols);

    if (ridge_scale > 0.0) {
        double mean_diag = 0.0;
        for (int i = 0; i < n; ++i) mean_diag += g.at(i, i);
        mean_diag /= n;
        const double ridge = ridge_scale * (mean_diag > 0.0 ? mean_diag : 1.0);
        for (int i = 0; i < n; ++i) g.at(i, i) += ridge;
    }

    // In-place lower Cholesky.
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = g.at(i, j);
            for (int k = 0; k < j; ++k) s -= g.at(i, k) * g.at(j, k);
            if (i == j) {
                if (!(s > 0.0) || !std::isfinite(s))
                    fail(ErrorCode::SingularSystem, "normal matrix is not positive definite");
                g.at(i, i) = std::sqrt(s);
            } else {
                g.at(i, j) = s / g.at(j, j);
            }
        }
    }

    Matrix x = rhs;
    for (int c = 0; c < x.cols; ++c) {
        // forward: L y = b
        for (int i = 0; i < n; ++i) {
            double s = x.at(i, c);
            for (int k = 0; k < i; ++k) s -= g.at(i, k) * x.at(k, c);
            x.at(i, c) = s / g.at(i, i);
        }
        // backward: L^T x = y
        for (int i = n - 1; i >= 0; --i) {
            double s = x.at(i, c);
            for (int k = i + 1; k < n; ++k) s -= g.at(k, i) * x.at(k, c);
            x.at(i, c) = s / g.at(i, i);
        }
    }
    return x;
}

Matrix solve_least_squares(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) fail(ErrorCode::ShapeMismatch, "lhs and rhs row counts differ");
    check_finite(a, "lhs");
    check_finite(b, "rhs");
    return cholesky_solve_spd(gram(a), matmul(transpose(a), b), 1e-10);
}

Matrix unfold(const std::array<int, 3>& dims, const std::vector<double>& data, int mode) {
    const auto [nx, ny, nz] = dims;
    if (nx <= 0 || ny <= 0 || nz <= 0) fail(ErrorCode::InvalidMatrix, "tensor dims must be positive");
    if (data.size() != static_cast<std::size_t>(nx) * ny * nz)
        fail(ErrorCode::ShapeMismatch, "tensor data length does not match dims");
    if (mode < 1 || mode > 3) fail(ErrorCode::InvalidParameter, "mode must be 1, 2, or 3");

    // x-fastest input index: x + nx*(y + ny*z).
    if (mode == 1) {
        Matrix m(nx, ny * nz);
        std::size_t src = 0;
        for (int z = 0; z < nz; ++z)
            for (int y = 0; y < ny; ++y) {
                const std::size_t col = static_cast<std::size_t>(y) + static_cast<std::size_t>(ny) * z;
                for (int x = 0; x < nx; ++x)
                    m.data[static_cast<std::size_t>(x) * m.cols + col] = data[src++];
            }
        return m;
    }
    if (mode == 2) {
        Matrix m(ny, nx * nz);
        std::size_t src = 0;
        for (int z = 0; z < nz; ++z)
            for (int y = 0; y < ny; ++y) {
                double* row = m.data.data() + static_cast<std::size_t>(y) * m.cols;
                const std::size_t col0 = static_cast<std::size_t>(nx) * z;
                for (int x = 0; x < nx; ++x) row[col0 + x] = data[src++];
            }
        return m;
    }
    Matrix m(nz, nx * ny);
    // mode-3 rows are contiguous xy-planes of the input.
    std::copy(data.begin(), data.end(), m.data.begin());
    return m;
}

std::vector<double> fold(const Matrix& m, const std::array<int, 3>& dims, int mode) {
    const auto [nx, ny, nz] = dims;
    if (mode < 1 || mode > 3) fail(ErrorCode::InvalidParameter, "mode must be 1, 2, or 3");
    const std::size_t total = static_cast<std::size_t>(nx) * ny * nz;
    if (m.size() != total) fail(ErrorCode::ShapeMismatch, "matrix does not match tensor dims");
    const std::array<int, 3> expect_rows{nx, ny, nz};
    if (m.rows != expect_rows[mode - 1]) fail(ErrorCode::ShapeMismatch, "matrix rows do not match the mode size");

    std::vector<double> out(total);
    if (mode == 3) {
        std::copy(m.data.begin(), m.data.end(), out.begin());
        return out;
    }
    std::size_t dst = 0;
    if (mode == 1) {
        for (int z = 0; z < nz; ++z)
            for (int y = 0; y < ny; ++y) {
                const std::size_t col = static_cast<std::size_t>(y) + static_cast<std::size_t>(ny) * z;
                for (int x = 0; x < nx; ++x)
                    out[dst++] = m.data[static_cast<std::size_t>(x) * m.cols + col];
            }
        return out;
    }
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y) {
            const double* row = m.data.data() + static_cast<std::size_t>(y) * m.cols;
            const std::size_t col0 = static_cast<std::size_t>(nx) * z;
            for (int x = 0; x < nx; ++x) out[dst++] = row[col0 + x];
        }
    return out;
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) fail(ErrorCode::ShapeMismatch, "khatri_rao needs equal column counts");
    Matrix out(a.rows * b.rows, a.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < b.rows; ++k) {
            double* orow = out.data.data() +
                           (static_cast<std::size_t>(i) * b.rows + k) * out.cols;
            const double* arow = a.data.data() + static_cast<std::size_t>(i) * a.cols;
            const double* brow = b.data.data() + static_cast<std::size_t>(k) * b.cols;
            for (int j = 0; j < out.cols; ++j) orow[j] = arow[j] * brow[j];
        }
    return out;
}

namespace {

// One-sided Jacobi state: k working columns of length len, column-major.
struct JacobiSide {
    std::vector<double> cols;
    int len = 0;
    int count = 0;
    double* col(int j) { return cols.data() + static_cast<std::size_t>(j) * len; }
    const double* col(int j) const { return cols.data() + static_cast<std::size_t>(j) * len; }
};

// Orthogonalizes the working columns by plane rotations until the implicit
// Gram matrix has off-diagonal Frobenius mass below 1e-12 (the working copy
// is pre-scaled to unit Frobenius norm), at most 60 sweeps.
void jacobi_sweeps(JacobiSide& w, JacobiSide& v) {
    constexpr double kOffLimit = 1e-12;
    constexpr int kMaxSweeps = 60;
    const int k = w.count;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off2 = 0.0;
        for (int p = 0; p < k - 1; ++p) {
            for (int q = p + 1; q < k; ++q) {
                double* wp = w.col(p);
                double* wq = w.col(q);
                const double alpha = dot(wp, wq, w.len);
                off2 += 2.0 * alpha * alpha;
                if (alpha == 0.0) continue;
                const double beta = dot(wp, wp, w.len);
                const double gamma = dot(wq, wq, w.len);
                if (beta == 0.0 || gamma == 0.0) continue;
                const double zeta = (gamma - beta) / (2.0 * alpha);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < w.len; ++i) {
                    const double a = wp[i];
                    wp[i] = c * a - s * wq[i];
                    wq[i] = s * a + c * wq[i];
                }
                double* vp = v.col(p);
                double* vq = v.col(q);
                for (int i = 0; i < v.len; ++i) {
                    const double a = vp[i];
                    vp[i] = c * a - s * vq[i];
                    vq[i] = s * a + c * vq[i];
                }
            }
        }
        if (std::sqrt(off2) < kOffLimit) break;
    }
}

// First canonical basis vector whose residual against the existing columns
// keeps a usable norm; deterministic fill for rank-deficient spectra.
void orthonormal_fill(Matrix& m, int col) {
    const int n = m.rows;
    for (int t = 0; t < n; ++t) {
        std::vector<double> u(n, 0.0);
        u[t] = 1.0;
        for (int j = 0; j < col; ++j) {
            double proj = 0.0;
            for (int i = 0; i < n; ++i) proj += m.at(i, j) * u[i];
            for (int i = 0; i < n; ++i) u[i] -= proj * m.at(i, j);
        }
        double nrm2 = 0.0;
        for (double x : u) nrm2 += x * x;
        const double floor2 = 0.25 * (static_cast<double>(n - col) / n);
        if (nrm2 >= floor2 && nrm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(nrm2);
            for (int i = 0; i < n; ++i) m.at(i, col) = u[i] * inv;
            return;
        }
    }
    fail(ErrorCode::SingularSystem, "could not extend orthonormal basis");
}

}  // namespace

SvdTruncation truncated_svd(const Matrix& m, int rank) {
    if (m.rows <= 0 || m.cols <= 0) fail(ErrorCode::InvalidMatrix, "matrix must be non-empty");
    if (m.data.size() != static_cast<std::size_t>(m.rows) * m.cols)
        fail(ErrorCode::InvalidMatrix, "data length does not match rows*cols");
    check_finite(m, "matrix");
    if (rank < 1) fail(ErrorCode::InvalidParameter, "rank must be positive");
    if (rank > std::min(m.rows, m.cols)) fail(ErrorCode::RankTooLarge, "rank exceeds min(rows, cols)");

    SvdTruncation out;
    out.rank = rank;
    out.singular_values.assign(rank, 0.0);
    out.left_vectors = Matrix(m.rows, rank);
    out.right_vectors = Matrix(m.cols, rank);

    const double norm = frobenius_norm(m);
    if (norm == 0.0) {
        for (int r = 0; r < rank; ++r) {
            out.left_vectors.at(r, r) = 1.0;
            out.right_vectors.at(r, r) = 1.0;
        }
        return out;
    }

    // Rotate on the smaller dimension; for wide matrices work on M^T.
    const bool transposed = m.rows < m.cols;
    JacobiSide w;  // scaled working columns, length len
    w.len = transposed ? m.cols : m.rows;
    w.count = transposed ? m.rows : m.cols;
    w.cols.resize(static_cast<std::size_t>(w.len) * w.count);
    const double inv_norm = 1.0 / norm;
    for (int j = 0; j < w.count; ++j) {
        double* c = w.col(j);
        for (int i = 0; i < w.len; ++i) c[i] = (transposed ? m.at(j, i) : m.at(i, j)) * inv_norm;
    }
    JacobiSide v;  // accumulated rotations, exactly orthonormal
    v.len = v.count = w.count;
    v.cols.assign(static_cast<std::size_t>(v.len) * v.count, 0.0);
    for (int j = 0; j < v.count; ++j) v.col(j)[j] = 1.0;

    jacobi_sweeps(w, v);

    std::vector<double> sigma(w.count);
    for (int j = 0; j < w.count; ++j) sigma[j] = std::sqrt(dot(w.col(j), w.col(j), w.len));
    std::vector<int> order(w.count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sigma[a] > sigma[b]; });
    const double sigma_max = sigma[order[0]];

    Matrix& normalized = transposed ? out.right_vectors : out.left_vectors;
    Matrix& accumulated = transposed ? out.left_vectors : out.right_vectors;
    for (int r = 0; r < rank; ++r) {
        const int j = order[r];
        out.singular_values[r] = sigma[j] * norm;
        for (int i = 0; i < v.len; ++i) accumulated.at(i, r) = v.col(j)[i];

        bool deficient = sigma_max <= 0.0 || sigma[j] <= 1e-12 * sigma_max;
        if (!deficient) {
            const double inv = 1.0 / sigma[j];
            for (int i = 0; i < w.len; ++i) normalized.at(i, r) = w.col(j)[i] * inv;
            // Re-orthogonalize against previous columns; corrections are
            // O(convergence tolerance) except for degenerate spectra.
            for (int p = 0; p < r; ++p) {
                double proj = 0.0;
                for (int i = 0; i < w.len; ++i) proj += normalized.at(i, p) * normalized.at(i, r);
                for (int i = 0; i < w.len; ++i) normalized.at(i, r) -= proj * normalized.at(i, p);
            }
            double nrm2 = 0.0;
            for (int i = 0; i < w.len; ++i) nrm2 += normalized.at(i, r) * normalized.at(i, r);
            if (nrm2 >= 0.25) {
                const double inv2 = 1.0 / std::sqrt(nrm2);
                for (int i = 0; i < w.len; ++i) normalized.at(i, r) *= inv2;
            } else {
                deficient = true;
            }
        }
        if (deficient) orthonormal_fill(normalized, r);
    }

    // Canonical signs: largest-magnitude left entry non-negative.
    for (int r = 0; r < rank; ++r) {
        int arg = 0;
        double best = -1.0;
        for (int i = 0; i < out.left_vectors.rows; ++i) {
            const double a = std::abs(out.left_vectors.at(i, r));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (out.left_vectors.at(arg, r) < 0.0) {
            for (int i = 0; i < out.left_vectors.rows; ++i) out.left_vectors.at(i, r) = -out.left_vectors.at(i, r);
            for (int i = 0; i < out.right_vectors.rows; ++i) out.right_vectors.at(i, r) = -out.right_vectors.at(i, r);
        }
    }
    return out;
}

Matrix reconstruct(const SvdTruncation& t) {
    const int m = t.left_vectors.rows;
    const int n = t.right_vectors.rows;
    Matrix out(m, n);
    for (int i = 0; i < m; ++i) {
        double* orow = out.data.data() + static_cast<std::size_t>(i) * n;
        for (int r = 0; r < t.rank; ++r) {
            const double w = t.singular_values[r] * t.left_vectors.at(i, r);
            if (w == 0.0) continue;
            for (int j = 0; j < n; ++j) orow[j] += w * t.right_vectors.at(j, r);
        }
    }
    return out;
}

double low_rank_error(const Matrix& m, const SvdTruncation& t) {
    if (t.left_vectors.rows != m.rows || t.right_vectors.rows != m.cols)
        fail(ErrorCode::ShapeMismatch, "truncation shape does not match matrix");
    const double norm = frobenius_norm(m);
    if (norm == 0.0) return 0.0;

    std::vector<double> row(m.cols);
    double err2 = 0.0;
    for (int i = 0; i < m.rows; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        for (int r = 0; r < t.rank; ++r) {
            const double w = t.singular_values[r] * t.left_vectors.at(i, r);
            if (w == 0.0) continue;
            for (int j = 0; j < m.cols; ++j) row[j] += w * t.right_vectors.at(j, r);
        }
        const double* mrow = m.data.data() + static_cast<std::size_t>(i) * m.cols;
        for (int j = 0; j < m.cols; ++j) {
            const double d = mrow[j] - row[j];
            err2 += d * d;
        }
    }
    return std::sqrt(err2) / norm;
}

}  // namespace stackselect
