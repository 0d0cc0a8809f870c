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

#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace stackselect {

/// Dense row-major matrix of doubles.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int rows, int cols);                             // zero-initialized
    Matrix(int rows, int cols, std::vector<double> values); // validates length

    double& at(int r, int c) {
        return data[static_cast<std::size_t>(r) * cols + c];
    }
    double at(int r, int c) const {
        return data[static_cast<std::size_t>(r) * cols + c];
    }
    std::size_t size() const { return data.size(); }
};

/// Top-r singular triplets of a matrix, singular values non-increasing,
/// factor columns orthonormal.
struct SvdTruncation {
    int rank = 0;
    std::vector<double> singular_values;
    Matrix left_vectors;   // m x rank
    Matrix right_vectors;  // n x rank
};

/// Rank-r truncated SVD via one-sided Jacobi rotations applied on the
/// smaller dimension. Deterministic; at most 60 sweeps.
SvdTruncation truncated_svd(const Matrix& m, int rank);

/// Dense reconstruction U diag(s) V^T of a truncation.
Matrix reconstruct(const SvdTruncation& t);

/// Relative Frobenius error ||M - U S V^T||_F / ||M||_F; 0 for a zero matrix.
double low_rank_error(const Matrix& m, const SvdTruncation& t);

double frobenius_norm(const Matrix& m);

/// Mode-n matricization of a 3-way tensor stored x-fastest, modes 1..3.
/// Mode-1 columns are indexed j = y + ny*z; modes 2 and 3 analogously.
Matrix unfold(const std::array<int, 3>& dims, const std::vector<double>& data, int mode);

/// Inverse of unfold for the same mode and dims.
std::vector<double> fold(const Matrix& m, const std::array<int, 3>& dims, int mode);

/// Column-wise Kronecker product: column j is a_j (x) b_j, row index i*q + k.
Matrix khatri_rao(const Matrix& a, const Matrix& b);

/// Minimizes ||A X - B||_F through the normal equations with a trace-scaled
/// Tikhonov ridge of 1e-10.
Matrix solve_least_squares(const Matrix& a, const Matrix& b);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

/// A^T A (cols x cols), exploiting symmetry.
Matrix gram(const Matrix& a);

/// Solves the SPD system (G + ridge_scale*mean(diag G)*I) X = rhs in place
/// via Cholesky. Shared by the least-squares path and the ALS updates.
Matrix cholesky_solve_spd(Matrix g, const Matrix& rhs, double ridge_scale);

}  // namespace stackselect
