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

#include "stackselect/cpd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stackselect/error.hpp"
#include "stackselect/rng.hpp"

namespace stackselect {

namespace {

double tensor_norm(const Volume& x) {
    double acc = 0.0;
    for (double v : x.data) {
        if (!std::isfinite(v)) fail(ErrorCode::InvalidVolume, "tensor entries must be finite");
        acc += v * v;
    }
    return std::sqrt(acc);
}

// r x dim transposed copy so rank-one accumulation runs along contiguous rows.
Matrix transposed_factor(const Matrix& f) { return transpose(f); }

// ||X - [[A,B,C]]||_F with weights folded into the factors, streamed in
// x-rows so X' is never materialized.
double rel_error_raw(const Volume& x, const Matrix& a, const Matrix& b, const Matrix& c,
                     double xnorm) {
    const int ni = a.rows, nj = b.rows, nk = c.rows, r = a.cols;
    const Matrix at = transposed_factor(a);
    std::vector<double> row(ni);
    double err2 = 0.0;
    std::size_t src = 0;
    for (int z = 0; z < nk; ++z) {
        for (int y = 0; y < nj; ++y) {
            std::fill(row.begin(), row.end(), 0.0);
            for (int p = 0; p < r; ++p) {
                const double w = c.at(z, p) * b.at(y, p);
                if (w == 0.0) continue;
                const double* acol = at.data.data() + static_cast<std::size_t>(p) * ni;
                for (int i = 0; i < ni; ++i) row[i] += w * acol[i];
            }
            for (int i = 0; i < ni; ++i, ++src) {
                const double d = x.data[src] - row[i];
                err2 += d * d;
            }
        }
    }
    return std::sqrt(err2) / xnorm;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    Matrix out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
    return out;
}

// Matricized-tensor-times-Khatri-Rao, slice by slice: the companion matrix is
// never materialized and every pass streams the tensor once while the factor
// panels stay cache-resident.
//
// Mode 0:  out(i,p) = sum_k C(k,p) * sum_j X(i,j,k) B(j,p)
void mttkrp_mode0(const Volume& x, const Matrix& b, const Matrix& c, Matrix& out,
                  std::vector<double>& w) {
    const auto [ni, nj, nk] = x.dims;
    const int r = b.cols;
    std::fill(out.data.begin(), out.data.end(), 0.0);
    w.assign(static_cast<std::size_t>(ni) * r, 0.0);
    for (int k = 0; k < nk; ++k) {
        std::fill(w.begin(), w.end(), 0.0);
        for (int j = 0; j < nj; ++j) {
            const double* xrow =
                x.data.data() + static_cast<std::size_t>(ni) * (j + static_cast<std::size_t>(nj) * k);
            const double* brow = b.data.data() + static_cast<std::size_t>(j) * r;
            for (int i = 0; i < ni; ++i) {
                const double xv = xrow[i];
                if (xv == 0.0) continue;
                double* wrow = w.data() + static_cast<std::size_t>(i) * r;
                for (int p = 0; p < r; ++p) wrow[p] += xv * brow[p];
            }
        }
        const double* crow = c.data.data() + static_cast<std::size_t>(k) * r;
        for (int i = 0; i < ni; ++i) {
            const double* wrow = w.data() + static_cast<std::size_t>(i) * r;
            double* orow = out.data.data() + static_cast<std::size_t>(i) * r;
            for (int p = 0; p < r; ++p) orow[p] += crow[p] * wrow[p];
        }
    }
}

// Mode 1:  out(j,p) = sum_k C(k,p) * V(k,j,p)  with  V(k,j,p) = sum_i X(i,j,k) A(i,p).
// V depends only on the mode-0 factor, which is final for the iteration by the
// time this runs, so it is cached for the mode-2 product below.
void mttkrp_mode1(const Volume& x, const Matrix& a, const Matrix& c, Matrix& out,
                  std::vector<double>& v) {
    const auto [ni, nj, nk] = x.dims;
    const int r = a.cols;
    const Matrix at = transpose(a);
    std::fill(out.data.begin(), out.data.end(), 0.0);
    v.assign(static_cast<std::size_t>(nk) * nj * r, 0.0);
    for (int k = 0; k < nk; ++k) {
        const double* crow = c.data.data() + static_cast<std::size_t>(k) * r;
        for (int j = 0; j < nj; ++j) {
            const double* xrow =
                x.data.data() + static_cast<std::size_t>(ni) * (j + static_cast<std::size_t>(nj) * k);
            double* vrow = v.data() + (static_cast<std::size_t>(k) * nj + j) * r;
            double* orow = out.data.data() + static_cast<std::size_t>(j) * r;
            for (int p = 0; p < r; ++p) {
                const double* acol = at.data.data() + static_cast<std::size_t>(p) * ni;
                double s = 0.0;
                for (int i = 0; i < ni; ++i) s += xrow[i] * acol[i];
                vrow[p] = s;
                orow[p] += crow[p] * s;
            }
        }
    }
}

// Mode 2:  out(k,p) = sum_j B(j,p) * V(k,j,p), reusing the cached V.
void mttkrp_mode2(const std::vector<double>& v, const Matrix& b, int nk, Matrix& out) {
    const int nj = b.rows, r = b.cols;
    std::fill(out.data.begin(), out.data.end(), 0.0);
    for (int k = 0; k < nk; ++k) {
        double* orow = out.data.data() + static_cast<std::size_t>(k) * r;
        for (int j = 0; j < nj; ++j) {
            const double* vrow = v.data() + (static_cast<std::size_t>(k) * nj + j) * r;
            const double* brow = b.data.data() + static_cast<std::size_t>(j) * r;
            for (int p = 0; p < r; ++p) orow[p] += brow[p] * vrow[p];
        }
    }
}

double hadamard_total(const Matrix& a, const Matrix& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
    return acc;
}

void fill_random_columns(Matrix& f, int first_col, SplitMix& rng) {
    for (int i = 0; i < f.rows; ++i)
        for (int j = first_col; j < f.cols; ++j) f.at(i, j) = rng.next_unit();
}

CpResult cp_als_impl(const Volume& x, const AlsConfig& cfg, const CPModel* warm) {
    if (cfg.rank < 1) fail(ErrorCode::InvalidParameter, "rank must be positive");
    if (cfg.max_iterations < 0) fail(ErrorCode::InvalidParameter, "max_iterations must be non-negative");
    if (!(cfg.fit_tolerance > 0.0)) fail(ErrorCode::InvalidParameter, "fit_tolerance must be positive");
    const auto [ni, nj, nk] = x.dims;
    const std::array<std::int64_t, 3> other{static_cast<std::int64_t>(nj) * nk,
                                            static_cast<std::int64_t>(ni) * nk,
                                            static_cast<std::int64_t>(ni) * nj};
    if (cfg.rank > std::min({other[0], other[1], other[2]}))
        fail(ErrorCode::RankTooLarge, "rank exceeds the smallest unfolding width");

    const double xnorm = tensor_norm(x);
    if (xnorm == 0.0) fail(ErrorCode::DegenerateTensor, "zero tensor has no decomposition");
    const double xnorm2 = xnorm * xnorm;

    const int r = cfg.rank;
    const std::array<int, 3> dims = x.dims;
    std::array<Matrix, 3> f{Matrix(ni, r), Matrix(nj, r), Matrix(nk, r)};

    int warm_cols = 0;
    if (warm != nullptr) {
        if (warm->rank > r) fail(ErrorCode::RankTooLarge, "warm start has more columns than the target rank");
        for (int m = 0; m < 3; ++m) {
            if (warm->factors[m].rows != dims[m])
                fail(ErrorCode::ShapeMismatch, "warm start factor shape does not match the tensor");
        }
        warm_cols = warm->rank;
        for (int m = 0; m < 3; ++m)
            for (int i = 0; i < dims[m]; ++i)
                for (int j = 0; j < warm_cols; ++j) {
                    // weights folded into the first mode
                    const double scale = (m == 0) ? warm->weights[j] : 1.0;
                    f[m].at(i, j) = warm->factors[m].at(i, j) * scale;
                }
    }

    SplitMix rng(mix_seed(static_cast<std::uint64_t>(cfg.init_seed), 0x63705f696e6974ULL));  // "cp_init"
    if (warm != nullptr) {
        for (int m = 0; m < 3; ++m) fill_random_columns(f[m], warm_cols, rng);
    } else if (cfg.init_scheme == CpInit::RandomUniform) {
        for (int m = 0; m < 3; ++m) fill_random_columns(f[m], 0, rng);
    } else {
        for (int m = 0; m < 3; ++m) {
            const Matrix unf = unfold(dims, x.data, m + 1);
            const int lead = std::min<int>(r, std::min<std::int64_t>(unf.rows, unf.cols));
            const SvdTruncation t = truncated_svd(unf, lead);
            for (int i = 0; i < dims[m]; ++i)
                for (int j = 0; j < lead; ++j) f[m].at(i, j) = t.left_vectors.at(i, j);
            fill_random_columns(f[m], lead, rng);
        }
    }

    const auto gram_for_mode = [&](int m) {
        if (m == 0) return hadamard(gram(f[1]), gram(f[2]));
        if (m == 1) return hadamard(gram(f[0]), gram(f[2]));
        return hadamard(gram(f[0]), gram(f[1]));
    };
    // fit = 1 - relative error, from the norm identity
    // ||X - X'||^2 = ||X||^2 - 2<X, X'> + ||X'||^2 with <X, X'> read off the
    // last mode-3 MTTKRP. Near-exact fits fall back to the streamed error to
    // dodge cancellation.
    const auto fit_from = [&](const Matrix& mttkrp3) {
        const double inner = hadamard_total(f[2], mttkrp3);
        const double model2 = hadamard_total(gram_for_mode(2), gram(f[2]));
        double rel2 = (xnorm2 - 2.0 * inner + model2) / xnorm2;
        double rel;
        if (rel2 < 1e-10) {
            rel = rel_error_raw(x, f[0], f[1], f[2], xnorm);
        } else {
            rel = std::sqrt(rel2);
        }
        return 1.0 - rel;
    };

    std::vector<double> w_scratch;
    std::vector<double> v_cache;
    Matrix m0(ni, r), m1(nj, r), m2(nk, r);

    CpResult result;
    {
        mttkrp_mode1(x, f[0], f[2], m1, v_cache);
        mttkrp_mode2(v_cache, f[1], nk, m2);
        result.fit_history.push_back(fit_from(m2));
    }
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        mttkrp_mode0(x, f[1], f[2], m0, w_scratch);
        f[0] = transpose(cholesky_solve_spd(gram_for_mode(0), transpose(m0), 1e-10));
        mttkrp_mode1(x, f[0], f[2], m1, v_cache);
        f[1] = transpose(cholesky_solve_spd(gram_for_mode(1), transpose(m1), 1e-10));
        mttkrp_mode2(v_cache, f[1], nk, m2);
        f[2] = transpose(cholesky_solve_spd(gram_for_mode(2), transpose(m2), 1e-10));
        const double fit = fit_from(m2);
        const double prev = result.fit_history.back();
        result.fit_history.push_back(fit);
        if (std::abs(fit - prev) < cfg.fit_tolerance) break;
    }

    // Canonical form: unit columns, weights = products of the column norms,
    // A-column signs fixed by the largest-magnitude entry, stable sort by
    // weight with index ties.
    CPModel& model = result.model;
    model.rank = r;
    model.weights.assign(r, 0.0);
    model.factors = {Matrix(ni, r), Matrix(nj, r), Matrix(nk, r)};
    std::vector<double> weights(r);
    for (int j = 0; j < r; ++j) {
        double w = 1.0;
        for (int m = 0; m < 3; ++m) {
            double n2 = 0.0;
            for (int i = 0; i < dims[m]; ++i) n2 += f[m].at(i, j) * f[m].at(i, j);
            const double n = std::sqrt(n2);
            w *= n;
            if (n > 0.0) {
                const double inv = 1.0 / n;
                for (int i = 0; i < dims[m]; ++i) f[m].at(i, j) *= inv;
            } else {
                for (int i = 0; i < dims[m]; ++i) f[m].at(i, j) = (i == 0) ? 1.0 : 0.0;
                w = 0.0;
            }
        }
        weights[j] = w;
        int arg = 0;
        double best = -1.0;
        for (int i = 0; i < ni; ++i) {
            const double v = std::abs(f[0].at(i, j));
            if (v > best) {
                best = v;
                arg = i;
            }
        }
        if (f[0].at(arg, j) < 0.0) {
            for (int i = 0; i < ni; ++i) f[0].at(i, j) = -f[0].at(i, j);
            for (int i = 0; i < nj; ++i) f[1].at(i, j) = -f[1].at(i, j);
        }
    }
    std::vector<int> order(r);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return weights[a] > weights[b]; });
    for (int jj = 0; jj < r; ++jj) {
        const int j = order[jj];
        model.weights[jj] = weights[j];
        for (int m = 0; m < 3; ++m)
            for (int i = 0; i < dims[m]; ++i) model.factors[m].at(i, jj) = f[m].at(i, j);
    }
    return result;
}

}  // namespace

CpResult cp_als(const Volume& x, const AlsConfig& cfg) { return cp_als_impl(x, cfg, nullptr); }

CpResult cp_als(const Volume& x, const AlsConfig& cfg, const CPModel& init) {
    return cp_als_impl(x, cfg, &init);
}

Volume cp_reconstruct(const CPModel& m) {
    const int ni = m.factors[0].rows, nj = m.factors[1].rows, nk = m.factors[2].rows;
    if (ni <= 0 || nj <= 0 || nk <= 0) fail(ErrorCode::InvalidVolume, "model has empty factors");
    Volume out({ni, nj, nk}, {1.0, 1.0, 1.0}, Orientation::Isotropic);
    const Matrix at = transpose(m.factors[0]);
    std::size_t dst = 0;
    for (int z = 0; z < nk; ++z)
        for (int y = 0; y < nj; ++y) {
            double* row = out.data.data() + dst;
            for (int p = 0; p < m.rank; ++p) {
                const double w = m.weights[p] * m.factors[2].at(z, p) * m.factors[1].at(y, p);
                if (w == 0.0) continue;
                const double* acol = at.data.data() + static_cast<std::size_t>(p) * ni;
                for (int i = 0; i < ni; ++i) row[i] += w * acol[i];
            }
            dst += static_cast<std::size_t>(ni);
        }
    return out;
}

double cp_relative_error(const Volume& x, const CPModel& m) {
    if (x.dims[0] != m.factors[0].rows || x.dims[1] != m.factors[1].rows ||
        x.dims[2] != m.factors[2].rows)
        fail(ErrorCode::ShapeMismatch, "model shape does not match the tensor");
    const double xnorm = tensor_norm(x);
    if (xnorm == 0.0) fail(ErrorCode::DegenerateTensor, "zero tensor has no relative error");

    // Fold the weights into the first factor, then stream.
    Matrix a = m.factors[0];
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) a.at(i, j) *= m.weights[j];
    return rel_error_raw(x, a, m.factors[1], m.factors[2], xnorm);
}

}  // namespace stackselect
