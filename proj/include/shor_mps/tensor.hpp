// Copyright 2026 The shor-mps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file tensor.hpp
 * Dense row-major matrices over real or complex doubles, and the two matrix
 * decompositions used to split contracted sites: the rank-revealing SVD and
 * the trivial (identity-padded) decomposition.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "shor_mps/error.hpp"

namespace shor_mps {

using Real = double;
using Complex = std::complex<double>;

enum class ScalarMode { real, complex };

template <class T> struct is_complex : std::false_type {};
template <class T> struct is_complex<std::complex<T>> : std::true_type {};

template <class T>
concept Scalar = std::is_same_v<T, Real> || std::is_same_v<T, Complex>;

template <Scalar T> inline constexpr ScalarMode scalar_mode_of = is_complex<T>::value ? ScalarMode::complex : ScalarMode::real;

/// Storage units per element: one 64-bit word for reals, two for complex.
template <Scalar T> inline constexpr std::size_t units_per_element = is_complex<T>::value ? 2 : 1;

inline const char *to_string(ScalarMode mode) { return mode == ScalarMode::real ? "real" : "complex"; }

template <Scalar T> using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <Scalar T> inline double abs2(T x) {
    if constexpr (is_complex<T>::value) {
        return std::norm(x);
    } else {
        return x * x;
    }
}

template <Scalar T> inline T conj(T x) {
    if constexpr (is_complex<T>::value) {
        return std::conj(x);
    } else {
        return x;
    }
}

/// Default relative floor below which singular values count as zero.
inline constexpr double kDefaultTruncation = 1e-12;

template <Scalar T> struct DecompResult {
    Matrix<T> left;
    /// Singular values, descending. Empty for the trivial decomposition.
    std::vector<double> weights;
    Matrix<T> right;
    std::size_t rank = 0;
};

/// Rank-revealing SVD: M = left * diag(weights) * right with the columns and
/// rows past the numerical rank dropped. A singular value counts when it exceeds
/// tol * sigma_max. Each left singular vector is rephased so that its
/// largest-magnitude entry is real and positive.
template <Scalar T> DecompResult<T> svd_truncated(const Matrix<T> &M, double tol = kDefaultTruncation) {
    const auto rows = static_cast<std::size_t>(M.rows());
    const auto cols = static_cast<std::size_t>(M.cols());
    if (rows == 0 || cols == 0) {
        throw InvalidArgument("svd_truncated: empty matrix");
    }
    if (!M.allFinite()) {
        throw DecompositionFailed(rows, cols, "non-finite input");
    }
    Eigen::BDCSVD<Matrix<T>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw DecompositionFailed(rows, cols, "SVD did not converge");
    }
    const auto &sigma = svd.singularValues();
    if (sigma.size() == 0 || !(sigma(0) > 0.0)) {
        throw InvalidArgument("svd_truncated: zero matrix has no rank");
    }
    const double floor = tol * sigma(0);
    std::size_t k = 0;
    while (k < static_cast<std::size_t>(sigma.size()) && sigma(static_cast<Eigen::Index>(k)) > floor) {
        ++k;
    }
    const auto kk = static_cast<Eigen::Index>(k);

    DecompResult<T> out;
    out.rank = k;
    out.left = svd.matrixU().leftCols(kk);
    out.right = svd.matrixV().leftCols(kk).adjoint();
    out.weights.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        out.weights[j] = sigma(static_cast<Eigen::Index>(j));
    }

    for (Eigen::Index j = 0; j < kk; ++j) {
        Eigen::Index best = 0;
        double best_mag = -1.0;
        for (Eigen::Index i = 0; i < out.left.rows(); ++i) {
            const double mag = std::abs(out.left(i, j));
            if (mag > best_mag * (1.0 + 1e-12)) {
                best_mag = mag;
                best = i;
            }
        }
        if (best_mag <= 0.0) {
            continue;
        }
        const T pivot = out.left(best, j);
        const T phase = pivot / static_cast<double>(std::abs(pivot));
        out.left.col(j) *= shor_mps::conj(phase);
        out.right.row(j) *= phase;
    }
    return out;
}

/// Identity-padded split. When rows >= cols the input becomes the left factor
/// and the right factor is the identity, otherwise the other way round. The
/// apparent rank is min(rows, cols).
template <Scalar T> DecompResult<T> trivial_decompose(const Matrix<T> &M) {
    DecompResult<T> out;
    if (M.rows() >= M.cols()) {
        out.left = M;
        out.right = Matrix<T>::Identity(M.cols(), M.cols());
        out.rank = static_cast<std::size_t>(M.cols());
    } else {
        out.left = Matrix<T>::Identity(M.rows(), M.rows());
        out.right = M;
        out.rank = static_cast<std::size_t>(M.rows());
    }
    return out;
}

template <Scalar T> Matrix<T> matmul(const Matrix<T> &a, const Matrix<T> &b) {
    if (a.cols() != b.rows()) {
        throw InvalidArgument("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                              std::to_string(b.rows()) + ")");
    }
    return a * b;
}

/// Reinterprets the row-major element sequence with new dimensions.
template <Scalar T> Matrix<T> reshape(const Matrix<T> &m, Eigen::Index rows, Eigen::Index cols) {
    if (rows * cols != m.size()) {
        throw InvalidArgument("reshape: element count mismatch");
    }
    return Eigen::Map<const Matrix<T>>(m.data(), rows, cols);
}

template <Scalar T> Matrix<T> transpose(const Matrix<T> &m) { return m.transpose(); }

/// Swaps the two physical factors of a combined index:
/// input rows are (left, d1, d2, right) flattened as (left*d1) x (d2*right),
/// output is (left*d2) x (d1*right) with the physical legs exchanged.
template <Scalar T>
Matrix<T> swap_physical(const Matrix<T> &m, Eigen::Index left, Eigen::Index d1, Eigen::Index d2, Eigen::Index right) {
    if (m.rows() != left * d1 || m.cols() != d2 * right) {
        throw InvalidArgument("swap_physical: dimension mismatch");
    }
    Matrix<T> out(left * d2, d1 * right);
    for (Eigen::Index a = 0; a < left; ++a) {
        for (Eigen::Index i = 0; i < d1; ++i) {
            for (Eigen::Index j = 0; j < d2; ++j) {
                for (Eigen::Index b = 0; b < right; ++b) {
                    out(a * d2 + j, i * right + b) = m(a * d1 + i, j * right + b);
                }
            }
        }
    }
    return out;
}

} // namespace shor_mps
