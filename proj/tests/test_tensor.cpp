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

#include <random>

#include <gtest/gtest.h>

#include "shor_mps/tensor.hpp"

using namespace shor_mps;

namespace {

template <Scalar T> Matrix<T> random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64 &g) {
    std::normal_distribution<double> n;
    Matrix<T> m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) {
            if constexpr (is_complex<T>::value) {
                m(i, j) = T(n(g), n(g));
            } else {
                m(i, j) = n(g);
            }
        }
    }
    return m;
}

template <Scalar T> Matrix<T> reconstruct(const DecompResult<T> &d) {
    Matrix<T> mid = d.left;
    for (std::size_t k = 0; k < d.weights.size(); ++k) {
        mid.col(static_cast<Eigen::Index>(k)) *= T(d.weights[k]);
    }
    return mid * d.right;
}

} // namespace

template <class T> class SvdTyped : public ::testing::Test {};
using ScalarTypes = ::testing::Types<Real, Complex>;
TYPED_TEST_SUITE(SvdTyped, ScalarTypes);

TYPED_TEST(SvdTyped, ReconstructsAndIsOrthonormal) {
    std::mt19937_64 g(5);
    for (auto [r, c] : {std::pair{5, 3}, std::pair{3, 7}, std::pair{6, 6}}) {
        const Matrix<TypeParam> M = random_matrix<TypeParam>(r, c, g);
        const auto d = svd_truncated<TypeParam>(M);
        EXPECT_EQ(d.rank, static_cast<std::size_t>(std::min(r, c)));
        EXPECT_LT((reconstruct(d) - M).cwiseAbs().maxCoeff(), 1e-12);
        const auto k = static_cast<Eigen::Index>(d.rank);
        EXPECT_LT((d.left.adjoint() * d.left - Matrix<TypeParam>::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((d.right * d.right.adjoint() - Matrix<TypeParam>::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_TRUE(std::is_sorted(d.weights.rbegin(), d.weights.rend()));
    }
}

TYPED_TEST(SvdTyped, TruncatesNumericalZeros) {
    std::mt19937_64 g(9);
    const Matrix<TypeParam> a = random_matrix<TypeParam>(8, 2, g);
    const Matrix<TypeParam> b = random_matrix<TypeParam>(2, 6, g);
    const auto d = svd_truncated<TypeParam>(a * b);
    EXPECT_EQ(d.rank, 2U);
    EXPECT_LT((reconstruct(d) - a * b).cwiseAbs().maxCoeff(), 1e-12);
}

TYPED_TEST(SvdTyped, LargestEntryOfEachLeftVectorIsRealPositive) {
    std::mt19937_64 g(11);
    const Matrix<TypeParam> M = random_matrix<TypeParam>(6, 4, g);
    const auto d = svd_truncated<TypeParam>(M);
    for (Eigen::Index j = 0; j < d.left.cols(); ++j) {
        Eigen::Index best;
        d.left.col(j).cwiseAbs().maxCoeff(&best);
        EXPECT_GT(std::real(d.left(best, j)), 0.0);
        EXPECT_NEAR(std::imag(Complex(d.left(best, j))), 0.0, 1e-15);
    }
    // Deterministic: decomposing twice gives identical factors.
    const auto d2 = svd_truncated<TypeParam>(M);
    EXPECT_EQ(d.left, d2.left);
    EXPECT_EQ(d.right, d2.right);
}

TEST(Svd, Errors) {
    EXPECT_THROW(svd_truncated<Real>(Matrix<Real>(0, 3)), InvalidArgument);
    EXPECT_THROW(svd_truncated<Real>(Matrix<Real>::Zero(3, 3)), InvalidArgument);
    Matrix<Real> bad = Matrix<Real>::Ones(2, 2);
    bad(0, 1) = std::nan("");
    try {
        svd_truncated<Real>(bad);
        FAIL() << "expected DecompositionFailed";
    } catch (const DecompositionFailed &e) {
        EXPECT_EQ(e.rows(), 2U);
        EXPECT_EQ(e.cols(), 2U);
    }
}

TEST(Svd, BellAmplitudes) {
    Matrix<Real> m(2, 2);
    m << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
    const auto d = svd_truncated<Real>(m);
    ASSERT_EQ(d.rank, 2U);
    EXPECT_NEAR(d.weights[0], 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(d.weights[1], 1 / std::sqrt(2.0), 1e-15);
}

TEST(TrivialDecompose, Shapes) {
    std::mt19937_64 g(3);
    const auto tall = random_matrix<Real>(6, 4, g);
    const auto d1 = trivial_decompose<Real>(tall);
    EXPECT_EQ(d1.rank, 4U);
    EXPECT_EQ(d1.left, tall);
    EXPECT_EQ(d1.right, (Matrix<Real>::Identity(4, 4)));
    const auto wide = random_matrix<Real>(3, 5, g);
    const auto d2 = trivial_decompose<Real>(wide);
    EXPECT_EQ(d2.rank, 3U);
    EXPECT_EQ(d2.left, (Matrix<Real>::Identity(3, 3)));
    EXPECT_EQ(d2.right, wide);
    EXPECT_TRUE(d1.weights.empty());
}

TEST(MatrixHelpers, MatmulReshapeTranspose) {
    Matrix<Real> a(2, 3);
    a << 1, 2, 3, 4, 5, 6;
    EXPECT_THROW(matmul<Real>(a, a), InvalidArgument);
    EXPECT_EQ(matmul<Real>(a, transpose<Real>(a))(0, 0), 14.0);
    const auto r = reshape<Real>(a, 3, 2);
    EXPECT_EQ(r(1, 0), 3.0);
    EXPECT_EQ(r(2, 1), 6.0);
    EXPECT_THROW(reshape<Real>(a, 4, 2), InvalidArgument);
}

TEST(MatrixHelpers, SwapPhysical) {
    // left = 1, d1 = 2, d2 = 3, right = 1: entry (i, j) moves to (j, i).
    Matrix<Real> m(2, 3);
    m << 0, 1, 2, 3, 4, 5;
    const auto s = swap_physical<Real>(m, 1, 2, 3, 1);
    ASSERT_EQ(s.rows(), 3);
    ASSERT_EQ(s.cols(), 2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 3; ++j) {
            EXPECT_EQ(s(j, i), m(i, j));
        }
    }
    EXPECT_THROW(swap_physical<Real>(m, 1, 3, 2, 1), InvalidArgument);
}

TEST(ScalarMode, UnitsPerElement) {
    EXPECT_EQ(units_per_element<Real>, 1U);
    EXPECT_EQ(units_per_element<Complex>, 2U);
    EXPECT_STREQ(to_string(ScalarMode::complex), "complex");
}
