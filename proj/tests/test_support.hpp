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

// Dense state-vector references used as independent oracles in tests.

#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "shor_mps/mps.hpp"

namespace shor_mps::testing {

using CVec = std::vector<Complex>;

/// Applies a d x d gate to qudit `site` of a dense vector with the given dims
/// (site 0 most significant).
inline CVec dense_apply_1(const CVec &psi, const std::vector<std::size_t> &dims, std::size_t site,
                          const Matrix<Complex> &g) {
    std::size_t inner = 1;
    for (std::size_t k = site + 1; k < dims.size(); ++k) {
        inner *= dims[k];
    }
    const std::size_t d = dims[site];
    const std::size_t outer = psi.size() / (inner * d);
    CVec out(psi.size(), Complex(0.0));
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                const Complex gij = g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                for (std::size_t t = 0; t < inner; ++t) {
                    out[(o * d + i) * inner + t] += gij * psi[(o * d + j) * inner + t];
                }
            }
        }
    }
    return out;
}

/// Applies a gate on the combined index of adjacent qudits (site, site+1).
inline CVec dense_apply_2(const CVec &psi, const std::vector<std::size_t> &dims, std::size_t site,
                          const Matrix<Complex> &g) {
    std::vector<std::size_t> merged;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (k == site) {
            merged.push_back(dims[k] * dims[k + 1]);
            ++k;
        } else {
            merged.push_back(dims[k]);
        }
    }
    return dense_apply_1(psi, merged, site, g);
}

/// Singular values of the (sites < cut) x (sites >= cut) amplitude matrix.
inline std::vector<double> dense_bipartition_sv(const CVec &psi, const std::vector<std::size_t> &dims,
                                                std::size_t cut) {
    std::size_t rows = 1;
    for (std::size_t k = 0; k < cut; ++k) {
        rows *= dims[k];
    }
    const std::size_t cols = psi.size() / rows;
    Matrix<Complex> M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t x = 0; x < psi.size(); ++x) {
        M(static_cast<Eigen::Index>(x / cols), static_cast<Eigen::Index>(x % cols)) = psi[x];
    }
    Eigen::JacobiSVD<Matrix<Complex>> svd(M);
    std::vector<double> out;
    for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
        out.push_back(svd.singularValues()(k));
    }
    return out;
}

/// Reduced density matrix of qudit `site` by explicit partial trace.
inline Matrix<Complex> dense_partial_trace(const CVec &psi, const std::vector<std::size_t> &dims, std::size_t site) {
    std::size_t inner = 1;
    for (std::size_t k = site + 1; k < dims.size(); ++k) {
        inner *= dims[k];
    }
    const std::size_t d = dims[site];
    const std::size_t outer = psi.size() / (inner * d);
    Matrix<Complex> rho = Matrix<Complex>::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t t = 0; t < inner; ++t) {
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                        psi[(o * d + i) * inner + t] * std::conj(psi[(o * d + j) * inner + t]);
                }
            }
        }
    }
    return rho;
}

/// Haar-ish random unitary from the QR decomposition of a Gaussian matrix.
template <class Gen> Matrix<Complex> random_unitary(std::size_t d, Gen &gen, bool real_only = false) {
    std::normal_distribution<double> normal;
    Matrix<Complex> A(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            A(i, j) = Complex(normal(gen), real_only ? 0.0 : normal(gen));
        }
    }
    Eigen::HouseholderQR<Matrix<Complex>> qr(A);
    Matrix<Complex> Q = qr.householderQ();
    return Q;
}

struct RandomCircuitState {
    MpsState mps;
    CVec dense;
    std::vector<std::size_t> dims;
};

/// Random brickwork circuit on n qubits, applied to both an MPS and a dense vector.
template <class Gen> RandomCircuitState random_circuit_state(std::size_t n, std::size_t layers, Gen &gen) {
    RandomCircuitState out;
    out.dims.assign(n, 2);
    std::vector<std::size_t> zeros(n, 0);
    out.mps = MpsState::product_state(out.dims, zeros, ScalarMode::complex);
    out.dense.assign(std::size_t{1} << n, Complex(0.0));
    out.dense[0] = 1.0;
    for (std::size_t layer = 0; layer < layers; ++layer) {
        for (std::size_t m = 0; m < n; ++m) {
            const auto u = random_unitary(2, gen);
            out.mps.apply_single_qudit_gate(m, Gate(u));
            out.dense = dense_apply_1(out.dense, out.dims, m, u);
        }
        for (std::size_t m = layer % 2; m + 1 < n; m += 2) {
            const auto u = random_unitary(4, gen);
            out.mps.apply_two_site_gate(m, Gate(u));
            out.dense = dense_apply_2(out.dense, out.dims, m, u);
        }
    }
    return out;
}

inline double max_abs_diff(const CVec &a, const CVec &b) {
    double e = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        e = std::max(e, std::abs(a[k] - b[k]));
    }
    return a.size() == b.size() ? e : INFINITY;
}

/// Multiplicative order by plain iteration, independent of the library.
inline std::uint64_t naive_order(std::uint64_t a, std::uint64_t N) {
    std::uint64_t v = a % N;
    std::uint64_t r = 1;
    while (v != 1) {
        v = v * a % N;
        ++r;
    }
    return r;
}

/// Output distribution by direct summation over k, the brute-force route.
inline std::vector<double> direct_sum_distribution(unsigned l, std::uint64_t r) {
    const std::uint64_t Q = std::uint64_t{1} << (2 * l);
    const std::uint64_t K = (Q + r - 1) / r;
    std::vector<double> p(Q);
    double total = 0.0;
    for (std::uint64_t s = 0; s < Q; ++s) {
        Complex acc = 0.0;
        for (std::uint64_t k = 0; k < K; ++k) {
            const std::uint64_t phase = (k * r % Q) * s % Q;
            acc += std::polar(1.0, 2.0 * M_PI * static_cast<double>(phase) / static_cast<double>(Q));
        }
        p[s] = std::norm(acc);
        total += p[s];
    }
    for (auto &x : p) {
        x /= total;
    }
    return p;
}

} // namespace shor_mps::testing
