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
 * @file oracle.hpp
 * Brute-force references for the order-finding circuit.
 *
 * The dense lower register is indexed by exponent: basis state j holds the
 * residue a^j mod N, j < r. Upper qubit q_k carries weight 2^k, and dense
 * amplitudes are ordered (q_{2l-1}, ..., q_0, R), so the flat index of
 * (x, j) is x * r + j.
 *
 * Residue rank oracle. After modular exponentiation the state is
 *
 *   2^{-l} sum_x |x> |a^x mod N>,  x = sum_k b_k 2^k.
 *
 * Split the upper qubits into J and its complement J'. Then a^x = a^{x_J} a^{x_J'},
 * and the state across J | (J' + R) is sum_{x_J} |x_J> |phi(a^{x_J})>, where
 * |phi(c)> = sum_{x_J'} |x_J'> |c a^{x_J'}>. Multiplication by c is a
 * permutation of residues, so phi(c) and phi(c') are equal when c = c' and
 * orthogonal otherwise (their R-components disagree for every x_J'). The
 * Schmidt rank across the cut is therefore the number of distinct residues
 * a^{x_J} mod N. A cut that puts R with J is the same cut seen from J'.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "shor_mps/error.hpp"
#include "shor_mps/numtheory.hpp"
#include "shor_mps/tensor.hpp"

namespace shor_mps {

inline constexpr std::uint64_t kDefaultDenseCap = std::uint64_t{1} << 26;

struct StateVector {
    std::vector<std::size_t> dims;
    std::vector<Complex> amplitudes;

    double norm() const {
        double n2 = 0.0;
        for (const auto &x : amplitudes) {
            n2 += std::norm(x);
        }
        return std::sqrt(n2);
    }
};

/// Probabilities indexed by s in [0, 2^(2l)).
using DistributionTable = std::vector<double>;

/// Residues a^j mod N for j = 0 .. r-1.
inline std::vector<u64> residue_orbit(u64 a, u64 N, u64 r) {
    std::vector<u64> out(r);
    u64 v = 1;
    for (u64 j = 0; j < r; ++j) {
        out[j] = v;
        v = mul_mod(v, a, N);
    }
    return out;
}

inline StateVector dense_modexp_state(const SemiprimeInstance &inst, std::uint64_t cap = kDefaultDenseCap) {
    const u64 r = multiplicative_order(inst.a, inst.N);
    const unsigned n = inst.upper_qubits();
    if (n >= 63 || (u64{1} << n) > cap / r) {
        throw CapExceeded("dense_modexp_state: 2^" + std::to_string(n) + " x " + std::to_string(r) +
                          " amplitudes exceed cap of " + std::to_string(cap));
    }
    const u64 upper = u64{1} << n;
    StateVector out;
    out.dims.assign(n, 2);
    out.dims.push_back(r);
    out.amplitudes.assign(upper * r, Complex(0.0));
    const double amp = std::ldexp(1.0, -static_cast<int>(inst.l));
    for (u64 x = 0; x < upper; ++x) {
        out.amplitudes[x * r + x % r] = amp;
    }
    return out;
}

/// Ideal output distribution with the j = 0 term count K = ceil(2^(2l) / r):
/// Pr(s) = |sum_{k<K} exp(2 pi i k r s / Q)|^2 / (Q K), Q = 2^(2l).
/// Evaluated in closed form with theta reduced exactly in integers.
inline DistributionTable exact_distribution(unsigned l, u64 r) {
    if (l == 0 || r == 0 || 2 * l > 40) {
        throw InvalidArgument("exact_distribution: need l >= 1, r >= 1 and 2l <= 40");
    }
    const u64 Q = u64{1} << (2 * l);
    const u64 K = (Q + r - 1) / r;
    DistributionTable out(Q);
    const double Kd = static_cast<double>(K);
    for (u64 s = 0; s < Q; ++s) {
        const u64 m = mul_mod(r % Q, s, Q);
        if (m == 0) {
            out[s] = Kd * Kd / (static_cast<double>(Q) * Kd);
            continue;
        }
        const double half = M_PI * static_cast<double>(m) / static_cast<double>(Q);
        const double num = std::sin(Kd * half);
        const double den = std::sin(half);
        out[s] = num * num / (den * den) / (static_cast<double>(Q) * Kd);
    }
    return out;
}

/// Output distribution conditioned on lower-register outcome a^j:
/// the sum runs over x = j + k r < Q.
inline DistributionTable conditional_distribution(unsigned l, u64 r, u64 j) {
    const u64 Q = u64{1} << (2 * l);
    if (j >= r || j >= Q) {
        throw InvalidArgument("conditional_distribution: need j < r and j < 2^(2l)");
    }
    const u64 K = (Q - j + r - 1) / r;
    DistributionTable out(Q);
    const double Kd = static_cast<double>(K);
    for (u64 s = 0; s < Q; ++s) {
        const u64 m = mul_mod(r % Q, s, Q);
        if (m == 0) {
            out[s] = Kd / static_cast<double>(Q);
            continue;
        }
        const double half = M_PI * static_cast<double>(m) / static_cast<double>(Q);
        const double num = std::sin(Kd * half);
        const double den = std::sin(half);
        out[s] = num * num / (den * den) / (static_cast<double>(Q) * Kd);
    }
    return out;
}

/// True output distribution of the circuit: the conditional distributions
/// mixed with weights K_j / Q.
inline DistributionTable mixture_distribution(unsigned l, u64 r) {
    const u64 Q = u64{1} << (2 * l);
    DistributionTable out(Q, 0.0);
    for (u64 j = 0; j < std::min(r, Q); ++j) {
        const u64 K = (Q - j + r - 1) / r;
        const double w = static_cast<double>(K) / static_cast<double>(Q);
        const auto cond = conditional_distribution(l, r, j);
        for (u64 s = 0; s < Q; ++s) {
            out[s] += w * cond[s];
        }
    }
    return out;
}

/// Rank of the amplitude matrix with the qudits in `cut` as rows.
inline std::size_t dense_schmidt_rank(const StateVector &state, std::span<const std::size_t> cut,
                                      std::uint64_t cap = kDefaultDenseCap) {
    if (state.amplitudes.size() > cap) {
        throw CapExceeded("dense_schmidt_rank: state exceeds cap");
    }
    const std::size_t n = state.dims.size();
    std::vector<char> in_cut(n, 0);
    for (std::size_t c : cut) {
        if (c >= n) {
            throw InvalidArgument("dense_schmidt_rank: cut index out of range");
        }
        in_cut[c] = 1;
    }
    std::size_t rows = 1;
    std::size_t cols = 1;
    for (std::size_t k = 0; k < n; ++k) {
        (in_cut[k] ? rows : cols) *= state.dims[k];
    }
    Matrix<Complex> M = Matrix<Complex>::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::vector<std::size_t> digits(n, 0);
    for (std::size_t flat = 0; flat < state.amplitudes.size(); ++flat) {
        std::size_t row = 0;
        std::size_t col = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (in_cut[k]) {
                row = row * state.dims[k] + digits[k];
            } else {
                col = col * state.dims[k] + digits[k];
            }
        }
        M(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = state.amplitudes[flat];
        for (std::size_t k = n; k-- > 0;) {
            if (++digits[k] < state.dims[k]) {
                break;
            }
            digits[k] = 0;
        }
    }
    Eigen::BDCSVD<Matrix<Complex>> svd(M);
    const auto &sigma = svd.singularValues();
    if (sigma.size() == 0 || sigma(0) == 0.0) {
        return 0;
    }
    std::size_t rank = 0;
    for (Eigen::Index k = 0; k < sigma.size(); ++k) {
        if (sigma(k) > 1e-10 * sigma(0)) {
            ++rank;
        }
    }
    return rank;
}

/// Number of distinct residues a^(x_J) mod N, x_J ranging over the bit
/// assignments of upper qubits J. With include_R the cut is J + R versus the
/// rest, which has the rank of the complementary qubit set.
inline std::size_t residue_rank_oracle(const SemiprimeInstance &inst, std::span<const unsigned> J, bool include_R) {
    const unsigned n = inst.upper_qubits();
    std::vector<unsigned> qubits;
    if (include_R) {
        std::vector<char> in_j(n, 0);
        for (unsigned j : J) {
            if (j >= n) {
                throw InvalidArgument("residue_rank_oracle: qubit index out of range");
            }
            in_j[j] = 1;
        }
        for (unsigned k = 0; k < n; ++k) {
            if (!in_j[k]) {
                qubits.push_back(k);
            }
        }
    } else {
        qubits.assign(J.begin(), J.end());
    }
    const u64 r = multiplicative_order(inst.a, inst.N);
    std::unordered_set<u64> seen{1};
    std::vector<u64> members{1};
    for (unsigned k : qubits) {
        if (k >= n) {
            throw InvalidArgument("residue_rank_oracle: qubit index out of range");
        }
        if (members.size() == r) {
            break;
        }
        const u64 mult = mod_pow(inst.a, u64{1} << k, inst.N);
        const std::size_t current = members.size();
        for (std::size_t t = 0; t < current; ++t) {
            const u64 v = mul_mod(members[t], mult, inst.N);
            if (seen.insert(v).second) {
                members.push_back(v);
            }
        }
    }
    return members.size();
}

/// Half the L1 distance between p and the normalized counts.
inline double tvd(std::span<const double> p, std::span<const u64> counts) {
    if (p.size() != counts.size()) {
        throw InvalidArgument("tvd: support sizes differ");
    }
    const u64 total = std::accumulate(counts.begin(), counts.end(), u64{0});
    if (total == 0) {
        throw InvalidArgument("tvd: empty counts");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        acc += std::abs(p[k] - static_cast<double>(counts[k]) / static_cast<double>(total));
    }
    return 0.5 * acc;
}

} // namespace shor_mps
