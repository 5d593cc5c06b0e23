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

//=========================================================================
// Matrix product state in Gamma-lambda form
//=========================================================================
// A state of n qudits is stored as site tensors Gamma[m](a, i, b) and bond
// weight vectors lambda[m] sitting between site m and m+1:
//
//   psi(i_1 .. i_n) = Gamma[1](i_1) lambda[1] Gamma[2](i_2) ... Gamma[n](i_n)
//
// The boundary bonds have dimension 1 and implicit weight 1. Two-site updates
// absorb the interior and flanking weights, decompose, and divide the flanking
// weights back out, so the network contraction is exact whether or not the
// state is in canonical form.
//
// Each site carries two orthonormality flags:
//   left-normal:  sum_{a,i} lambda[m-1]_a^2 conj(G(a,i,b)) G(a,i,b') = delta(b,b')
//   right-normal: sum_{i,b} G(a,i,b) lambda[m]_b^2 conj(G(a',i,b))   = delta(a,a')
// A site's flags depend only on its own tensor and adjacent weights, so an
// operation only needs to update the flags of the sites it rewrites. Reduced
// density matrices can be read locally at site m whenever every site left of m
// is left-normal and every site right of m is right-normal.
//--------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "shor_mps/error.hpp"
#include "shor_mps/tensor.hpp"

namespace shor_mps {

using Rng = std::mt19937_64;

/// Logical identity of the qudit stored at a site.
struct SiteLabel {
    enum class Kind : std::uint8_t { generic, upper, lower };

    Kind kind = Kind::generic;
    std::uint32_t index = 0;

    static SiteLabel generic(std::uint32_t i) { return {Kind::generic, i}; }
    static SiteLabel upper(std::uint32_t i) { return {Kind::upper, i}; }
    static SiteLabel lower() { return {Kind::lower, 0}; }

    std::string str() const {
        switch (kind) {
        case Kind::upper:
            return "q" + std::to_string(index);
        case Kind::lower:
            return "R";
        default:
            return "s" + std::to_string(index);
        }
    }

    static SiteLabel parse(const std::string &text) {
        if (text == "R") {
            return lower();
        }
        if (text.size() < 2 || (text[0] != 'q' && text[0] != 's')) {
            throw InvalidArgument("bad site label '" + text + "'");
        }
        const auto idx = static_cast<std::uint32_t>(std::stoul(text.substr(1)));
        return text[0] == 'q' ? upper(idx) : generic(idx);
    }

    friend bool operator==(const SiteLabel &, const SiteLabel &) = default;
};

using LabelGroup = std::vector<SiteLabel>;

inline std::string to_string(const LabelGroup &group) {
    std::string out;
    for (std::size_t k = 0; k < group.size(); ++k) {
        if (k) {
            out += '+';
        }
        out += group[k].str();
    }
    return out;
}

/// Three-index site tensor, row-major over (left, physical, right).
template <Scalar T> struct SiteTensor {
    std::size_t left = 1;
    std::size_t phys = 1;
    std::size_t right = 1;
    std::vector<T> data;

    SiteTensor() : data(1, T(0)) {}
    SiteTensor(std::size_t l, std::size_t d, std::size_t r) : left(l), phys(d), right(r), data(l * d * r, T(0)) {
        if (l == 0 || d == 0 || r == 0) {
            throw InvalidArgument("site tensor dimensions must be positive");
        }
    }

    std::size_t size() const { return data.size(); }
    T &operator()(std::size_t a, std::size_t i, std::size_t b) { return data[(a * phys + i) * right + b]; }
    const T &operator()(std::size_t a, std::size_t i, std::size_t b) const { return data[(a * phys + i) * right + b]; }

    /// (left*phys) x right view.
    Eigen::Map<const Matrix<T>> left_grouped() const {
        return {data.data(), static_cast<Eigen::Index>(left * phys), static_cast<Eigen::Index>(right)};
    }
    /// left x (phys*right) view.
    Eigen::Map<const Matrix<T>> right_grouped() const {
        return {data.data(), static_cast<Eigen::Index>(left), static_cast<Eigen::Index>(phys * right)};
    }
    /// left x right slice for physical index i.
    Matrix<T> slice(std::size_t i) const {
        Matrix<T> out(left, right);
        for (std::size_t a = 0; a < left; ++a) {
            for (std::size_t b = 0; b < right; ++b) {
                out(a, b) = (*this)(a, i, b);
            }
        }
        return out;
    }

    static SiteTensor from_matrix(const Matrix<T> &m, std::size_t l, std::size_t d, std::size_t r) {
        if (static_cast<std::size_t>(m.size()) != l * d * r) {
            throw InvalidArgument("site tensor reshape: element count mismatch");
        }
        SiteTensor out(l, d, r);
        std::copy(m.data(), m.data() + m.size(), out.data.begin());
        return out;
    }

    friend bool operator==(const SiteTensor &, const SiteTensor &) = default;
};

/// Per-bond Schmidt ranks captured at a named point of a computation.
struct RankProfile {
    std::string stage;
    std::vector<std::size_t> ranks;
    std::vector<std::string> layout;
};

enum class Direction { right, left };

enum class Decomposition {
    svd,
    trivial,
    /// Trivial split whose identity factor is scaled to be right-normal; the
    /// new bond weights are the right flank weights divided by sqrt(d_right).
    trivial_right_normal,
};

/// A validated unitary. Unitarity is checked once, at construction.
class Gate {
  public:
    explicit Gate(Matrix<Complex> m, double tol = 1e-10) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0) {
            throw InvalidArgument("gate must be a nonempty square matrix");
        }
        const Matrix<Complex> id = Matrix<Complex>::Identity(m_.rows(), m_.cols());
        if ((m_.adjoint() * m_ - id).cwiseAbs().maxCoeff() > tol) {
            throw InvalidArgument("gate is not unitary");
        }
        real_ = m_.imag().cwiseAbs().maxCoeff() == 0.0;
    }

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    bool is_real() const { return real_; }
    const Matrix<Complex> &matrix() const { return m_; }

    template <Scalar T> Matrix<T> as() const {
        if constexpr (is_complex<T>::value) {
            return m_;
        } else {
            if (!real_) {
                throw InvalidState("complex gate applied to a real-mode state");
            }
            return m_.real();
        }
    }

    static Gate identity(std::size_t d) { return Gate(Matrix<Complex>::Identity(d, d)); }

    static Gate hadamard() {
        const double h = 1.0 / std::sqrt(2.0);
        Matrix<Complex> m(2, 2);
        m << h, h, h, -h;
        return Gate(m);
    }

    /// |1> -> exp(-i pi / 2^x) |1>.
    static Gate phase(unsigned x) {
        Matrix<Complex> m = Matrix<Complex>::Identity(2, 2);
        m(1, 1) = std::polar(1.0, -M_PI / std::ldexp(1.0, static_cast<int>(x)));
        return Gate(m);
    }

    static Gate cnot() {
        Matrix<Complex> m = Matrix<Complex>::Zero(4, 4);
        m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
        return Gate(m);
    }

    static Gate swap(std::size_t d1, std::size_t d2) {
        const std::size_t n = d1 * d2;
        Matrix<Complex> m = Matrix<Complex>::Zero(n, n);
        for (std::size_t i = 0; i < d1; ++i) {
            for (std::size_t j = 0; j < d2; ++j) {
                m(j * d1 + i, i * d2 + j) = 1.0;
            }
        }
        return Gate(m);
    }

    /// Controlled phase exp(-i pi / 2^x) on |11>.
    static Gate controlled_phase(unsigned x) {
        Matrix<Complex> m = Matrix<Complex>::Identity(4, 4);
        m(3, 3) = std::polar(1.0, -M_PI / std::ldexp(1.0, static_cast<int>(x)));
        return Gate(m);
    }

    /// Controlled phase followed by a swap of the two qubits, as one gate.
    static Gate controlled_phase_swap(unsigned x) {
        return Gate(swap(2, 2).matrix() * controlled_phase(x).matrix());
    }

  private:
    Matrix<Complex> m_;
    bool real_ = true;
};

template <Scalar T> class BasicMps {
  public:
    using value_type = T;

    BasicMps() = default;

    /// Product of computational basis states.
    static BasicMps product_state(std::span<const std::size_t> dims, std::span<const std::size_t> values) {
        if (dims.size() != values.size() || dims.empty()) {
            throw InvalidArgument("product_state: dims and values must be nonempty and of equal length");
        }
        BasicMps out;
        for (std::size_t m = 0; m < dims.size(); ++m) {
            if (values[m] >= dims[m]) {
                throw InvalidArgument("product_state: basis value " + std::to_string(values[m]) +
                                      " out of range for dimension " + std::to_string(dims[m]));
            }
            SiteTensor<T> s(1, dims[m], 1);
            s(0, values[m], 0) = T(1);
            out.sites_.push_back(std::move(s));
            out.labels_.push_back({SiteLabel::generic(static_cast<std::uint32_t>(m))});
            out.left_normal_.push_back(1);
            out.right_normal_.push_back(1);
        }
        out.bonds_.assign(dims.size() - 1, std::vector<double>{1.0});
        out.recount();
        return out;
    }

    /// Assembles a state from raw parts; used by deserialization and tests.
    static BasicMps from_parts(std::vector<SiteTensor<T>> sites, std::vector<std::vector<double>> bonds,
                               std::vector<LabelGroup> labels, std::vector<char> left_normal,
                               std::vector<char> right_normal) {
        const std::size_t n = sites.size();
        if (n == 0 || bonds.size() + 1 != n || labels.size() != n || left_normal.size() != n ||
            right_normal.size() != n) {
            throw InvalidArgument("from_parts: inconsistent part counts");
        }
        if (sites.front().left != 1 || sites.back().right != 1) {
            throw InvalidArgument("from_parts: boundary bonds must have dimension 1");
        }
        for (std::size_t m = 0; m + 1 < n; ++m) {
            if (sites[m].right != bonds[m].size() || sites[m + 1].left != bonds[m].size()) {
                throw InvalidArgument("from_parts: bond " + std::to_string(m) + " dimension mismatch");
            }
        }
        BasicMps out;
        out.sites_ = std::move(sites);
        out.bonds_ = std::move(bonds);
        out.labels_ = std::move(labels);
        out.left_normal_ = std::move(left_normal);
        out.right_normal_ = std::move(right_normal);
        out.recount();
        return out;
    }

    std::size_t size() const { return sites_.size(); }
    const SiteTensor<T> &site(std::size_t m) const { return sites_.at(m); }
    std::span<const double> bond(std::size_t m) const { return bonds_.at(m); }
    std::size_t bond_dimension(std::size_t m) const { return bonds_.at(m).size(); }
    std::size_t physical_dim(std::size_t m) const { return sites_.at(m).phys; }

    std::vector<std::size_t> bond_dimensions() const {
        std::vector<std::size_t> out;
        for (const auto &b : bonds_) {
            out.push_back(b.size());
        }
        return out;
    }

    const LabelGroup &labels(std::size_t m) const { return labels_.at(m); }
    void set_labels(std::size_t m, LabelGroup group) { labels_.at(m) = std::move(group); }

    /// Site holding the given label, if any.
    std::optional<std::size_t> find(const SiteLabel &label) const {
        for (std::size_t m = 0; m < labels_.size(); ++m) {
            if (std::find(labels_[m].begin(), labels_[m].end(), label) != labels_[m].end()) {
                return m;
            }
        }
        return std::nullopt;
    }

    std::vector<std::string> layout() const {
        std::vector<std::string> out;
        for (const auto &g : labels_) {
            out.push_back(to_string(g));
        }
        return out;
    }

    bool left_normal(std::size_t m) const { return left_normal_.at(m) != 0; }
    bool right_normal(std::size_t m) const { return right_normal_.at(m) != 0; }
    void set_normal_flags(std::size_t m, bool left, bool right) {
        left_normal_.at(m) = left;
        right_normal_.at(m) = right;
    }

    /// True when the local reduced density matrix of site m is exact.
    bool canonical_at(std::size_t m) const { return !first_not_canonical(m).has_value(); }

    bool fully_canonical() const {
        for (std::size_t m = 0; m < size(); ++m) {
            if (!left_normal(m) || !right_normal(m)) {
                return false;
            }
        }
        return true;
    }

    // --- element accounting --------------------------------------------

    /// Live storage units (one per real component) across all site tensors.
    std::uint64_t live_units() const { return live_; }
    std::uint64_t peak_units() const { return peak_; }
    void reset_peak() { peak_ = live_; }
    void raise_peak(std::uint64_t value) { peak_ = std::max(peak_, value); }
    std::uint64_t element_limit() const { return limit_; }
    void set_element_limit(std::uint64_t limit) { limit_ = limit; }
    const std::string &stage() const { return stage_; }
    void set_stage(std::string stage) { stage_ = std::move(stage); }

    // --- structural operations -----------------------------------------

    /// Replaces sites [first, first + count) by `sites`, with `inner` holding the
    /// weights of the new bonds between them. The outer bonds are kept and must
    /// match the outer dimensions of the replacement.
    void replace(std::size_t first, std::size_t count, std::vector<SiteTensor<T>> sites,
                 std::vector<std::vector<double>> inner, std::vector<LabelGroup> labels,
                 std::vector<std::pair<bool, bool>> flags) {
        if (count == 0 || first + count > size() || sites.empty() || inner.size() + 1 != sites.size() ||
            labels.size() != sites.size() || flags.size() != sites.size()) {
            throw InvalidArgument("replace: inconsistent arguments");
        }
        if (sites.front().left != outer_left_dim(first) || sites.back().right != outer_right_dim(first + count - 1)) {
            throw InvalidArgument("replace: outer bond dimension mismatch");
        }
        for (std::size_t k = 0; k + 1 < sites.size(); ++k) {
            if (sites[k].right != inner[k].size() || sites[k + 1].left != inner[k].size()) {
                throw InvalidArgument("replace: inner bond dimension mismatch");
            }
        }
        std::uint64_t removed = 0;
        for (std::size_t k = first; k < first + count; ++k) {
            removed += sites_[k].size() * units_per_element<T>;
        }
        std::uint64_t added = 0;
        for (const auto &s : sites) {
            added += s.size() * units_per_element<T>;
        }
        guard(live_ - removed + added);

        const auto off = static_cast<std::ptrdiff_t>(first);
        const auto cnt = static_cast<std::ptrdiff_t>(count);
        sites_.erase(sites_.begin() + off, sites_.begin() + off + cnt);
        sites_.insert(sites_.begin() + off, std::make_move_iterator(sites.begin()), std::make_move_iterator(sites.end()));
        bonds_.erase(bonds_.begin() + off, bonds_.begin() + off + cnt - 1);
        bonds_.insert(bonds_.begin() + off, std::make_move_iterator(inner.begin()), std::make_move_iterator(inner.end()));
        labels_.erase(labels_.begin() + off, labels_.begin() + off + cnt);
        labels_.insert(labels_.begin() + off, std::make_move_iterator(labels.begin()), std::make_move_iterator(labels.end()));
        left_normal_.erase(left_normal_.begin() + off, left_normal_.begin() + off + cnt);
        right_normal_.erase(right_normal_.begin() + off, right_normal_.begin() + off + cnt);
        std::vector<char> ln, rn;
        for (const auto &[l, r] : flags) {
            ln.push_back(l);
            rn.push_back(r);
        }
        left_normal_.insert(left_normal_.begin() + off, ln.begin(), ln.end());
        right_normal_.insert(right_normal_.begin() + off, rn.begin(), rn.end());
        live_ = live_ - removed + added;
        peak_ = std::max(peak_, live_);
    }

    /// Contracts sites m and m+1 into one site of physical dimension d_m * d_{m+1},
    /// absorbing the weights of the bond between them.
    void contract_sites(std::size_t m) {
        check_pair(m);
        SiteTensor<T> merged = contracted_pair(m);
        LabelGroup group = labels_[m];
        group.insert(group.end(), labels_[m + 1].begin(), labels_[m + 1].end());
        const bool ln = left_normal(m) && left_normal(m + 1);
        const bool rn = right_normal(m) && right_normal(m + 1);
        replace(m, 2, {std::move(merged)}, {}, {std::move(group)}, {{ln, rn}});
    }

    /// Splits site m, whose physical dimension must equal d_left * d_right, in two.
    /// The first label of a grouped site goes left and the rest go right.
    void decompose_site(std::size_t m, std::size_t d_left, std::size_t d_right, Decomposition method,
                        double tol = kDefaultTruncation) {
        if (m >= size()) {
            throw InvalidArgument("decompose_site: site out of range");
        }
        const SiteTensor<T> &s = sites_[m];
        if (d_left * d_right != s.phys || d_left == 0) {
            throw InvalidArgument("decompose_site: physical split " + std::to_string(d_left) + "x" +
                                  std::to_string(d_right) + " does not match dimension " + std::to_string(s.phys));
        }
        auto [lab_l, lab_r] = split_labels(labels_[m]);
        const std::size_t a = s.left;
        const std::size_t b = s.right;
        Matrix<T> M = Eigen::Map<const Matrix<T>>(s.data.data(), static_cast<Eigen::Index>(a * d_left),
                                                  static_cast<Eigen::Index>(d_right * b));
        if (method == Decomposition::svd) {
            const bool env = environment_orthonormal(m, m);
            scale_flanks(M, m, m, a, d_left, d_right, b, false);
            commit_svd(m, 1, M, a, d_left, d_right, b, std::move(lab_l), std::move(lab_r), env, tol);
            return;
        }
        const bool right_normal_branch = method == Decomposition::trivial_right_normal && M.rows() >= M.cols();
        if (right_normal_branch) {
            // Left factor = M * sqrt(d_right); right factor = delta / lambda_right.
            const std::size_t k = d_right * b;
            const double root = std::sqrt(static_cast<double>(d_right));
            SiteTensor<T> left = SiteTensor<T>::from_matrix(M * T(root), a, d_left, k);
            SiteTensor<T> right(k, d_right, b);
            std::vector<double> weights(k);
            for (std::size_t j = 0; j < d_right; ++j) {
                for (std::size_t c = 0; c < b; ++c) {
                    const double w = right_weight(m, c);
                    right(j * b + c, j, c) = T(1.0 / w);
                    weights[j * b + c] = w / root;
                }
            }
            replace(m, 1, {std::move(left), std::move(right)}, {std::move(weights)},
                    {std::move(lab_l), std::move(lab_r)}, {{false, false}, {false, true}});
            return;
        }
        auto dec = trivial_decompose<T>(M);
        const std::size_t k = dec.rank;
        SiteTensor<T> left = SiteTensor<T>::from_matrix(dec.left, a, d_left, k);
        SiteTensor<T> right = SiteTensor<T>::from_matrix(dec.right, k, d_right, b);
        replace(m, 1, {std::move(left), std::move(right)}, {std::vector<double>(k, 1.0)},
                {std::move(lab_l), std::move(lab_r)}, {{false, false}, {false, false}});
    }

    /// G acts on the physical index of site m.
    void apply_single_qudit_gate(std::size_t m, const Gate &gate) {
        if (m >= size()) {
            throw InvalidArgument("apply_single_qudit_gate: site out of range");
        }
        SiteTensor<T> s = sites_[m];
        if (gate.dim() != s.phys) {
            throw InvalidArgument("apply_single_qudit_gate: gate dimension mismatch");
        }
        const Matrix<T> g = gate.as<T>();
        for (std::size_t a = 0; a < s.left; ++a) {
            Eigen::Map<Matrix<T>> slice(s.data.data() + a * s.phys * s.right, static_cast<Eigen::Index>(s.phys),
                                        static_cast<Eigen::Index>(s.right));
            slice = (g * slice).eval();
        }
        replace(m, 1, {std::move(s)}, {}, {labels_[m]}, {{left_normal(m), right_normal(m)}});
    }

    /// Contract, apply G on the combined index (i_m * d_{m+1} + i_{m+1}), SVD-split.
    void apply_two_site_gate(std::size_t m, const Gate &gate, double tol = kDefaultTruncation) {
        check_pair(m);
        const std::size_t d1 = sites_[m].phys;
        const std::size_t d2 = sites_[m + 1].phys;
        if (gate.dim() != d1 * d2) {
            throw InvalidArgument("apply_two_site_gate: gate dimension mismatch");
        }
        const bool env = environment_orthonormal(m, m + 1);
        const std::size_t a = sites_[m].left;
        const std::size_t b = sites_[m + 1].right;
        SiteTensor<T> merged = contracted_pair(m);
        const Matrix<T> g = gate.as<T>();
        for (std::size_t x = 0; x < a; ++x) {
            Eigen::Map<Matrix<T>> slice(merged.data.data() + x * d1 * d2 * b, static_cast<Eigen::Index>(d1 * d2),
                                        static_cast<Eigen::Index>(b));
            slice = (g * slice).eval();
        }
        Matrix<T> theta = Eigen::Map<const Matrix<T>>(merged.data.data(), static_cast<Eigen::Index>(a * d1),
                                                      static_cast<Eigen::Index>(d2 * b));
        scale_flanks(theta, m, m + 1, a, d1, d2, b, false);
        commit_svd(m, 2, theta, a, d1, d2, b, labels_[m], labels_[m + 1], env, tol);
    }

    /// Exchanges the physical systems (and labels) of sites m and m+1.
    void swap_sites(std::size_t m, double tol = kDefaultTruncation) {
        check_pair(m);
        const std::size_t d1 = sites_[m].phys;
        const std::size_t d2 = sites_[m + 1].phys;
        const bool env = environment_orthonormal(m, m + 1);
        const std::size_t a = sites_[m].left;
        const std::size_t b = sites_[m + 1].right;
        SiteTensor<T> merged = contracted_pair(m);
        Matrix<T> theta = Eigen::Map<const Matrix<T>>(merged.data.data(), static_cast<Eigen::Index>(a * d1),
                                                      static_cast<Eigen::Index>(d2 * b));
        Matrix<T> swapped = swap_physical<T>(theta, static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(d1),
                                             static_cast<Eigen::Index>(d2), static_cast<Eigen::Index>(b));
        theta.resize(0, 0);
        scale_flanks(swapped, m, m + 1, a, d2, d1, b, false);
        commit_svd(m, 2, swapped, a, d2, d1, b, labels_[m + 1], labels_[m], env, tol);
    }

    /// Pairwise identity updates over sites [first, last]: left to right for
    /// Direction::right, right to left otherwise.
    void sweep(Direction dir, std::size_t first, std::size_t last, double tol = kDefaultTruncation) {
        if (first > last || last >= size()) {
            throw InvalidArgument("sweep: range out of bounds");
        }
        if (dir == Direction::right) {
            for (std::size_t k = first; k < last; ++k) {
                identity_update(k, tol);
            }
        } else {
            for (std::size_t k = last; k > first; --k) {
                identity_update(k - 1, tol);
            }
        }
    }

    void sweep(Direction dir) {
        if (size() > 1) {
            sweep(dir, 0, size() - 1);
        }
    }

    /// Reduced density matrix of site m by contracting the ket network against
    /// its conjugate. Works in any gauge.
    Matrix<T> reduced_density_nonlocal(std::size_t m) const {
        if (m >= size()) {
            throw InvalidArgument("reduced_density_nonlocal: site out of range");
        }
        Matrix<T> L = Matrix<T>::Ones(1, 1);
        for (std::size_t k = 0; k < m; ++k) {
            L = advance_left_environment(L, k);
        }
        Matrix<T> R = Matrix<T>::Ones(1, 1);
        for (std::size_t k = size() - 1; k > m; --k) {
            R = advance_right_environment(R, k);
        }
        const SiteTensor<T> &s = sites_[m];
        std::vector<Matrix<T>> gr(s.phys);
        std::vector<Matrix<T>> lg(s.phys);
        for (std::size_t i = 0; i < s.phys; ++i) {
            const Matrix<T> g = s.slice(i);
            gr[i] = g * R;
            lg[i] = L * g.conjugate();
        }
        Matrix<T> rho(s.phys, s.phys);
        for (std::size_t i = 0; i < s.phys; ++i) {
            for (std::size_t j = 0; j < s.phys; ++j) {
                rho(i, j) = gr[i].cwiseProduct(lg[j]).sum();
            }
        }
        return rho;
    }

    /// Reduced density matrix of site m from its tensor and flanking weights.
    /// Requires the canonical conditions around m.
    Matrix<T> reduced_density_local(std::size_t m) const {
        if (m >= size()) {
            throw InvalidArgument("reduced_density_local: site out of range");
        }
        if (auto bad = first_not_canonical(m)) {
            throw NotCanonical(bad->first, bad->second);
        }
        const SiteTensor<T> &s = sites_[m];
        Matrix<T> scaled(s.left, s.phys * s.right);
        for (std::size_t a = 0; a < s.left; ++a) {
            const double wl = left_weight(m, a);
            for (std::size_t i = 0; i < s.phys; ++i) {
                for (std::size_t b = 0; b < s.right; ++b) {
                    scaled(a, i * s.right + b) = s(a, i, b) * T(wl * right_weight(m, b));
                }
            }
        }
        Matrix<T> rho(s.phys, s.phys);
        const auto d = static_cast<Eigen::Index>(s.phys);
        const auto r = static_cast<Eigen::Index>(s.right);
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                rho(i, j) = scaled.middleCols(i * r, r).cwiseProduct(scaled.middleCols(j * r, r).conjugate()).sum();
            }
        }
        return rho;
    }

    Matrix<T> reduced_density(std::size_t m) const {
        return canonical_at(m) ? reduced_density_local(m) : reduced_density_nonlocal(m);
    }

    double norm_squared() const {
        Matrix<T> L = Matrix<T>::Ones(1, 1);
        for (std::size_t k = 0; k < size(); ++k) {
            L = advance_left_environment(L, k);
        }
        return std::real(L(0, 0));
    }

    /// Samples (or forces) an outcome for site m, projects onto it, renormalizes,
    /// and sweeps outward from m so the collapse propagates through the bonds.
    template <class Gen> std::size_t measure(std::size_t m, Gen &rng, std::optional<std::size_t> forced = std::nullopt) {
        const Matrix<T> rho = reduced_density(m);
        const std::size_t d = sites_[m].phys;
        std::vector<double> probs(d);
        double mass = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double p = std::real(rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
            if (p < 0.0) {
                if (p < -1e-12) {
                    throw NormalizationError(p);
                }
                p = 0.0;
            }
            probs[i] = p;
            mass += p;
        }
        if (std::abs(mass - 1.0) > 1e-6) {
            throw NormalizationError(mass);
        }
        std::size_t outcome = 0;
        if (forced) {
            outcome = *forced;
            if (outcome >= d || probs[outcome] <= 0.0) {
                throw InvalidArgument("measure: forced outcome has zero probability");
            }
        } else {
            std::uniform_real_distribution<double> uniform(0.0, 1.0);
            const double u = uniform(rng) * mass;
            double acc = 0.0;
            outcome = d;
            std::size_t last_nonzero = 0;
            for (std::size_t i = 0; i < d; ++i) {
                if (probs[i] > 0.0) {
                    last_nonzero = i;
                }
                acc += probs[i];
                if (u < acc && outcome == d) {
                    outcome = i;
                }
            }
            if (outcome == d) {
                outcome = last_nonzero;
            }
        }
        project(m, outcome, probs[outcome]);
        if (m + 1 < size()) {
            sweep(Direction::right, m, size() - 1);
        }
        if (m > 0) {
            sweep(Direction::left, 0, m);
        }
        return outcome;
    }

    /// Deletes a site whose physical index factors out: Gamma(a, i, b) = v_i M(a, b).
    /// The bond map M (with the norm and phase of v) is folded into a neighbour,
    /// so bonds passing through a measured site keep their entanglement.
    void remove_separable_site(std::size_t m) {
        if (m >= size()) {
            throw InvalidArgument("remove_separable_site: site out of range");
        }
        if (size() == 1) {
            throw InvalidArgument("remove_separable_site: cannot remove the only site");
        }
        const SiteTensor<T> &s = sites_[m];
        // Dominant physical slice, as a left x right matrix.
        std::size_t best = 0;
        double best_n2 = -1.0;
        std::vector<double> slice_n2(s.phys, 0.0);
        for (std::size_t i = 0; i < s.phys; ++i) {
            for (std::size_t a = 0; a < s.left; ++a) {
                for (std::size_t b = 0; b < s.right; ++b) {
                    slice_n2[i] += abs2(s(a, i, b));
                }
            }
            if (slice_n2[i] > best_n2) {
                best_n2 = slice_n2[i];
                best = i;
            }
        }
        if (best_n2 <= 0.0) {
            throw NotSeparable("site " + std::to_string(m) + " is zero");
        }
        Matrix<T> M(static_cast<Eigen::Index>(s.left), static_cast<Eigen::Index>(s.right));
        for (std::size_t a = 0; a < s.left; ++a) {
            for (std::size_t b = 0; b < s.right; ++b) {
                M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = s(a, best, b);
            }
        }
        double v2 = 0.0;
        for (std::size_t i = 0; i < s.phys; ++i) {
            T overlap(0);
            for (std::size_t a = 0; a < s.left; ++a) {
                for (std::size_t b = 0; b < s.right; ++b) {
                    overlap += shor_mps::conj(M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))) * s(a, i, b);
                }
            }
            const double o2 = abs2(overlap);
            if (o2 < (1.0 - 1e-10) * best_n2 * slice_n2[i]) {
                throw NotSeparable("site " + std::to_string(m) + " with bond dimensions (" +
                                   std::to_string(s.left) + ", " + std::to_string(s.right) +
                                   ") is entangled through its physical index");
            }
            v2 += o2 / (best_n2 * best_n2);
        }
        // Gamma = c (x) M / |M| with c_i = <M, slice_i> / |M|. c_best = |M| is real,
        // so the folded map is M scaled by |c| / |M|.
        M *= T(std::sqrt(v2));
        const bool trivial = M.size() == 1 && std::abs(std::abs(M(0, 0)) - 1.0) <= 1e-12;
        const auto off = static_cast<std::ptrdiff_t>(m);

        if (m > 0) {
            // Gamma'_{m-1} = Gamma_{m-1} lambda_{m-1} M; bond m (if any) now follows m-1.
            const SiteTensor<T> &n = sites_[m - 1];
            Matrix<T> G = n.left_grouped();
            for (std::size_t a = 0; a < n.right; ++a) {
                G.col(static_cast<Eigen::Index>(a)) *= T(bonds_[m - 1][a]);
            }
            const Matrix<T> folded = G * M;
            sites_[m - 1] = SiteTensor<T>::from_matrix(folded, n.left, n.phys, s.right);
            bonds_.erase(bonds_.begin() + (off - 1));
            if (!trivial) {
                left_normal_[m - 1] = 0;
                right_normal_[m - 1] = 0;
            }
        } else {
            // Gamma'_1 = M lambda_0 Gamma_1.
            const SiteTensor<T> &n = sites_[1];
            Matrix<T> G = n.right_grouped();
            for (std::size_t a = 0; a < n.left; ++a) {
                G.row(static_cast<Eigen::Index>(a)) *= T(bonds_[0][a]);
            }
            const Matrix<T> folded = M * G;
            sites_[1] = SiteTensor<T>::from_matrix(folded, s.left, n.phys, n.right);
            bonds_.erase(bonds_.begin());
            if (!trivial) {
                left_normal_[1] = 0;
                right_normal_[1] = 0;
            }
        }
        sites_.erase(sites_.begin() + off);
        labels_.erase(labels_.begin() + off);
        left_normal_.erase(left_normal_.begin() + off);
        right_normal_.erase(right_normal_.begin() + off);
        recount();
    }

    /// Inserts a separable site in state `amplitudes` before position `pos`
    /// (pos == size() appends). The new site passes the interrupted bond through,
    /// so both its bonds copy the interrupted bond's dimension and weights.
    void insert_site(std::size_t pos, std::span<const T> amplitudes, LabelGroup group) {
        if (pos > size() || amplitudes.empty()) {
            throw InvalidArgument("insert_site: position out of range");
        }
        double n2 = 0.0;
        for (const T &x : amplitudes) {
            n2 += abs2(x);
        }
        if (std::abs(n2 - 1.0) > 1e-10) {
            throw InvalidArgument("insert_site: amplitudes must have unit norm");
        }
        const bool interior = pos > 0 && pos < size();
        std::vector<double> weights = interior ? bonds_[pos - 1] : std::vector<double>{1.0};
        const std::size_t chi = weights.size();
        const std::size_t d = amplitudes.size();
        SiteTensor<T> s(chi, d, chi);
        for (std::size_t a = 0; a < chi; ++a) {
            for (std::size_t i = 0; i < d; ++i) {
                s(a, i, a) = amplitudes[i] / T(weights[a]);
            }
        }
        const std::uint64_t added = s.size() * units_per_element<T>;
        guard(live_ + added);
        const auto off = static_cast<std::ptrdiff_t>(pos);
        if (size() == 0) {
            // Not reachable through the public constructors; kept for completeness.
            sites_.push_back(std::move(s));
        } else if (interior) {
            bonds_.insert(bonds_.begin() + off, weights);
            sites_.insert(sites_.begin() + off, std::move(s));
        } else if (pos == 0) {
            bonds_.insert(bonds_.begin(), std::vector<double>{1.0});
            sites_.insert(sites_.begin(), std::move(s));
        } else {
            bonds_.push_back(std::vector<double>{1.0});
            sites_.push_back(std::move(s));
        }
        labels_.insert(labels_.begin() + off, std::move(group));
        left_normal_.insert(left_normal_.begin() + off, 1);
        right_normal_.insert(right_normal_.begin() + off, 1);
        live_ += added;
        peak_ = std::max(peak_, live_);
    }

    void insert_site(std::size_t pos, std::size_t dim, std::size_t basis_value, LabelGroup group) {
        if (basis_value >= dim) {
            throw InvalidArgument("insert_site: basis value out of range");
        }
        std::vector<T> amps(dim, T(0));
        amps[basis_value] = T(1);
        insert_site(pos, std::span<const T>(amps), std::move(group));
    }

    /// Moves physical index p of site m to targets[p] in a larger (or equal)
    /// physical space, leaving the remaining entries zero. Orthonormality flags
    /// survive because the map is an isometry.
    void relabel_physical(std::size_t m, std::size_t new_dim, std::span<const std::size_t> targets) {
        const SiteTensor<T> &s = sites_.at(m);
        if (targets.size() != s.phys) {
            throw InvalidArgument("relabel_physical: one target per physical index required");
        }
        std::vector<char> used(new_dim, 0);
        for (std::size_t t : targets) {
            if (t >= new_dim || used[t]) {
                throw InvalidArgument("relabel_physical: targets must be distinct and in range");
            }
            used[t] = 1;
        }
        SiteTensor<T> out(s.left, new_dim, s.right);
        for (std::size_t a = 0; a < s.left; ++a) {
            for (std::size_t i = 0; i < s.phys; ++i) {
                std::copy_n(&s(a, i, 0), s.right, &out(a, targets[i], 0));
            }
        }
        replace(m, 1, {std::move(out)}, {}, {labels_[m]}, {{left_normal(m), right_normal(m)}});
    }

    /// Per-bond Schmidt ranks. Non-canonical states are canonicalized on a
    /// working copy with a right and then a left sweep first.
    RankProfile schmidt_ranks(std::string stage) const {
        RankProfile out{std::move(stage), {}, layout()};
        if (fully_canonical() || size() < 2) {
            out.ranks = bond_dimensions();
            return out;
        }
        BasicMps copy = *this;
        copy.set_element_limit(std::numeric_limits<std::uint64_t>::max());
        copy.sweep(Direction::right);
        copy.sweep(Direction::left);
        out.ranks = copy.bond_dimensions();
        return out;
    }

    /// Dense amplitudes in lexicographic order of the site-ordered physical indices.
    std::vector<T> to_state_vector(std::uint64_t cap = std::uint64_t{1} << 26) const {
        std::uint64_t total = 1;
        for (const auto &s : sites_) {
            total *= s.phys;
            if (total > cap) {
                throw CapExceeded("to_state_vector: dimension exceeds cap of " + std::to_string(cap));
            }
        }
        Matrix<T> psi = Matrix<T>::Ones(1, 1);
        for (std::size_t k = 0; k < size(); ++k) {
            const SiteTensor<T> &s = sites_[k];
            Matrix<T> next = psi * s.right_grouped();
            Matrix<T> reshaped =
                Eigen::Map<Matrix<T>>(next.data(), psi.rows() * static_cast<Eigen::Index>(s.phys),
                                      static_cast<Eigen::Index>(s.right));
            if (k + 1 < size()) {
                for (std::size_t b = 0; b < s.right; ++b) {
                    reshaped.col(static_cast<Eigen::Index>(b)) *= T(bonds_[k][b]);
                }
            }
            psi = std::move(reshaped);
        }
        return std::vector<T>(psi.data(), psi.data() + psi.size());
    }

    /// Same state in complex storage; flags, weights and labels carry over.
    BasicMps<Complex> to_complex() const
        requires std::is_same_v<T, Real>
    {
        std::vector<SiteTensor<Complex>> sites;
        sites.reserve(size());
        for (const auto &s : sites_) {
            SiteTensor<Complex> c(s.left, s.phys, s.right);
            std::transform(s.data.begin(), s.data.end(), c.data.begin(), [](double x) { return Complex(x, 0.0); });
            sites.push_back(std::move(c));
        }
        auto out = BasicMps<Complex>::from_parts(std::move(sites), bonds_, labels_, left_normal_, right_normal_);
        out.set_element_limit(limit_);
        out.set_stage(stage_);
        out.raise_peak(peak_);
        return out;
    }

    const std::vector<std::vector<double>> &bonds() const { return bonds_; }
    const std::vector<char> &left_normal_flags() const { return left_normal_; }
    const std::vector<char> &right_normal_flags() const { return right_normal_; }

  private:
    double left_weight(std::size_t m, std::size_t a) const { return m == 0 ? 1.0 : bonds_[m - 1][a]; }
    double right_weight(std::size_t m, std::size_t b) const { return m + 1 == size() ? 1.0 : bonds_[m][b]; }
    std::size_t outer_left_dim(std::size_t m) const { return m == 0 ? 1 : bonds_[m - 1].size(); }
    std::size_t outer_right_dim(std::size_t m) const { return m + 1 == size() ? 1 : bonds_[m].size(); }

    void check_pair(std::size_t m) const {
        if (m + 1 >= size()) {
            throw InvalidArgument("site pair (" + std::to_string(m) + ", " + std::to_string(m + 1) + ") out of range");
        }
    }

    void guard(std::uint64_t projected) const {
        if (projected > limit_) {
            throw MemoryLimit(stage_.empty() ? std::string("mps") : stage_, projected, limit_);
        }
    }

    void recount() {
        live_ = 0;
        for (const auto &s : sites_) {
            live_ += s.size() * units_per_element<T>;
        }
        peak_ = std::max(peak_, live_);
    }

    std::optional<std::pair<std::size_t, std::string>> first_not_canonical(std::size_t m) const {
        for (std::size_t k = 0; k < m; ++k) {
            if (!left_normal(k)) {
                return std::make_pair(k, std::string("left"));
            }
        }
        for (std::size_t k = m + 1; k < size(); ++k) {
            if (!right_normal(k)) {
                return std::make_pair(k, std::string("right"));
            }
        }
        return std::nullopt;
    }

    /// Sites left of `first` left-normal and right of `last` right-normal.
    bool environment_orthonormal(std::size_t first, std::size_t last) const {
        for (std::size_t k = 0; k < first; ++k) {
            if (!left_normal(k)) {
                return false;
            }
        }
        for (std::size_t k = last + 1; k < size(); ++k) {
            if (!right_normal(k)) {
                return false;
            }
        }
        return true;
    }

    SiteTensor<T> contracted_pair(std::size_t m) const {
        const SiteTensor<T> &x = sites_[m];
        const SiteTensor<T> &y = sites_[m + 1];
        Matrix<T> lhs = x.left_grouped();
        for (std::size_t c = 0; c < x.right; ++c) {
            lhs.col(static_cast<Eigen::Index>(c)) *= T(bonds_[m][c]);
        }
        Matrix<T> prod = lhs * y.right_grouped();
        return SiteTensor<T>::from_matrix(prod, x.left, x.phys * y.phys, y.right);
    }

    /// Multiplies (divide = false) or divides the rows of M, shaped
    /// (a*d1) x (d2*b), by the weights left of site `lo` and the columns by
    /// the weights right of site `hi`.
    void scale_flanks(Matrix<T> &M, std::size_t lo, std::size_t hi, std::size_t a, std::size_t d1, std::size_t d2,
                      std::size_t b, bool divide) const {
        if (lo > 0) {
            for (std::size_t x = 0; x < a; ++x) {
                const double w = divide ? 1.0 / bonds_[lo - 1][x] : bonds_[lo - 1][x];
                M.middleRows(static_cast<Eigen::Index>(x * d1), static_cast<Eigen::Index>(d1)) *= T(w);
            }
        }
        if (hi + 1 < size()) {
            for (std::size_t y = 0; y < b; ++y) {
                const double w = divide ? 1.0 / bonds_[hi][y] : bonds_[hi][y];
                for (std::size_t j = 0; j < d2; ++j) {
                    M.col(static_cast<Eigen::Index>(j * b + y)) *= T(w);
                }
            }
        }
    }

    /// SVD-splits theta (flanks already absorbed) into two sites replacing
    /// [m, m + count).
    void commit_svd(std::size_t m, std::size_t count, const Matrix<T> &theta, std::size_t a, std::size_t d1,
                    std::size_t d2, std::size_t b, LabelGroup lab_l, LabelGroup lab_r, bool env, double tol) {
        auto dec = svd_truncated<T>(theta, tol);
        const std::size_t k = dec.rank;
        const std::size_t hi = m + count - 1;
        if (m > 0) {
            for (std::size_t x = 0; x < a; ++x) {
                dec.left.middleRows(static_cast<Eigen::Index>(x * d1), static_cast<Eigen::Index>(d1)) *=
                    T(1.0 / bonds_[m - 1][x]);
            }
        }
        if (hi + 1 < size()) {
            for (std::size_t y = 0; y < b; ++y) {
                const double w = 1.0 / bonds_[hi][y];
                for (std::size_t j = 0; j < d2; ++j) {
                    dec.right.col(static_cast<Eigen::Index>(j * b + y)) *= T(w);
                }
            }
        }
        SiteTensor<T> left = SiteTensor<T>::from_matrix(dec.left, a, d1, k);
        SiteTensor<T> right = SiteTensor<T>::from_matrix(dec.right, k, d2, b);
        replace(m, count, {std::move(left), std::move(right)}, {std::move(dec.weights)},
                {std::move(lab_l), std::move(lab_r)}, {{true, env}, {env, true}});
    }

    void identity_update(std::size_t m, double tol) {
        const bool env = environment_orthonormal(m, m + 1);
        const std::size_t a = sites_[m].left;
        const std::size_t d1 = sites_[m].phys;
        const std::size_t d2 = sites_[m + 1].phys;
        const std::size_t b = sites_[m + 1].right;
        SiteTensor<T> merged = contracted_pair(m);
        Matrix<T> theta = Eigen::Map<const Matrix<T>>(merged.data.data(), static_cast<Eigen::Index>(a * d1),
                                                      static_cast<Eigen::Index>(d2 * b));
        merged = SiteTensor<T>();
        scale_flanks(theta, m, m + 1, a, d1, d2, b, false);
        commit_svd(m, 2, theta, a, d1, d2, b, labels_[m], labels_[m + 1], env, tol);
    }

    void project(std::size_t m, std::size_t outcome, double probability) {
        SiteTensor<T> s = sites_[m];
        const T scale = T(1.0 / std::sqrt(probability));
        for (std::size_t a = 0; a < s.left; ++a) {
            for (std::size_t i = 0; i < s.phys; ++i) {
                for (std::size_t b = 0; b < s.right; ++b) {
                    s(a, i, b) = i == outcome ? s(a, i, b) * scale : T(0);
                }
            }
        }
        replace(m, 1, {std::move(s)}, {}, {labels_[m]}, {{false, false}});
    }

    /// L'[b, b'] = sum_{a, a', i} L[a, a'] X_i[a, b] conj(X_i[a', b']), X_i = Gamma_i * lambda_right.
    Matrix<T> advance_left_environment(const Matrix<T> &L, std::size_t k) const {
        const SiteTensor<T> &s = sites_[k];
        Matrix<T> out = Matrix<T>::Zero(s.right, s.right);
        for (std::size_t i = 0; i < s.phys; ++i) {
            Matrix<T> x = s.slice(i);
            if (k + 1 < size()) {
                for (std::size_t b = 0; b < s.right; ++b) {
                    x.col(static_cast<Eigen::Index>(b)) *= T(bonds_[k][b]);
                }
            }
            out.noalias() += x.transpose() * (L * x.conjugate());
        }
        return out;
    }

    /// R'[a, a'] = sum_{b, b', i} Y_i[a, b] R[b, b'] conj(Y_i[a', b']), Y_i = lambda_left * Gamma_i.
    Matrix<T> advance_right_environment(const Matrix<T> &R, std::size_t k) const {
        const SiteTensor<T> &s = sites_[k];
        Matrix<T> out = Matrix<T>::Zero(s.left, s.left);
        for (std::size_t i = 0; i < s.phys; ++i) {
            Matrix<T> y = s.slice(i);
            if (k > 0) {
                for (std::size_t a = 0; a < s.left; ++a) {
                    y.row(static_cast<Eigen::Index>(a)) *= T(bonds_[k - 1][a]);
                }
            }
            out.noalias() += y * R * y.adjoint();
        }
        return out;
    }

    static std::pair<LabelGroup, LabelGroup> split_labels(const LabelGroup &group) {
        if (group.size() < 2) {
            return {group, group};
        }
        return {LabelGroup{group.front()}, LabelGroup(group.begin() + 1, group.end())};
    }

    std::vector<SiteTensor<T>> sites_;
    std::vector<std::vector<double>> bonds_;
    std::vector<LabelGroup> labels_;
    std::vector<char> left_normal_;
    std::vector<char> right_normal_;
    std::uint64_t live_ = 0;
    std::uint64_t peak_ = 0;
    std::uint64_t limit_ = std::numeric_limits<std::uint64_t>::max();
    std::string stage_;
};

/// Runtime-tagged MPS: real storage until promoted, complex afterwards.
class MpsState {
  public:
    MpsState() = default;
    explicit MpsState(BasicMps<Real> s) : impl_(std::move(s)) {}
    explicit MpsState(BasicMps<Complex> s) : impl_(std::move(s)) {}

    static MpsState product_state(std::span<const std::size_t> dims, std::span<const std::size_t> values,
                                  ScalarMode mode = ScalarMode::real) {
        auto s = BasicMps<Real>::product_state(dims, values);
        if (mode == ScalarMode::complex) {
            return MpsState(s.to_complex());
        }
        return MpsState(std::move(s));
    }

    ScalarMode mode() const { return std::holds_alternative<BasicMps<Real>>(impl_) ? ScalarMode::real : ScalarMode::complex; }

    template <class F> decltype(auto) visit(F &&f) { return std::visit(std::forward<F>(f), impl_); }
    template <class F> decltype(auto) visit(F &&f) const { return std::visit(std::forward<F>(f), impl_); }

    BasicMps<Real> &real() { return std::get<BasicMps<Real>>(impl_); }
    BasicMps<Complex> &complex() { return std::get<BasicMps<Complex>>(impl_); }
    const BasicMps<Real> &real() const { return std::get<BasicMps<Real>>(impl_); }
    const BasicMps<Complex> &complex() const { return std::get<BasicMps<Complex>>(impl_); }

    /// Converts real storage to complex. Returns false (and warns) when the
    /// state is already complex.
    bool promote_to_complex() {
        if (mode() == ScalarMode::complex) {
            std::clog << "warning: promote_to_complex on a complex-mode state is a no-op\n";
            return false;
        }
        impl_ = real().to_complex();
        return true;
    }

    std::size_t size() const { return visit([](const auto &s) { return s.size(); }); }
    std::vector<std::size_t> bond_dimensions() const { return visit([](const auto &s) { return s.bond_dimensions(); }); }
    std::size_t physical_dim(std::size_t m) const { return visit([m](const auto &s) { return s.physical_dim(m); }); }
    std::vector<std::string> layout() const { return visit([](const auto &s) { return s.layout(); }); }
    std::optional<std::size_t> find(const SiteLabel &label) const {
        return visit([&](const auto &s) { return s.find(label); });
    }
    const LabelGroup &labels(std::size_t m) const {
        return visit([m](const auto &s) -> const LabelGroup & { return s.labels(m); });
    }
    bool canonical_at(std::size_t m) const { return visit([m](const auto &s) { return s.canonical_at(m); }); }

    std::uint64_t live_units() const { return visit([](const auto &s) { return s.live_units(); }); }
    std::uint64_t peak_units() const { return visit([](const auto &s) { return s.peak_units(); }); }
    void reset_peak() {
        visit([](auto &s) { s.reset_peak(); });
    }
    void set_element_limit(std::uint64_t limit) {
        visit([limit](auto &s) { s.set_element_limit(limit); });
    }
    void set_stage(const std::string &stage) {
        visit([&](auto &s) { s.set_stage(stage); });
    }

    void contract_sites(std::size_t m) {
        visit([m](auto &s) { s.contract_sites(m); });
    }
    void decompose_site(std::size_t m, std::size_t dl, std::size_t dr, Decomposition method) {
        visit([&](auto &s) { s.decompose_site(m, dl, dr, method); });
    }
    void apply_single_qudit_gate(std::size_t m, const Gate &g) {
        visit([&](auto &s) { s.apply_single_qudit_gate(m, g); });
    }
    void apply_two_site_gate(std::size_t m, const Gate &g) {
        visit([&](auto &s) { s.apply_two_site_gate(m, g); });
    }
    void swap_sites(std::size_t m) {
        visit([m](auto &s) { s.swap_sites(m); });
    }
    void sweep(Direction dir, std::size_t first, std::size_t last) {
        visit([&](auto &s) { s.sweep(dir, first, last); });
    }
    void sweep(Direction dir) {
        visit([dir](auto &s) { s.sweep(dir); });
    }
    void remove_separable_site(std::size_t m) {
        visit([m](auto &s) { s.remove_separable_site(m); });
    }
    void insert_site(std::size_t pos, std::size_t dim, std::size_t basis_value, LabelGroup group) {
        visit([&](auto &s) { s.insert_site(pos, dim, basis_value, group); });
    }
    template <class Gen> std::size_t measure(std::size_t m, Gen &rng, std::optional<std::size_t> forced = std::nullopt) {
        return visit([&](auto &s) { return s.measure(m, rng, forced); });
    }
    RankProfile schmidt_ranks(std::string stage) const {
        return visit([&](const auto &s) { return s.schmidt_ranks(stage); });
    }
    double norm_squared() const { return visit([](const auto &s) { return s.norm_squared(); }); }

    Matrix<Complex> reduced_density_nonlocal(std::size_t m) const {
        return visit([m](const auto &s) -> Matrix<Complex> { return s.reduced_density_nonlocal(m).template cast<Complex>(); });
    }
    Matrix<Complex> reduced_density_local(std::size_t m) const {
        return visit([m](const auto &s) -> Matrix<Complex> { return s.reduced_density_local(m).template cast<Complex>(); });
    }

    std::vector<Complex> to_state_vector(std::uint64_t cap = std::uint64_t{1} << 26) const {
        return visit([cap](const auto &s) {
            auto v = s.to_state_vector(cap);
            return std::vector<Complex>(v.begin(), v.end());
        });
    }

  private:
    std::variant<BasicMps<Real>, BasicMps<Complex>> impl_;
};

} // namespace shor_mps
