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
 * @file shor.hpp
 * Order finding on the MPS core.
 *
 * The lower register R is one qudit whose basis is the list of residues seen
 * so far, in order of first appearance. Upper qubits are created on demand:
 * qubit q_i is inserted next to R in (|0> + |1>)/sqrt(2), the controlled
 * multiplication by a^(2^i) is applied to the contracted (q_i, R) block as a
 * relabeling of R's basis, and the block is split again with the trivial
 * decomposition. These three steps are fused into one tensor operation.
 *
 * Layouts:
 *   static   [q_{2l-1} ... q_0][R]
 *   dynamic  [q_{2l-1} ... q_alpha][R][q_0 ... q_{alpha-1}]
 *
 * Plateau rule. Processing q_i in descending order, the rank of the bond
 * between the B block and R after the gates for q_{2l-1} .. q_k is the number
 * of distinct residues a^(m 2^k), m < 2^(2l-k), i.e. min(2^(2l-k), r / gcd(r, 2^k)).
 * For k >= alpha this is min(2^(2l-k), beta), which grows strictly and then
 * stays at beta. Since r < 2^l the value beta is reached before k = alpha,
 * so a single unchanged rank marks the plateau, and the next rise (to 2 beta
 * at k = alpha - 1) identifies alpha. That qubit is swapped across R and the
 * remaining qubits are placed on the A side, where the rank doubles per qubit.
 */

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "shor_mps/error.hpp"
#include "shor_mps/mps.hpp"
#include "shor_mps/numtheory.hpp"
#include "shor_mps/oracle.hpp"

namespace shor_mps {

/// Basis of the lower-register qudit: residues in order of first appearance.
class LowerRegisterIndex {
  public:
    LowerRegisterIndex() : residues_{1}, index_{{1, 0}} {}

    std::size_t size() const { return residues_.size(); }
    const std::vector<u64> &residues() const { return residues_; }
    u64 residue(std::size_t k) const { return residues_.at(k); }

    std::optional<std::size_t> find(u64 residue) const {
        auto it = index_.find(residue);
        if (it == index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    /// Index of `residue`, appending it if new.
    std::size_t intern(u64 residue) {
        auto [it, inserted] = index_.try_emplace(residue, residues_.size());
        if (inserted) {
            residues_.push_back(residue);
        }
        return it->second;
    }

  private:
    std::vector<u64> residues_;
    std::unordered_map<u64, std::size_t> index_;
};

enum class Layout { static_order, dynamic_order };

inline const char *to_string(Layout layout) { return layout == Layout::static_order ? "static" : "dynamic"; }

inline Layout parse_layout(const std::string &text) {
    if (text == "static") {
        return Layout::static_order;
    }
    if (text == "dynamic") {
        return Layout::dynamic_order;
    }
    throw InvalidArgument("unknown layout '" + text + "'");
}

enum class Side { B, A };

struct PipelineConfig {
    Layout layout = Layout::dynamic_order;
    /// Guard on live site-tensor storage, in 64-bit words.
    std::uint64_t max_elements = std::uint64_t{1} << 28;
    unsigned retries = 0;
    std::uint64_t seed = 0;
    /// Consecutive unchanged-rank gates needed before a rise counts.
    unsigned plateau_confirmations = 1;
    std::uint64_t dense_cap = kDefaultDenseCap;
    /// Record true Schmidt ranks at stage boundaries. The check canonicalizes
    /// a copy of the state, which doubles memory at the modexp stage.
    bool profile_ranks = true;
    /// Record bond dimensions after every modexp gate.
    bool trace_gates = false;
};

struct StageStats {
    std::string stage;
    std::uint64_t live_units = 0;
    std::uint64_t peak_units = 0;
    double seconds = 0.0;
    std::optional<RankProfile> ranks;
};

struct SampleRecord {
    u64 N = 0;
    u64 a = 0;
    unsigned l = 0;
    Layout layout = Layout::dynamic_order;
    std::uint64_t seed = 0;
    unsigned attempts = 1;
    /// Measured lower-register residue a^j mod N; j itself is not observable.
    u64 residue = 0;
    u64 s = 0;
    std::vector<unsigned> bits;
    std::vector<Convergent> convergents;
    std::optional<u64> r_candidate;
    std::optional<std::pair<u64, u64>> factors;
    unsigned alpha_hat = 0;
    std::size_t lower_dim = 0;
    std::vector<StageStats> stages;

    std::uint64_t peak_units() const {
        std::uint64_t p = 0;
        for (const auto &st : stages) {
            p = std::max(p, st.peak_units);
        }
        return p;
    }
};

/// s = sum_b bits[b] 2^b: the first qubit measured is the least significant
/// bit of the output.
inline u64 assemble_s(std::span<const unsigned> bits, unsigned expected_count) {
    if (bits.size() != expected_count || expected_count > 63) {
        throw InvalidArgument("assemble_s: expected " + std::to_string(expected_count) + " bits, got " +
                              std::to_string(bits.size()));
    }
    u64 s = 0;
    for (std::size_t b = 0; b < bits.size(); ++b) {
        if (bits[b] > 1) {
            throw InvalidArgument("assemble_s: bit values must be 0 or 1");
        }
        s |= u64{bits[b]} << b;
    }
    return s;
}

namespace detail {

/// a^(2^i) mod N by repeated squaring.
inline u64 power_of_two_exponent(u64 a, unsigned i, u64 N) {
    u64 m = a % N;
    for (unsigned k = 0; k < i; ++k) {
        m = mul_mod(m, m, N);
    }
    return m;
}

/// Inserts q_i beside R at `rpos` and applies the controlled multiplication
/// as one fused update. See the file comment for the construction.
template <Scalar T>
void controlled_modexp(BasicMps<T> &mps, std::size_t rpos, std::span<const std::size_t> targets, std::size_t new_dim,
                       unsigned qubit, Side side) {
    const SiteTensor<T> &R = mps.site(rpos);
    const std::size_t chi_l = R.left;
    const std::size_t d = R.phys;
    const std::size_t chi_r = R.right;
    const T h = T(1.0 / std::sqrt(2.0));
    const LabelGroup q_label{SiteLabel::upper(qubit)};
    const LabelGroup r_label = mps.labels(rpos);

    if (side == Side::B) {
        // Block rows (alpha, b), columns (v', gamma).
        const std::size_t rows = 2 * chi_l;
        const std::size_t cols = new_dim * chi_r;
        auto fill = [&](auto &&at) {
            for (std::size_t x = 0; x < chi_l; ++x) {
                for (std::size_t v = 0; v < d; ++v) {
                    for (std::size_t g = 0; g < chi_r; ++g) {
                        const T val = R(x, v, g) * h;
                        at(x, 0, v, g) = val;
                        at(x, 1, targets[v], g) = val;
                    }
                }
            }
        };
        if (rows >= cols) {
            SiteTensor<T> q(chi_l, 2, cols);
            fill([&](std::size_t x, std::size_t b, std::size_t v, std::size_t g) -> T & { return q(x, b, v * chi_r + g); });
            SiteTensor<T> r(cols, new_dim, chi_r);
            for (std::size_t v = 0; v < new_dim; ++v) {
                for (std::size_t g = 0; g < chi_r; ++g) {
                    r(v * chi_r + g, v, g) = T(1);
                }
            }
            mps.replace(rpos, 1, {std::move(q), std::move(r)}, {std::vector<double>(cols, 1.0)}, {q_label, r_label},
                        {{false, false}, {false, false}});
        } else {
            SiteTensor<T> q(chi_l, 2, rows);
            for (std::size_t x = 0; x < chi_l; ++x) {
                q(x, 0, 2 * x) = T(1);
                q(x, 1, 2 * x + 1) = T(1);
            }
            SiteTensor<T> r(rows, new_dim, chi_r);
            fill([&](std::size_t x, std::size_t b, std::size_t v, std::size_t g) -> T & { return r(2 * x + b, v, g); });
            mps.replace(rpos, 1, {std::move(q), std::move(r)}, {std::vector<double>(rows, 1.0)}, {q_label, r_label},
                        {{false, false}, {false, false}});
        }
        return;
    }

    // A side. Block rows (alpha, v'), columns (b, gamma).
    const std::size_t rows = chi_l * new_dim;
    const std::size_t cols = 2 * chi_r;
    const bool has_right = rpos + 1 < mps.size();
    std::vector<double> lam(chi_r, 1.0);
    if (has_right) {
        const auto w = mps.bond(rpos);
        lam.assign(w.begin(), w.end());
    }
    if (rows >= cols) {
        // R' = block * sqrt(2); q = delta / lambda', right-normal; weights lambda' / sqrt(2).
        SiteTensor<T> r(chi_l, new_dim, cols);
        for (std::size_t x = 0; x < chi_l; ++x) {
            for (std::size_t v = 0; v < d; ++v) {
                for (std::size_t g = 0; g < chi_r; ++g) {
                    r(x, v, g) = R(x, v, g);
                    r(x, targets[v], chi_r + g) = R(x, v, g);
                }
            }
        }
        SiteTensor<T> q(cols, 2, chi_r);
        std::vector<double> weights(cols);
        for (std::size_t b = 0; b < 2; ++b) {
            for (std::size_t g = 0; g < chi_r; ++g) {
                q(b * chi_r + g, b, g) = T(1.0 / lam[g]);
                weights[b * chi_r + g] = lam[g] / std::sqrt(2.0);
            }
        }
        mps.replace(rpos, 1, {std::move(r), std::move(q)}, {std::move(weights)}, {r_label, q_label},
                    {{false, false}, {false, true}});
    } else {
        SiteTensor<T> r(chi_l, new_dim, rows);
        for (std::size_t x = 0; x < chi_l; ++x) {
            for (std::size_t v = 0; v < new_dim; ++v) {
                r(x, v, x * new_dim + v) = T(1);
            }
        }
        SiteTensor<T> q(rows, 2, chi_r);
        for (std::size_t x = 0; x < chi_l; ++x) {
            for (std::size_t v = 0; v < d; ++v) {
                for (std::size_t g = 0; g < chi_r; ++g) {
                    q(x * new_dim + v, 0, g) = R(x, v, g) * h;
                    q(x * new_dim + targets[v], 1, g) = R(x, v, g) * h;
                }
            }
        }
        mps.replace(rpos, 1, {std::move(r), std::move(q)}, {std::vector<double>(rows, 1.0)}, {r_label, q_label},
                    {{false, false}, {false, false}});
    }
}

} // namespace detail

/// Nearest-neighbour QFT with interleaved measurement on a chain of qubits,
/// most significant at site 0. Block b applies H to site 0 and then fused
/// controlled-phase(x = k + 1) + swap gates on (k, k+1), carrying the active
/// qubit to the end of the unmeasured range, where it is measured at once.
/// Returns the bits in measurement order.
inline std::vector<unsigned> lnn_qft(MpsState &state, Rng &rng, std::span<const unsigned> forced_bits = {}) {
    if (state.mode() != ScalarMode::complex) {
        throw InvalidState("lnn_qft: state must be complex");
    }
    const std::size_t n = state.size();
    if (!forced_bits.empty() && forced_bits.size() != n) {
        throw InvalidArgument("lnn_qft: one forced bit per qubit required");
    }
    for (std::size_t m = 0; m < n; ++m) {
        if (state.physical_dim(m) != 2) {
            throw InvalidArgument("lnn_qft: every site must be a qubit");
        }
    }
    const Gate h = Gate::hadamard();
    std::vector<Gate> fused;
    for (unsigned x = 1; x < n; ++x) {
        fused.push_back(Gate::controlled_phase_swap(x));
    }
    std::vector<unsigned> bits;
    for (std::size_t b = 0; b < n; ++b) {
        state.apply_single_qudit_gate(0, h);
        for (std::size_t k = 0; k + 1 + b < n; ++k) {
            state.apply_two_site_gate(k, fused[k]);
        }
        std::optional<std::size_t> forced;
        if (!forced_bits.empty()) {
            forced = forced_bits[b];
        }
        bits.push_back(static_cast<unsigned>(state.measure(n - 1 - b, rng, forced)));
    }
    return bits;
}

/// One pipeline run: modexp, lower-register measurement, QFT.
class ShorSimulation {
  public:
    ShorSimulation(SemiprimeInstance inst, PipelineConfig config) : inst_(std::move(inst)), config_(config) {
        if (config_.max_elements == 0) {
            throw InvalidArgument("max elements must be positive");
        }
        if (inst_.upper_qubits() > 62) {
            throw InvalidArgument("instance too large: 2l must not exceed 62");
        }
    }

    const SemiprimeInstance &instance() const { return inst_; }
    const PipelineConfig &config() const { return config_; }
    const MpsState &state() const { return state_; }
    MpsState &state() { return state_; }
    const LowerRegisterIndex &lower_index() const { return index_; }
    unsigned alpha_hat() const { return alpha_hat_; }
    const std::vector<StageStats> &stages() const { return stages_; }
    const std::vector<RankProfile> &gate_trace() const { return trace_; }

    /// The state is just R in |1>.
    void build_initial() {
        const std::size_t dims[] = {1};
        const std::size_t values[] = {0};
        auto mps = BasicMps<Real>::product_state(dims, values);
        mps.set_labels(0, {SiteLabel::lower()});
        state_ = MpsState(std::move(mps));
        state_.set_element_limit(config_.max_elements);
        index_ = LowerRegisterIndex();
        alpha_hat_ = 0;
        stages_.clear();
        trace_.clear();
    }

    void apply_controlled_modexp(unsigned i, Side side) {
        if (i >= inst_.upper_qubits()) {
            throw InvalidArgument("apply_controlled_modexp: qubit index out of range");
        }
        if (state_.find(SiteLabel::upper(i))) {
            throw InvalidState("qubit q" + std::to_string(i) + " already present");
        }
        const auto rpos = state_.find(SiteLabel::lower());
        if (!rpos) {
            throw InvalidState("lower register is not present");
        }
        const u64 mult = detail::power_of_two_exponent(inst_.a, i, inst_.N);
        const std::size_t d = state_.physical_dim(*rpos);
        std::vector<std::size_t> targets(d);
        for (std::size_t v = 0; v < d; ++v) {
            targets[v] = index_.intern(mul_mod(index_.residue(v), mult, inst_.N));
        }
        state_.set_stage("modexp q" + std::to_string(i));
        state_.visit([&](auto &mps) { detail::controlled_modexp(mps, *rpos, targets, index_.size(), i, side); });
        if (config_.trace_gates) {
            trace_.push_back({"q" + std::to_string(i), state_.bond_dimensions(), state_.layout()});
        }
    }

    /// Rank of the bond between R and its neighbour on `side`.
    std::size_t r_adjacent_rank(Side side) const {
        const auto rpos = state_.find(SiteLabel::lower());
        if (!rpos) {
            throw InvalidState("lower register is not present");
        }
        const auto bonds = state_.bond_dimensions();
        if (side == Side::B) {
            return *rpos == 0 ? 1 : bonds[*rpos - 1];
        }
        return *rpos + 1 == state_.size() ? 1 : bonds[*rpos];
    }

    void run_modexp_static() {
        require_fresh();
        begin_stage();
        for (unsigned i = inst_.upper_qubits(); i-- > 0;) {
            apply_controlled_modexp(i, Side::B);
        }
        end_stage("modexp");
    }

    void run_modexp_dynamic() {
        require_fresh();
        begin_stage();
        std::size_t prev = 1;
        unsigned unchanged = 0;
        bool relocated = false;
        for (unsigned i = inst_.upper_qubits(); i-- > 0;) {
            if (relocated) {
                apply_controlled_modexp(i, Side::A);
                continue;
            }
            apply_controlled_modexp(i, Side::B);
            const std::size_t rank = r_adjacent_rank(Side::B);
            if (rank == prev) {
                ++unchanged;
            } else if (rank > prev && unchanged >= config_.plateau_confirmations) {
                const std::size_t rpos = *state_.find(SiteLabel::lower());
                state_.set_stage("relocate q" + std::to_string(i));
                state_.swap_sites(rpos - 1);
                relocated = true;
                alpha_hat_ = i + 1;
            }
            prev = rank;
        }
        end_stage("modexp");
    }

    void run_modexp() {
        if (config_.layout == Layout::static_order) {
            run_modexp_static();
        } else {
            run_modexp_dynamic();
        }
    }

    /// Measures R, removes it, and returns the residue. The static layout
    /// reads R's density matrix by full contraction; the dynamic layout first
    /// sweeps B into left-normal form so it can be read locally.
    u64 measure_lower_register(Rng &rng, std::optional<u64> forced_residue = std::nullopt) {
        const auto rpos = state_.find(SiteLabel::lower());
        if (!rpos) {
            throw InvalidState("lower register is not present");
        }
        std::optional<std::size_t> forced;
        if (forced_residue) {
            forced = index_.find(*forced_residue);
            if (!forced) {
                throw InvalidArgument("residue " + std::to_string(*forced_residue) + " is not in the lower register");
            }
        }
        begin_stage();
        state_.set_stage("measure R");
        if (config_.layout == Layout::dynamic_order && *rpos > 0) {
            state_.sweep(Direction::right, 0, *rpos);
        }
        const std::size_t outcome = state_.measure(*rpos, rng, forced);
        state_.remove_separable_site(*state_.find(SiteLabel::lower()));
        end_stage("measure");
        return index_.residue(outcome);
    }

    /// Orders the upper qubits q_{2l-1} .. q_0 from site 0 and switches to
    /// complex storage.
    void prepare_qft() {
        if (state_.find(SiteLabel::lower())) {
            throw InvalidState("prepare_qft: lower register must be removed first");
        }
        state_.set_stage("reorder");
        const std::size_t n = state_.size();
        for (std::size_t pass = 0; pass < n; ++pass) {
            bool swapped = false;
            for (std::size_t k = 0; k + 1 < n; ++k) {
                if (state_.labels(k).front().index < state_.labels(k + 1).front().index) {
                    state_.swap_sites(k);
                    swapped = true;
                }
            }
            if (!swapped) {
                break;
            }
        }
        state_.promote_to_complex();
    }

    /// Runs lnn_qft on the upper register as its own stage.
    std::vector<unsigned> apply_lnn_qft(Rng &rng, std::span<const unsigned> forced_bits = {}) {
        begin_stage();
        state_.set_stage("qft");
        auto bits = lnn_qft(state_, rng, forced_bits);
        end_stage("qft");
        return bits;
    }

    /// Amplitudes after modexp in the dense oracle's order (x * r + j).
    std::vector<Complex> amplitudes_in_oracle_order() const {
        const u64 r = multiplicative_order(inst_.a, inst_.N);
        if (index_.size() != r) {
            throw InvalidState("lower register has not reached dimension r");
        }
        std::unordered_map<u64, u64> exponent;
        u64 v = 1;
        for (u64 j = 0; j < r; ++j) {
            exponent[v] = j;
            v = mul_mod(v, inst_.a, inst_.N);
        }
        const auto raw = state_.to_state_vector(config_.dense_cap);
        const std::size_t n = state_.size();
        std::vector<std::size_t> dims(n);
        for (std::size_t m = 0; m < n; ++m) {
            dims[m] = state_.physical_dim(m);
        }
        std::vector<Complex> out((u64{1} << inst_.upper_qubits()) * r, Complex(0.0));
        std::vector<std::size_t> digits(n, 0);
        for (std::size_t flat = 0; flat < raw.size(); ++flat) {
            u64 x = 0;
            u64 j = 0;
            for (std::size_t m = 0; m < n; ++m) {
                const SiteLabel &lab = state_.labels(m).front();
                if (lab.kind == SiteLabel::Kind::lower) {
                    j = exponent.at(index_.residue(digits[m]));
                } else {
                    x |= u64{digits[m]} << lab.index;
                }
            }
            out[x * r + j] = raw[flat];
            for (std::size_t m = n; m-- > 0;) {
                if (++digits[m] < dims[m]) {
                    break;
                }
                digits[m] = 0;
            }
        }
        return out;
    }

  private:
    void require_fresh() const {
        if (state_.size() != 1 || !state_.find(SiteLabel::lower())) {
            throw InvalidState("modexp requires the freshly built initial state");
        }
    }

    void begin_stage() {
        state_.reset_peak();
        stage_start_ = std::chrono::steady_clock::now();
    }

    void end_stage(const std::string &name) {
        StageStats st;
        st.stage = name;
        st.live_units = state_.live_units();
        st.peak_units = state_.peak_units();
        st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - stage_start_).count();
        if (config_.profile_ranks) {
            st.ranks = state_.schmidt_ranks(name);
        }
        stages_.push_back(std::move(st));
    }

    SemiprimeInstance inst_;
    PipelineConfig config_;
    MpsState state_;
    LowerRegisterIndex index_;
    unsigned alpha_hat_ = 0;
    std::vector<StageStats> stages_;
    std::vector<RankProfile> trace_;
    std::chrono::steady_clock::time_point stage_start_{};
};

/// Continued fractions of s / 2^(2l); the first denominator k with a^k = 1
/// becomes the order candidate, and factor recovery is attempted with it.
inline void postprocess(SampleRecord &rec) {
    const u64 Q = u64{1} << (2 * rec.l);
    rec.convergents = continued_fraction_convergents(rec.s, Q);
    for (const auto &c : rec.convergents) {
        if (c.denominator >= 1 && mod_pow(rec.a, c.denominator, rec.N) == 1) {
            rec.r_candidate = c.denominator;
            break;
        }
    }
    if (rec.r_candidate) {
        rec.factors = recover_factors(rec.N, rec.a, *rec.r_candidate);
    }
}

/// Measurement, QFT and classical postprocessing on a copy of a simulation
/// whose modexp stage has completed.
inline SampleRecord sample_from(const ShorSimulation &prepared, Rng &rng) {
    ShorSimulation sim = prepared;
    SampleRecord rec;
    rec.N = sim.instance().N;
    rec.a = sim.instance().a;
    rec.l = sim.instance().l;
    rec.layout = sim.config().layout;
    rec.seed = sim.config().seed;
    rec.alpha_hat = sim.alpha_hat();
    rec.lower_dim = sim.lower_index().size();
    rec.residue = sim.measure_lower_register(rng);
    sim.prepare_qft();
    rec.bits = sim.apply_lnn_qft(rng);
    rec.s = assemble_s(rec.bits, sim.instance().upper_qubits());
    rec.stages = sim.stages();
    postprocess(rec);
    return rec;
}

/// Full pipeline. A memory-limit failure redraws a (at most config.retries
/// times) using the same generator.
inline SampleRecord sample_run(SemiprimeInstance inst, const PipelineConfig &config, Rng &rng) {
    for (unsigned attempt = 0;; ++attempt) {
        try {
            ShorSimulation sim(inst, config);
            sim.build_initial();
            sim.run_modexp();
            SampleRecord rec = sample_from(sim, rng);
            rec.attempts = attempt + 1;
            return rec;
        } catch (const MemoryLimit &) {
            if (attempt >= config.retries) {
                throw;
            }
            inst.a = random_coprime(inst.N, rng).a;
        }
    }
}

} // namespace shor_mps
