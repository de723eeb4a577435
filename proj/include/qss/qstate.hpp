#pragma once

// Dense pure-state simulator over labelled qubits. Small (<= 12 qubits) and exact;
// it is the ground truth for the label algebra in bell.hpp.
//
// Bit order: amplitude index bit (n-1-k) holds the value of qubits()[k], i.e. the
// first qubit in the list is the most significant bit.
//
// Measured qubits that are consumed are factored out of the amplitude vector and
// tombstoned: their ids stay reserved and any further use is a StateError.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qss/bell.hpp"
#include "qss/errors.hpp"
#include "qss/rng.hpp"

namespace qss {

using Amplitude = std::complex<double>;

/// Qubit number as used in the protocol diagrams (1..2(n+1)); `generation` counts
/// re-preparations of the same slot after a detection round.
struct QubitId {
    int number = 0;
    int generation = 0;

    constexpr auto operator<=>(const QubitId&) const = default;
};

inline std::string to_string(QubitId q) {
    std::string s = std::to_string(q.number);
    if (q.generation > 0) s += "~" + std::to_string(q.generation);
    return s;
}

using QubitPair = std::pair<QubitId, QubitId>;

enum class LocalOp : std::uint8_t { u1, u2, u3, u4, hadamard };

constexpr LocalOp to_local_op(PauliOp op) { return static_cast<LocalOp>(op.kind()); }

enum class Consume : std::uint8_t { no, yes };

/// Amplitudes of Bell state `label` over |00>,|01>,|10>,|11> (first qubit most significant).
inline std::array<Amplitude, 4> bell_vector(BellLabel label) {
    const double s = 1.0 / std::sqrt(2.0);
    if (label == kPhiPlus) return {s, 0, 0, s};
    if (label == kPhiMinus) return {s, 0, 0, -s};
    if (label == kPsiPlus) return {0, s, s, 0};
    return {0, s, -s, 0};
}

/// 2x2 matrix, row-major: {m00, m01, m10, m11}.
inline std::array<Amplitude, 4> local_op_matrix(LocalOp op) {
    const double h = 1.0 / std::sqrt(2.0);
    switch (op) {
        case LocalOp::u1: return {1, 0, 0, 1};
        case LocalOp::u2: return {1, 0, 0, -1};
        case LocalOp::u3: return {0, 1, 1, 0};
        case LocalOp::u4: return {0, 1, -1, 0};
        case LocalOp::hadamard: return {h, h, h, -h};
    }
    return {1, 0, 0, 1};
}

/// <psi| for the basis state `bit` in `basis` (bit 0 = |0> or |+>).
inline std::array<Amplitude, 2> basis_vector(Basis basis, bool bit) {
    if (basis == Basis::rectilinear) return bit ? std::array<Amplitude, 2>{0, 1} : std::array<Amplitude, 2>{1, 0};
    const double h = 1.0 / std::sqrt(2.0);
    return bit ? std::array<Amplitude, 2>{h, -h} : std::array<Amplitude, 2>{h, h};
}

/// Coefficients <B_i (x) B_j | psi> in a Bell (x) Bell product basis; rows index the
/// first pair's label, columns the second's (BellLabel::index order).
using BellTable = std::array<std::array<Amplitude, 4>, 4>;

class PureState {
public:
    static constexpr std::size_t kMaxQubits = 12;

    /// Empty register: zero qubits, scalar amplitude 1.
    PureState() : amps_{Amplitude{1.0, 0.0}} {}

    std::size_t num_qubits() const { return qubits_.size(); }
    std::span<const QubitId> qubits() const { return qubits_; }
    std::span<const Amplitude> amplitudes() const { return amps_; }
    std::span<const QubitId> consumed_qubits() const { return consumed_; }

    bool contains(QubitId q) const { return std::find(qubits_.begin(), qubits_.end(), q) != qubits_.end(); }
    bool is_consumed(QubitId q) const { return std::find(consumed_.begin(), consumed_.end(), q) != consumed_.end(); }

    double norm() const {
        double s = 0;
        for (const auto& a : amps_) s += std::norm(a);
        return std::sqrt(s);
    }

    void add_bell_pair(QubitId qa, QubitId qb, BellLabel label) {
        if (qa == qb) throw InputError("add_bell_pair: qubit " + to_string(qa) + " used twice");
        for (QubitId q : {qa, qb}) {
            if (contains(q) || is_consumed(q)) throw InputError("add_bell_pair: duplicate qubit id " + to_string(q));
        }
        if (qubits_.size() + 2 > kMaxQubits) {
            throw InputError("add_bell_pair: register limited to " + std::to_string(kMaxQubits) + " qubits");
        }
        const auto bell = bell_vector(label);
        std::vector<Amplitude> next(amps_.size() * 4);
        for (std::size_t r = 0; r < amps_.size(); ++r) {
            for (std::size_t k = 0; k < 4; ++k) next[r * 4 + k] = amps_[r] * bell[k];
        }
        amps_ = std::move(next);
        qubits_.push_back(qa);
        qubits_.push_back(qb);
    }

    /// Appends an unentangled qubit in basis state `bit` of `basis`.
    void add_basis_qubit(QubitId q, Basis basis, bool bit) {
        if (contains(q) || is_consumed(q)) throw InputError("add_basis_qubit: duplicate qubit id " + to_string(q));
        if (qubits_.size() + 1 > kMaxQubits) {
            throw InputError("add_basis_qubit: register limited to " + std::to_string(kMaxQubits) + " qubits");
        }
        const auto ket = basis_vector(basis, bit);
        std::vector<Amplitude> next(amps_.size() * 2);
        for (std::size_t r = 0; r < amps_.size(); ++r) {
            next[r * 2] = amps_[r] * ket[0];
            next[r * 2 + 1] = amps_[r] * ket[1];
        }
        amps_ = std::move(next);
        qubits_.push_back(q);
    }

    void apply(QubitId q, LocalOp op) {
        const std::size_t bit = bit_of(position_of(q, "apply"));
        const auto m = local_op_matrix(op);
        const std::size_t mask = std::size_t{1} << bit;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & mask) continue;
            const Amplitude a0 = amps_[i];
            const Amplitude a1 = amps_[i | mask];
            amps_[i] = m[0] * a0 + m[1] * a1;
            amps_[i | mask] = m[2] * a0 + m[3] * a1;
        }
    }

    void apply(QubitId q, PauliOp op) { apply(q, to_local_op(op)); }

    /// Born probabilities of the four Bell outcomes on (qa, qb).
    std::array<double, 4> bell_probabilities(QubitId qa, QubitId qb) const {
        std::array<double, 4> p{};
        for (BellLabel l : kAllBellLabels) {
            double s = 0;
            for (const auto& c : contract_pair(qa, qb, bell_vector(l))) s += std::norm(c);
            p[l.index()] = s;
        }
        return p;
    }

    /// Post-selects Bell outcome `label` on (qa, qb) and renormalizes. Returns the
    /// probability of that outcome; throws StateError if it is zero.
    double project_bell(QubitId qa, QubitId qb, BellLabel label, Consume consume = Consume::yes) {
        const auto bell = bell_vector(label);
        auto reduced = contract_pair(qa, qb, bell);
        double p = 0;
        for (const auto& c : reduced) p += std::norm(c);
        if (p < 1e-24) throw StateError("project_bell: outcome " + std::string(to_string(label)) + " has probability 0");
        const double scale = 1.0 / std::sqrt(p);
        for (auto& c : reduced) c *= scale;
        if (consume == Consume::yes) {
            remove_qubits(qa, qb, std::move(reduced));
        } else {
            // Re-expand: the measured pair is left in the Bell state it was projected to.
            const std::size_t ba = bit_of(position_of(qa, "project_bell"));
            const std::size_t bb = bit_of(position_of(qb, "project_bell"));
            for (std::size_t i = 0; i < amps_.size(); ++i) {
                const std::size_t k = (((i >> ba) & 1u) << 1) | ((i >> bb) & 1u);
                amps_[i] = bell[k] * reduced[remove_two_bits(i, ba, bb)];
            }
        }
        return p;
    }

    BellLabel measure_bell(QubitId qa, QubitId qb, Rng& rng, Consume consume = Consume::yes) {
        const auto p = bell_probabilities(qa, qb);
        const BellLabel outcome = BellLabel::from_index(sample(p, rng));
        project_bell(qa, qb, outcome, consume);
        return outcome;
    }

    /// Probability that measuring `q` in `basis` gives `bit`.
    double qubit_probability(QubitId q, Basis basis, bool bit) const {
        double p = 0;
        for (const auto& c : contract_one(q, basis_vector(basis, bit))) p += std::norm(c);
        return p;
    }

    /// Single-qubit measurement, bit 0 = |0> or |+>. Without consumption the qubit is
    /// left in the observed basis state.
    bool measure_qubit(QubitId q, Basis basis, Rng& rng, Consume consume = Consume::yes) {
        const double p0 = qubit_probability(q, basis, false);
        const bool bit = sample(std::array<double, 2>{p0, 1.0 - p0}, rng) == 1;
        const auto ket = basis_vector(basis, bit);
        auto reduced = contract_one(q, ket);
        double p = 0;
        for (const auto& c : reduced) p += std::norm(c);
        const double scale = 1.0 / std::sqrt(p);
        for (auto& c : reduced) c *= scale;
        if (consume == Consume::yes) {
            remove_qubit(q, std::move(reduced));
        } else {
            const std::size_t b = bit_of(position_of(q, "measure_qubit"));
            for (std::size_t i = 0; i < amps_.size(); ++i) {
                amps_[i] = ket[(i >> b) & 1u] * reduced[remove_bit(i, b)];
            }
        }
        return bit;
    }

    /// Removes a qubit that is known to be unentangled (e.g. just measured without
    /// consumption) by projecting it onto its basis state.
    void discard(QubitId q, Basis basis, bool bit) {
        auto reduced = contract_one(q, basis_vector(basis, bit));
        remove_qubit(q, std::move(reduced));
    }

    /// Requires exactly the four pairing qubits to be live.
    BellTable bell_coefficients(QubitPair first, QubitPair second) const {
        const std::array<QubitId, 4> wanted{first.first, first.second, second.first, second.second};
        if (qubits_.size() != 4) {
            throw InputError("bell_coefficients: expected a 4-qubit state, have " + std::to_string(qubits_.size()));
        }
        std::array<std::size_t, 4> bits{};
        for (std::size_t k = 0; k < 4; ++k) {
            if (!contains(wanted[k])) throw InputError("bell_coefficients: qubit " + to_string(wanted[k]) + " not in state");
            bits[k] = bit_of(position_of(wanted[k], "bell_coefficients"));
        }
        for (std::size_t a = 0; a < 4; ++a) {
            for (std::size_t b = a + 1; b < 4; ++b) {
                if (wanted[a] == wanted[b]) throw InputError("bell_coefficients: pairing repeats a qubit");
            }
        }
        BellTable table{};
        for (BellLabel li : kAllBellLabels) {
            const auto bi = bell_vector(li);
            for (BellLabel lj : kAllBellLabels) {
                const auto bj = bell_vector(lj);
                Amplitude sum = 0;
                for (std::size_t idx = 0; idx < amps_.size(); ++idx) {
                    const std::size_t a = (idx >> bits[0]) & 1u, b = (idx >> bits[1]) & 1u;
                    const std::size_t c = (idx >> bits[2]) & 1u, d = (idx >> bits[3]) & 1u;
                    sum += std::conj(bi[2 * a + b] * bj[2 * c + d]) * amps_[idx];
                }
                table[li.index()][lj.index()] = sum;
            }
        }
        return table;
    }

    /// Overlaps <B_l|psi> for a state holding exactly the two qubits (qa, qb).
    std::array<Amplitude, 4> bell_decomposition(QubitId qa, QubitId qb) const {
        if (qubits_.size() != 2) {
            throw InputError("bell_decomposition: expected a 2-qubit state, have " + std::to_string(qubits_.size()));
        }
        std::array<Amplitude, 4> out{};
        for (BellLabel l : kAllBellLabels) out[l.index()] = contract_pair(qa, qb, bell_vector(l)).front();
        return out;
    }

    /// Amplitudes re-ordered so that `order[k]` is the k-th (most significant first) qubit.
    std::vector<Amplitude> amplitudes_in_order(std::span<const QubitId> order) const {
        if (order.size() != qubits_.size()) throw InputError("amplitudes_in_order: qubit sets differ");
        std::vector<std::size_t> src_bit(order.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (!contains(order[k])) throw InputError("amplitudes_in_order: qubit sets differ");
            src_bit[k] = bit_of(position_of(order[k], "amplitudes_in_order"));
        }
        const std::size_t n = order.size();
        std::vector<Amplitude> out(amps_.size());
        for (std::size_t dst = 0; dst < out.size(); ++dst) {
            std::size_t src = 0;
            for (std::size_t k = 0; k < n; ++k) {
                if ((dst >> (n - 1 - k)) & 1u) src |= std::size_t{1} << src_bit[k];
            }
            out[dst] = amps_[src];
        }
        return out;
    }

private:
    std::size_t position_of(QubitId q, const char* op) const {
        const auto it = std::find(qubits_.begin(), qubits_.end(), q);
        if (it != qubits_.end()) return static_cast<std::size_t>(it - qubits_.begin());
        if (is_consumed(q)) throw StateError(std::string(op) + ": qubit " + to_string(q) + " already consumed");
        throw InputError(std::string(op) + ": unknown qubit " + to_string(q));
    }

    std::size_t bit_of(std::size_t position) const { return qubits_.size() - 1 - position; }

    static std::size_t remove_bit(std::size_t i, std::size_t b) {
        return ((i >> (b + 1)) << b) | (i & ((std::size_t{1} << b) - 1));
    }
    static std::size_t remove_two_bits(std::size_t i, std::size_t b1, std::size_t b2) {
        const auto [lo, hi] = std::minmax(b1, b2);
        return remove_bit(remove_bit(i, hi), lo);
    }

    /// <bra|_(qa,qb) psi, indexed by the remaining qubits in register order.
    std::vector<Amplitude> contract_pair(QubitId qa, QubitId qb, const std::array<Amplitude, 4>& ket) const {
        if (qa == qb) throw InputError("Bell measurement needs two distinct qubits");
        const std::size_t ba = bit_of(position_of(qa, "bell measurement"));
        const std::size_t bb = bit_of(position_of(qb, "bell measurement"));
        std::vector<Amplitude> out(amps_.size() / 4);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            const std::size_t k = (((i >> ba) & 1u) << 1) | ((i >> bb) & 1u);
            out[remove_two_bits(i, ba, bb)] += std::conj(ket[k]) * amps_[i];
        }
        return out;
    }

    std::vector<Amplitude> contract_one(QubitId q, const std::array<Amplitude, 2>& ket) const {
        const std::size_t b = bit_of(position_of(q, "qubit measurement"));
        std::vector<Amplitude> out(amps_.size() / 2);
        for (std::size_t i = 0; i < amps_.size(); ++i) out[remove_bit(i, b)] += std::conj(ket[(i >> b) & 1u]) * amps_[i];
        return out;
    }

    void remove_qubits(QubitId qa, QubitId qb, std::vector<Amplitude> reduced) {
        std::erase(qubits_, qa);
        std::erase(qubits_, qb);
        consumed_.push_back(qa);
        consumed_.push_back(qb);
        amps_ = std::move(reduced);
    }

    void remove_qubit(QubitId q, std::vector<Amplitude> reduced) {
        std::erase(qubits_, q);
        consumed_.push_back(q);
        amps_ = std::move(reduced);
    }

    template <std::size_t N>
    static std::size_t sample(const std::array<double, N>& probs, Rng& rng) {
        double total = 0;
        for (double p : probs) total += p;
        const double r = rng.uniform() * total;
        double acc = 0;
        std::size_t last_nonzero = 0;
        for (std::size_t k = 0; k < N; ++k) {
            if (probs[k] <= 0) continue;
            last_nonzero = k;
            acc += probs[k];
            if (r < acc) return k;
        }
        return last_nonzero;
    }

    std::vector<QubitId> qubits_;
    std::vector<QubitId> consumed_;
    std::vector<Amplitude> amps_;
};

// Value-returning forms.

inline PureState new_register() { return PureState{}; }

inline PureState add_bell_pair(PureState state, QubitId qa, QubitId qb, BellLabel label) {
    state.add_bell_pair(qa, qb, label);
    return state;
}

inline PureState apply_op(PureState state, QubitId q, LocalOp op) {
    state.apply(q, op);
    return state;
}

inline std::pair<BellLabel, PureState> measure_bell(PureState state, QubitId qa, QubitId qb, Rng& rng) {
    const BellLabel outcome = state.measure_bell(qa, qb, rng);
    return {outcome, std::move(state)};
}

inline std::pair<bool, PureState> measure_qubit(PureState state, QubitId q, Basis basis, Rng& rng) {
    const bool bit = state.measure_qubit(q, basis, rng);
    return {bit, std::move(state)};
}

inline BellTable bell_coefficients(const PureState& state, QubitPair first, QubitPair second) {
    return state.bell_coefficients(first, second);
}

inline Amplitude inner_product(std::span<const Amplitude> a, std::span<const Amplitude> b) {
    Amplitude s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

/// True iff some unit complex c gives max_i |s1_i - c * s2_i| <= tol. Qubit order may differ.
inline bool equal_up_to_global_phase(const PureState& s1, const PureState& s2, double tol) {
    if (s1.num_qubits() != s2.num_qubits()) throw InputError("equal_up_to_global_phase: qubit sets differ");
    const auto a = s1.amplitudes();
    const auto b = s2.amplitudes_in_order(s1.qubits());
    const Amplitude overlap = inner_product(b, a);
    const Amplitude c = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Amplitude{1.0, 0.0};
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - c * b[i]));
    return worst <= tol;
}

}  // namespace qss
