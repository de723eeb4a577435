#pragma once

// What a set of parties can infer from Bell outcomes they have seen.
//
// Replays the ordered event log at the label level. Every live Bell pair carries an
// affine GF(2) expression over unknown labels: variable 0 is the dealer's operation,
// further variables are Bell outcomes the reader did not see. Measuring two qubits of
// different pairs (swapping) introduces the outcome m and rewires
//   (a,c)[A], (b,d)[B]  ->  (a,b)[m], (c,d)[A ^ B ^ m]
// while measuring a pair that is already matched is deterministic and, if the
// outcome is seen, yields the equation expr = m. A quantity is known exactly when its
// expression lies in the span of the equations.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qss/bell.hpp"
#include "qss/errors.hpp"
#include "qss/transcript.hpp"

namespace qss {

/// XOR of a subset of unknowns plus a constant label.
struct LabelExpr {
    std::uint64_t vars = 0;
    BellLabel constant;

    LabelExpr operator^(const LabelExpr& o) const { return {vars ^ o.vars, constant ^ o.constant}; }
    LabelExpr& operator^=(const LabelExpr& o) {
        vars ^= o.vars;
        constant ^= o.constant;
        return *this;
    }
    bool operator==(const LabelExpr&) const = default;
};

struct Inference {
    /// Set iff the queried quantity is fully determined.
    std::optional<BellLabel> value;
    /// Value with every undetermined unknown set to the identity label.
    BellLabel best_guess;
};

class ChainSolver {
public:
    static constexpr int kSecretVar = 0;

    /// `seen(event)` decides whether the reader knows that event's outcome.
    template <typename SeenFn>
    ChainSolver(std::span<const QuantumEvent> events, SeenFn seen) {
        outcome_.resize(events.size());
        for (std::size_t i = 0; i < events.size(); ++i) replay(i, events[i], seen(events[i]));
    }

    /// False once a pair was broken by a single-qubit measurement and its qubits
    /// were later Bell-measured: labels no longer describe the state.
    bool consistent() const { return !broken_; }

    /// The label the dealer's operation shifted.
    Inference secret() const { return infer({std::uint64_t{1} << kSecretVar, kPhiPlus}); }

    /// XOR of the outcomes of the given events.
    Inference outcomes_xor(std::span<const std::size_t> event_indices) const {
        LabelExpr q;
        for (std::size_t i : event_indices) {
            if (!outcome_.at(i)) throw InputError("event " + std::to_string(i) + " has no outcome");
            q ^= *outcome_[i];
        }
        return infer(q);
    }

    /// Outcome of event `i` in terms of the unknowns, if it was a Bell measurement.
    const std::optional<LabelExpr>& outcome(std::size_t i) const { return outcome_.at(i); }

    Inference infer(LabelExpr query) const {
        if (broken_) return {std::nullopt, kPhiPlus};
        // Rows in reduced echelon form, reduce the query against them.
        auto rows = equations_;
        std::vector<int> pivots;
        std::size_t rank = 0;
        for (int col = 0; col < 64 && rank < rows.size(); ++col) {
            const std::uint64_t mask = std::uint64_t{1} << col;
            std::size_t sel = rank;
            while (sel < rows.size() && !(rows[sel].vars & mask)) ++sel;
            if (sel == rows.size()) continue;
            std::swap(rows[rank], rows[sel]);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (r != rank && (rows[r].vars & mask)) rows[r] ^= rows[rank];
            }
            pivots.push_back(col);
            ++rank;
        }
        // Each row states vars . x = constant.
        BellLabel value = query.constant;
        std::uint64_t residual = query.vars;
        for (std::size_t r = 0; r < rank; ++r) {
            const std::uint64_t mask = std::uint64_t{1} << pivots[r];
            if (residual & mask) {
                residual ^= rows[r].vars;
                value ^= rows[r].constant;
            }
        }
        if (residual == 0) return {value, value};
        return {std::nullopt, value};
    }

private:
    struct Slot {
        QubitId partner;
        LabelExpr expr;
    };

    template <typename Seen>
    void replay(std::size_t index, const QuantumEvent& e, Seen seen) {
        const auto [qa, qb] = e.qubits;
        switch (e.kind) {
            case EventKind::prepare: link(qa, qb, {0, e.label}); break;
            case EventKind::regenerate: {
                const auto it = stash_.find(key(e.source.first, e.source.second));
                if (it == stash_.end()) {
                    broken_ = true;
                    break;
                }
                link(qa, qb, it->second);
                break;
            }
            case EventKind::encode: {
                const auto it = pairs_.find(qa);
                if (it == pairs_.end()) {
                    broken_ = true;
                    break;
                }
                const LabelExpr shifted = it->second.expr ^ LabelExpr{std::uint64_t{1} << kSecretVar, kPhiPlus};
                link(qa, it->second.partner, shifted);
                break;
            }
            case EventKind::bell_measure: measure(index, e, seen); break;
            case EventKind::single_measure: {
                const auto it = pairs_.find(qa);
                if (it != pairs_.end()) {
                    stash_[key(qa, it->second.partner)] = it->second.expr;
                    pairs_.erase(it->second.partner);
                    pairs_.erase(qa);
                }
                break;
            }
            case EventKind::discard: {
                unlink(qa);
                unlink(qb);
                break;
            }
        }
    }

    template <typename Seen>
    void measure(std::size_t index, const QuantumEvent& e, Seen seen) {
        const auto [qa, qb] = e.qubits;
        const auto ia = pairs_.find(qa);
        const auto ib = pairs_.find(qb);
        if (ia == pairs_.end() || ib == pairs_.end()) {
            broken_ = true;
            return;
        }
        if (ia->second.partner == qb) {
            const LabelExpr expr = ia->second.expr;
            outcome_[index] = expr;
            if (seen) equations_.push_back(expr ^ LabelExpr{0, e.label});
        } else {
            const QubitId c = ia->second.partner;
            const QubitId d = ib->second.partner;
            const LabelExpr rest = ia->second.expr ^ ib->second.expr;
            LabelExpr m{0, e.label};
            if (!seen) {
                if (next_var_ >= 64) throw InputError("knowledge solver: too many unknowns");
                m = LabelExpr{std::uint64_t{1} << next_var_++, kPhiPlus};
            }
            outcome_[index] = m;
            link(qa, qb, m);
            link(c, d, rest ^ m);
        }
        if (!e.nondemolition) {
            pairs_.erase(qa);
            pairs_.erase(qb);
        }
    }

    void link(QubitId a, QubitId b, LabelExpr expr) {
        pairs_[a] = {b, expr};
        pairs_[b] = {a, expr};
    }

    void unlink(QubitId q) {
        const auto it = pairs_.find(q);
        if (it == pairs_.end()) return;
        const QubitId partner = it->second.partner;
        pairs_.erase(it);
        const auto jt = pairs_.find(partner);
        if (jt != pairs_.end() && jt->second.partner == q) pairs_.erase(jt);
    }

    static std::pair<QubitId, QubitId> key(QubitId a, QubitId b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

    std::map<QubitId, Slot> pairs_;
    std::map<std::pair<QubitId, QubitId>, LabelExpr> stash_;
    std::vector<LabelExpr> equations_;
    std::vector<std::optional<LabelExpr>> outcome_;
    int next_var_ = 1;
    bool broken_ = false;
};

}  // namespace qss
