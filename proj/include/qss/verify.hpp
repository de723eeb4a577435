#pragma once

// Oracle checks of the label algebra, shared by the `verify` command and the tests.

#include <array>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qss/bell.hpp"
#include "qss/qstate.hpp"

namespace qss::verify {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Label of a 2-qubit state that is a Bell state up to phase; nullopt otherwise.
inline std::optional<BellLabel> read_bell_label(const PureState& state, QubitId qa, QubitId qb, double tol = 1e-12) {
    const auto overlaps = state.bell_decomposition(qa, qb);
    for (BellLabel l : kAllBellLabels) {
        if (std::abs(std::abs(overlaps[l.index()]) - 1.0) <= tol) return l;
    }
    return std::nullopt;
}

/// Pairs (1,2) and (3,4), Bell outcome `measured` on (2,3) post-selected: what
/// does the oracle leave on (1,4), and with which probability.
struct SwapCase {
    BellLabel l_ab, l_cd, measured;
    BellLabel predicted;
    std::optional<BellLabel> oracle;
    double probability = 0.0;
};

inline SwapCase oracle_swap(BellLabel l_ab, BellLabel l_cd, BellLabel measured) {
    const QubitId a{1}, b{2}, c{3}, d{4};
    PureState s;
    s.add_bell_pair(a, b, l_ab);
    s.add_bell_pair(c, d, l_cd);
    SwapCase out{l_ab, l_cd, measured, swap_outcome(l_ab, l_cd, measured), std::nullopt, 0.0};
    out.probability = s.project_bell(b, c, measured);
    out.oracle = read_bell_label(s, a, d);
    return out;
}

inline std::vector<SwapCase> swap_table() {
    std::vector<SwapCase> out;
    for (BellLabel x : kAllBellLabels) {
        for (BellLabel y : kAllBellLabels) {
            for (BellLabel m : kAllBellLabels) out.push_back(oracle_swap(x, y, m));
        }
    }
    return out;
}

inline std::vector<CheckResult> check_swap_table() {
    std::vector<CheckResult> out;
    for (const auto& c : swap_table()) {
        CheckResult r;
        r.name = "swap " + std::string(to_string(c.l_ab)) + " x " + std::string(to_string(c.l_cd)) + " | " +
                 std::string(to_string(c.measured));
        r.pass = c.oracle && *c.oracle == c.predicted && std::abs(c.probability - 0.25) < 1e-12;
        r.detail = "predicted " + std::string(to_string(c.predicted)) + ", oracle " +
                   (c.oracle ? std::string(to_string(*c.oracle)) : std::string("not a Bell state")) +
                   ", p=" + std::to_string(c.probability);
        out.push_back(r);
    }
    return out;
}

/// One of the three printed swapping identities: a product of two Bell pairs
/// expanded over a regrouped pairing, with the four terms the expansion lists.
struct Identity {
    std::string name;
    QubitPair pair1;
    BellLabel label1;
    QubitPair pair2;
    BellLabel label2;
    QubitPair regroup1;
    QubitPair regroup2;
    std::array<std::pair<BellLabel, BellLabel>, 4> terms;
};

inline std::vector<Identity> printed_identities() {
    auto q = [](int n) { return QubitId{n}; };
    return {
        {"phi-(1,2) psi-(7,8) over (1,8),(2,7)",
         {q(1), q(2)}, kPhiMinus, {q(7), q(8)}, kPsiMinus, {q(1), q(8)}, {q(2), q(7)},
         {{{kPhiMinus, kPsiMinus}, {kPhiPlus, kPsiPlus}, {kPsiMinus, kPhiMinus}, {kPsiPlus, kPhiPlus}}}},
        {"psi+(2,7) psi-(3,4) over (2,3),(4,7)",
         {q(2), q(7)}, kPsiPlus, {q(3), q(4)}, kPsiMinus, {q(2), q(3)}, {q(4), q(7)},
         {{{kPhiMinus, kPhiPlus}, {kPhiPlus, kPhiMinus}, {kPsiPlus, kPsiMinus}, {kPsiMinus, kPsiPlus}}}},
        {"phi+(4,7) psi-(5,6) over (4,5),(6,7)",
         {q(4), q(7)}, kPhiPlus, {q(5), q(6)}, kPsiMinus, {q(4), q(5)}, {q(6), q(7)},
         {{{kPhiMinus, kPsiPlus}, {kPhiPlus, kPsiMinus}, {kPsiPlus, kPhiMinus}, {kPsiMinus, kPhiPlus}}}},
    };
}

inline BellTable identity_table(const Identity& id) {
    PureState s;
    s.add_bell_pair(id.pair1.first, id.pair1.second, id.label1);
    s.add_bell_pair(id.pair2.first, id.pair2.second, id.label2);
    return s.bell_coefficients(id.regroup1, id.regroup2);
}

inline CheckResult check_identity(const Identity& id, double tol = 1e-12) {
    const BellTable t = identity_table(id);
    int nonzero = 0;
    bool ok = true;
    double sum_sq = 0;
    for (BellLabel x : kAllBellLabels) {
        for (BellLabel y : kAllBellLabels) {
            const double mag = std::abs(t[x.index()][y.index()]);
            sum_sq += mag * mag;
            bool listed = false;
            for (const auto& [tx, ty] : id.terms) listed = listed || (tx == x && ty == y);
            if (listed) {
                ok = ok && std::abs(mag - 0.5) <= tol;
            } else {
                ok = ok && mag <= tol;
            }
            if (mag > tol) ++nonzero;
        }
    }
    ok = ok && nonzero == 4 && std::abs(sum_sq - 1.0) <= tol;
    return {id.name, ok, std::to_string(nonzero) + " nonzero terms, norm^2=" + std::to_string(sum_sq)};
}

inline std::vector<CheckResult> check_identities() {
    std::vector<CheckResult> out;
    for (const auto& id : printed_identities()) out.push_back(check_identity(id));
    return out;
}

/// u_k applied to qubit 1 of Psi-(1,2), k = 1..4.
inline std::array<PureState, 4> dense_coding_states() {
    std::array<PureState, 4> out;
    for (PauliOp op : kAllPauliOps) {
        PureState s;
        s.add_bell_pair(QubitId{1}, QubitId{2}, kPsiMinus);
        s.apply(QubitId{1}, op);
        out[static_cast<std::size_t>(op.kind())] = std::move(s);
    }
    return out;
}

inline std::vector<CheckResult> check_dense_coding(double tol = 1e-12) {
    std::vector<CheckResult> out;
    const auto states = dense_coding_states();
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = a + 1; b < 4; ++b) {
            const double ip = std::abs(inner_product(states[a].amplitudes(), states[b].amplitudes()));
            out.push_back({"orthogonal " + std::string(kAllPauliOps[a].name()) + "," + std::string(kAllPauliOps[b].name()),
                           ip < tol, "|<a|b>|=" + std::to_string(ip)});
        }
    }
    return out;
}

/// Each u_k . Psi- is the Bell state pauli_action_on_bell predicts.
inline std::vector<CheckResult> check_dense_coding_labels() {
    std::vector<CheckResult> out;
    const auto states = dense_coding_states();
    for (std::size_t k = 0; k < 4; ++k) {
        const auto label = read_bell_label(states[k], QubitId{1}, QubitId{2});
        const BellLabel expected = pauli_action_on_bell(kAllPauliOps[k], kPsiMinus);
        out.push_back({"label " + std::string(kAllPauliOps[k].name()) + " psi-", label && *label == expected,
                       "expected " + std::string(to_string(expected)) + ", oracle " +
                           (label ? std::string(to_string(*label)) : std::string("none"))});
    }
    return out;
}

inline void write_checks(std::ostream& os, const std::string& title, const std::vector<CheckResult>& checks) {
    int passed = 0;
    for (const auto& c : checks) {
        os << (c.pass ? "PASS " : "FAIL ") << c.name << "  (" << c.detail << ")\n";
        passed += c.pass ? 1 : 0;
    }
    os << title << ": " << passed << "/" << checks.size() << " pass\n";
}

inline void write_swap_table_csv(std::ostream& os) {
    os << "l_ab,l_cd,l_meas,l_out\n";
    for (BellLabel x : kAllBellLabels) {
        for (BellLabel y : kAllBellLabels) {
            for (BellLabel m : kAllBellLabels) {
                os << to_string(x) << ',' << to_string(y) << ',' << to_string(m) << ',' << to_string(swap_outcome(x, y, m))
                   << '\n';
            }
        }
    }
}

}  // namespace qss::verify
