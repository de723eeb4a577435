#pragma once

// Phase-free Bell-state algebra.
//
// A Bell state is labelled by the Pauli coset (x, z) that maps Phi+ onto it:
//   Phi+ = (0,0)  Phi- = (0,1)  Psi+ = (1,0)  Psi- = (1,1)
// With this convention every identity used by the protocols reduces to XOR of
// 2-bit labels. All statements here hold up to a global phase; the statevector
// oracle (qstate.hpp) keeps exact amplitudes and is what the tests check against.

#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "qss/errors.hpp"

namespace qss {

class BellLabel {
public:
    constexpr BellLabel() = default;
    constexpr BellLabel(bool x_bit, bool z_bit) : bits_(static_cast<std::uint8_t>((x_bit ? 2 : 0) | (z_bit ? 1 : 0))) {}

    static constexpr BellLabel from_index(unsigned index) {
        return BellLabel((index >> 1) & 1u, index & 1u);
    }

    constexpr bool x_bit() const { return (bits_ >> 1) & 1u; }
    constexpr bool z_bit() const { return bits_ & 1u; }
    /// 2*x + z, i.e. 0..3 in the order Phi+, Phi-, Psi+, Psi-.
    constexpr unsigned index() const { return bits_; }

    constexpr BellLabel operator^(BellLabel other) const { return from_index(bits_ ^ other.bits_); }
    constexpr BellLabel& operator^=(BellLabel other) {
        bits_ ^= other.bits_;
        return *this;
    }
    constexpr bool operator==(const BellLabel&) const = default;

private:
    std::uint8_t bits_ = 0;
};

inline constexpr BellLabel kPhiPlus{false, false};
inline constexpr BellLabel kPhiMinus{false, true};
inline constexpr BellLabel kPsiPlus{true, false};
inline constexpr BellLabel kPsiMinus{true, true};

inline constexpr std::array<BellLabel, 4> kAllBellLabels{kPhiPlus, kPhiMinus, kPsiPlus, kPsiMinus};

/// Wire names: phi+, phi-, psi+, psi-.
inline std::string_view to_string(BellLabel label) {
    static constexpr std::array<std::string_view, 4> names{"phi+", "phi-", "psi+", "psi-"};
    return names[label.index()];
}

inline BellLabel parse_bell_label(std::string_view text) {
    for (BellLabel label : kAllBellLabels) {
        if (to_string(label) == text) return label;
    }
    throw InputError("unknown Bell label '" + std::string(text) + "'");
}

inline std::ostream& operator<<(std::ostream& os, BellLabel label) { return os << to_string(label); }

enum class PauliKind : std::uint8_t { u1 = 0, u2 = 1, u3 = 2, u4 = 3 };

/// One of the dealer's four local operations:
///   u1 = |0><0| + |1><1|     (identity)   label (0,0)  secret "00"
///   u2 = |0><0| - |1><1|     (Z)          label (0,1)  secret "01"
///   u3 = |1><0| + |0><1|     (X)          label (1,0)  secret "10"
///   u4 = |0><1| - |1><0|     (ZX)         label (1,1)  secret "11"
class PauliOp {
public:
    constexpr PauliOp() = default;
    constexpr explicit PauliOp(PauliKind kind) : kind_(kind) {}

    static constexpr PauliOp from_label(BellLabel label) { return PauliOp(static_cast<PauliKind>(label.index())); }

    constexpr PauliKind kind() const { return kind_; }
    constexpr BellLabel op_label() const { return BellLabel::from_index(static_cast<unsigned>(kind_)); }
    /// Two-character secret, "00".."11".
    std::string secret_bits() const {
        const auto v = static_cast<unsigned>(kind_);
        return {static_cast<char>('0' + ((v >> 1) & 1u)), static_cast<char>('0' + (v & 1u))};
    }
    std::string_view name() const {
        static constexpr std::array<std::string_view, 4> names{"u1", "u2", "u3", "u4"};
        return names[static_cast<unsigned>(kind_)];
    }

    constexpr bool operator==(const PauliOp&) const = default;

private:
    PauliKind kind_ = PauliKind::u1;
};

inline constexpr std::array<PauliOp, 4> kAllPauliOps{PauliOp(PauliKind::u1), PauliOp(PauliKind::u2),
                                                     PauliOp(PauliKind::u3), PauliOp(PauliKind::u4)};

inline std::ostream& operator<<(std::ostream& os, const PauliOp& op) { return os << op.name(); }

inline PauliOp encode_secret(std::string_view bits) {
    if (bits.size() != 2 || (bits[0] != '0' && bits[0] != '1') || (bits[1] != '0' && bits[1] != '1')) {
        throw InputError("secret must be a 2-bit string, got '" + std::string(bits) + "'");
    }
    return PauliOp(static_cast<PauliKind>(((bits[0] - '0') << 1) | (bits[1] - '0')));
}

/// Label of a Bell pair after `op` acts on either of its qubits.
constexpr BellLabel pauli_action_on_bell(PauliOp op, BellLabel label) { return label ^ op.op_label(); }

/// Entanglement swapping: pairs (a,b) and (c,d), Bell measurement on (b,c) with
/// result `measured`; returns the label the surviving pair (a,d) collapses to.
constexpr BellLabel swap_outcome(BellLabel l_ab, BellLabel l_cd, BellLabel measured) { return l_ab ^ l_cd ^ measured; }

/// Inverse reading of the swap rule: given two of the pair labels, the third.
constexpr BellLabel infer_link(BellLabel l_ab, BellLabel l_cd, BellLabel l_ad) { return l_ab ^ l_cd ^ l_ad; }

/// Closed chain of pairs: every qubit is in one initial pair and one measured pair,
/// so the XOR of all labels on the ring is preserved. Whatever is left over is the
/// Pauli the dealer applied to qubit 1.
inline PauliOp ring_reconstruct(std::span<const BellLabel> initial_labels, std::span<const BellLabel> measured_labels) {
    if (initial_labels.empty() || measured_labels.empty()) throw InputError("ring_reconstruct: empty label list");
    if (initial_labels.size() != measured_labels.size()) {
        throw InputError("ring_reconstruct: " + std::to_string(initial_labels.size()) + " initial pairs but " +
                         std::to_string(measured_labels.size()) + " measurements");
    }
    BellLabel acc = kPhiPlus;
    for (BellLabel l : initial_labels) acc ^= l;
    for (BellLabel l : measured_labels) acc ^= l;
    return PauliOp::from_label(acc);
}

enum class Basis : std::uint8_t { rectilinear, diagonal };
enum class Correlation : std::uint8_t { correlated, anticorrelated };

inline std::string_view to_string(Basis b) { return b == Basis::rectilinear ? "rectilinear" : "diagonal"; }
inline std::string_view to_string(Correlation c) { return c == Correlation::correlated ? "correlated" : "anticorrelated"; }

/// Both qubits of a Bell pair measured in the same basis: ZZ = (-1)^x, XX = (-1)^z.
constexpr Correlation detect_correlation_rule(BellLabel label, Basis basis) {
    const bool flip = basis == Basis::rectilinear ? label.x_bit() : label.z_bit();
    return flip ? Correlation::anticorrelated : Correlation::correlated;
}

}  // namespace qss
