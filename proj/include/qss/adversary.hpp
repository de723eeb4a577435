#pragma once

// Adversary strategies plugged into the protocol engine.
//
// The engine builds the honest plan for each message-mode measurement step and lets
// the strategy edit it through hooks; it then enforces qubit ownership on whatever
// comes back, so a hook that touches an honest party's qubits is a SimulationFault.

#include <algorithm>
#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qss/bell.hpp"
#include "qss/errors.hpp"
#include "qss/knowledge.hpp"
#include "qss/qstate.hpp"
#include "qss/rng.hpp"
#include "qss/transcript.hpp"

namespace qss {

/// One hop of the quantum channel.
struct Channel {
    PartyId from;
    PartyId to;
    std::vector<QubitId> in_flight;
};

struct Transfer {
    QubitId qubit;
    PartyId from;
    PartyId to;
};

struct PlannedMeasurement {
    PartyId party;
    QubitPair pair;
};

/// Where in the run a hook fires. Zhang-Man has a single measurement step (0);
/// the improved protocol fires once per agent step k = 1..n.
struct StepContext {
    Protocol protocol = Protocol::zhang_man;
    int n_agents = 0;
    int step = 0;
    /// Current id of a diagram qubit number (slots are re-prepared after detection).
    std::function<QubitId(int)> qubit = [](int number) { return QubitId{number, 0}; };
};

/// What colluders may read: public announcements, their own private records and
/// the public measurement schedule with everyone else's outcomes masked.
class ColluderView {
public:
    ColluderView(const Transcript& transcript, std::set<int> colluders)
        : transcript_(transcript), colluders_(std::move(colluders)) {}

    const std::set<int>& colluders() const { return colluders_; }
    const std::vector<Announcement>& announcements() const { return transcript_.announcements(); }
    std::optional<Announcement> dealer_announcement() const { return transcript_.dealer_announcement(); }
    const std::vector<BellLabel>& initial_labels() const { return transcript_.initial_labels(); }

    const PartyRecord& own_record(int agent) const {
        if (!colluders_.contains(agent)) {
            throw SimulationFault("colluder view: agent" + std::to_string(agent) + " is not a colluder");
        }
        return transcript_.read_record(PartyId::agent(agent), PartyId::agent(*colluders_.begin()));
    }

    bool sees(const QuantumEvent& e) const {
        return e.public_outcome || (e.actor.is_agent() && colluders_.contains(e.actor.index));
    }

    std::vector<QuantumEvent> schedule() const {
        std::vector<QuantumEvent> out = transcript_.events();
        for (auto& e : out) {
            if (!sees(e) && (e.kind == EventKind::bell_measure || e.kind == EventKind::single_measure)) {
                e.label = kPhiPlus;
                e.outcome_hidden = true;
            }
        }
        return out;
    }

private:
    const Transcript& transcript_;
    std::set<int> colluders_;
};

/// Result of the colluders' analysis of one message-mode run.
struct CollusionState {
    std::vector<QubitId> rerouted;
    /// Colluders' actual Bell outcomes, lower-index colluder first.
    std::vector<BellRecord> private_outcomes;
    /// Encoded label of the dealer's pair (1,2), if the coalition can determine it.
    std::optional<BellLabel> encoded_label;
    /// XOR of the pieces of the agents strictly between the colluders, if determined.
    std::optional<BellLabel> intermediate_xor;
    /// Secret bits the colluders settle on (determined or best guess).
    std::string guess;
    bool determined = false;
};

class Adversary {
public:
    virtual ~Adversary() = default;

    virtual std::string_view name() const = 0;
    virtual std::vector<int> colluders() const { return {}; }
    /// Called once per run before anything happens; throws InputError on a bad setup.
    virtual void validate(Protocol, int /*n_agents*/) const {}

    /// Qubits in flight on a hop. May measure or replace them.
    virtual void on_channel(const Channel&, PureState&, Rng&, Transcript&) const {}
    /// Qubit hand-overs before the message-mode measurements of a step.
    virtual void on_circulation(const StepContext&, std::vector<Transfer>&) const {}
    /// Which pairs get Bell-measured by whom in a message-mode step.
    virtual void on_measurement(const StepContext&, std::vector<PlannedMeasurement>&) const {}
    /// Agents' piece announcements before the dealer's declaration.
    virtual void on_announcement(const ColluderView&, std::vector<Announcement>&, Rng&) const {}
    /// Post-run analysis by the colluders.
    virtual std::optional<CollusionState> deduce(const ColluderView&) const { return std::nullopt; }
};

using AdversaryStrategy = std::shared_ptr<const Adversary>;

class HonestParties final : public Adversary {
public:
    std::string_view name() const override { return "none"; }
};

inline AdversaryStrategy honest() { return std::make_shared<HonestParties>(); }

/// Labels the colluders announce for their nominal pairs. Only the XOR of the two
/// announcements is pinned (it must equal the XOR of their true outcomes so the
/// dealer's chain check passes). The canonical choice announces the true outcomes
/// for the nominal pairs; `randomize` shifts both by the same random Pauli.
inline std::pair<BellLabel, BellLabel> fake_announcements(BellLabel l_i_measured, BellLabel l_j_measured, Rng& rng,
                                                          bool randomize = false) {
    if (!randomize) return {l_i_measured, l_j_measured};
    const PauliOp u = kAllPauliOps[rng.below(4)];
    return {pauli_action_on_bell(u, l_i_measured), pauli_action_on_bell(u, l_j_measured)};
}

/// Qubit-numbering helpers shared by the engine and the strategies.
namespace layout {

/// Pair prepared by party p (0 = dealer): (2p+1, 2p+2).
constexpr std::pair<int, int> party_pair(int p) { return {2 * p + 1, 2 * p + 2}; }
/// Nominal pair agent k measures: (2k, 2k+1).
constexpr std::pair<int, int> agent_pair(int k) { return {2 * k, 2 * k + 1}; }
constexpr int last_qubit(int n_agents) { return 2 * (n_agents + 1); }

}  // namespace layout

/// Coalition knowledge over a finished run.
struct CoalitionResult {
    std::optional<std::string> secret;
    std::string best_guess;

    bool sufficient() const { return secret.has_value(); }
    std::string to_string() const { return secret.value_or("insufficient"); }
};

/// Can `coalition` (agent indices) pin the dealer's secret from the dealer's public
/// announcement and the members' private records alone? Other agents' piece
/// announcements are withheld.
inline CoalitionResult coalition_recovers(const Transcript& transcript, const std::set<int>& coalition,
                                          std::span<const BellLabel> initial_labels) {
    if (!transcript.dealer_announcement()) throw IncompleteTranscript("dealer announcement missing");
    std::vector<QuantumEvent> events = ColluderView(transcript, coalition).schedule();
    // First-generation preparations take the caller's initial labels.
    std::size_t next_initial = 0;
    for (auto& e : events) {
        if (e.kind != EventKind::prepare || e.qubits.first.generation != 0) continue;
        if (next_initial >= initial_labels.size()) throw InputError("coalition_recovers: too few initial labels");
        e.label = initial_labels[next_initial++];
    }
    if (next_initial != initial_labels.size()) throw InputError("coalition_recovers: too many initial labels");

    const ChainSolver solver(events, [](const QuantumEvent& e) { return !e.outcome_hidden; });
    const Inference shift = solver.secret();
    CoalitionResult out;
    out.best_guess = PauliOp::from_label(shift.best_guess).secret_bits();
    if (shift.value) out.secret = PauliOp::from_label(*shift.value).secret_bits();
    return out;
}

inline CoalitionResult coalition_recovers(const Transcript& transcript, const std::set<int>& coalition) {
    return coalition_recovers(transcript, coalition, transcript.initial_labels());
}

/// Two colluding agents i < j swap the qubits they received and Bell-measure the
/// rewired pairs (2i+1, 2j) and (2i, 2j+1), then cover up with fake announcements.
/// In detecting mode they behave legally.
class CollusionSwap final : public Adversary {
public:
    CollusionSwap(int i, int j, bool randomize_fakes) : i_(i), j_(j), randomize_(randomize_fakes) {
        if (i < 1 || j < 1) throw InputError("collusion: agent indices start at 1");
        if (i == j) throw InputError("collusion: needs two distinct agents");
        if (i > j) std::swap(i_, j_);
    }

    std::string_view name() const override { return "collusion"; }
    std::vector<int> colluders() const override { return {i_, j_}; }
    int first() const { return i_; }
    int second() const { return j_; }

    void validate(Protocol, int n_agents) const override {
        if (j_ > n_agents) {
            throw InputError("collusion: agent" + std::to_string(j_) + " out of range for " + std::to_string(n_agents) +
                             " agents");
        }
    }

    void on_circulation(const StepContext& ctx, std::vector<Transfer>& transfers) const override {
        const QubitId from_i = ctx.qubit(2 * i_);
        const QubitId from_j = ctx.qubit(2 * j_);
        if (ctx.protocol == Protocol::zhang_man) {
            transfers.push_back({from_i, PartyId::agent(i_), PartyId::agent(j_)});
            transfers.push_back({from_j, PartyId::agent(j_), PartyId::agent(i_)});
        } else if (ctx.step == i_) {
            transfers.push_back({from_i, PartyId::agent(i_), PartyId::agent(j_)});
        } else if (ctx.step == j_) {
            transfers.push_back({from_j, PartyId::agent(j_), PartyId::agent(i_)});
        }
    }

    void on_measurement(const StepContext& ctx, std::vector<PlannedMeasurement>& plan) const override {
        const bool at_i = ctx.protocol == Protocol::zhang_man || ctx.step == i_;
        const bool at_j = ctx.protocol == Protocol::zhang_man || ctx.step == j_;
        if (at_i) std::erase_if(plan, [&](const PlannedMeasurement& m) { return m.party.index == i_; });
        if (at_j) {
            std::erase_if(plan, [&](const PlannedMeasurement& m) { return m.party.index == j_; });
            plan.push_back({PartyId::agent(i_), {ctx.qubit(2 * i_ + 1), ctx.qubit(2 * j_)}});
            plan.push_back({PartyId::agent(j_), {ctx.qubit(2 * i_), ctx.qubit(2 * j_ + 1)}});
        }
    }

    void on_announcement(const ColluderView& view, std::vector<Announcement>& announcements, Rng& rng) const override {
        const auto& rec_i = view.own_record(i_);
        const auto& rec_j = view.own_record(j_);
        if (rec_i.bell_outcomes.empty() || rec_j.bell_outcomes.empty()) return;
        const auto [fake_i, fake_j] =
            fake_announcements(rec_i.bell_outcomes.back().label, rec_j.bell_outcomes.back().label, rng, randomize_);
        for (auto& a : announcements) {
            if (a.party.index == i_) a.label = fake_i;
            if (a.party.index == j_) a.label = fake_j;
        }
    }

    std::optional<CollusionState> deduce(const ColluderView& view) const override {
        if (!view.dealer_announcement()) return std::nullopt;
        const auto& rec_i = view.own_record(i_);
        const auto& rec_j = view.own_record(j_);
        if (rec_i.bell_outcomes.empty() || rec_j.bell_outcomes.empty()) return std::nullopt;

        CollusionState st;
        st.rerouted = {rec_j.bell_outcomes.back().pair.first, rec_i.bell_outcomes.back().pair.second};
        st.private_outcomes = {rec_i.bell_outcomes.back(), rec_j.bell_outcomes.back()};

        const auto events = view.schedule();
        const ChainSolver solver(events, [](const QuantumEvent& e) { return !e.outcome_hidden; });
        const Inference shift = solver.secret();
        const BellLabel encoded_base = view.initial_labels().empty() ? kPsiMinus : view.initial_labels().front();
        if (shift.value) st.encoded_label = pauli_action_on_bell(PauliOp::from_label(*shift.value), encoded_base);
        st.determined = shift.value.has_value();
        st.guess = PauliOp::from_label(shift.value.value_or(shift.best_guess)).secret_bits();

        std::vector<std::size_t> between;
        for (std::size_t e = 0; e < events.size(); ++e) {
            const auto& ev = events[e];
            if (ev.kind == EventKind::bell_measure && ev.actor.index > i_ && ev.actor.index < j_) between.push_back(e);
        }
        if (!between.empty()) {
            const Inference mid = solver.outcomes_xor(between);
            st.intermediate_xor = mid.value;
        }
        return st;
    }

private:
    int i_;
    int j_;
    bool randomize_;
};

inline AdversaryStrategy collusion_swap(int i, int j, bool randomize_fakes = false) {
    return std::make_shared<CollusionSwap>(i, j, randomize_fakes);
}

/// Outside eavesdropper on the hop delivering to party `target` (agent index, 0 =
/// the Zhang-Man hop from the last agent back to the dealer). Each in-flight qubit
/// is measured in a random basis and the observed basis state is sent on.
class InterceptResend final : public Adversary {
public:
    explicit InterceptResend(int target) : target_(target) {
        if (target < 0) throw InputError("intercept-resend: channel index must be >= 0");
    }

    std::string_view name() const override { return "intercept-resend"; }
    int target() const { return target_; }

    void validate(Protocol protocol, int n_agents) const override {
        const int lo = protocol == Protocol::zhang_man ? 0 : 1;
        if (target_ < lo || target_ > n_agents) {
            throw InputError("intercept-resend: no channel " + std::to_string(target_) + " for " +
                             std::to_string(n_agents) + " agents");
        }
    }

    void on_channel(const Channel& hop, PureState& state, Rng& rng, Transcript& transcript) const override {
        if (hop.to.index != target_) return;
        for (QubitId q : hop.in_flight) {
            const Basis basis = rng.bit() ? Basis::diagonal : Basis::rectilinear;
            // Collapsing in place is the same as forwarding a fresh qubit in the observed state.
            const bool bit = state.measure_qubit(q, basis, rng, Consume::no);
            transcript.record(PartyId::eavesdropper()).single_outcomes.push_back({q, basis, bit});
            QuantumEvent e;
            e.kind = EventKind::single_measure;
            e.actor = PartyId::eavesdropper();
            e.qubits = {q, q};
            transcript.log_event(e);
        }
    }

private:
    int target_;
};

inline AdversaryStrategy intercept_resend(int target_channel) { return std::make_shared<InterceptResend>(target_channel); }

}  // namespace qss
