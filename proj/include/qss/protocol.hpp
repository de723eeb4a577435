#pragma once

// Protocol engine: the Zhang-Man ring protocol and the improved sequential protocol,
// executed on the statevector oracle with a simulated quantum channel.
//
// Qubit numbering follows the diagrams. Party p (0 = dealer) owns the pair
// (2p+1, 2p+2); agent k's piece is the Bell outcome on (2k, 2k+1).
//
// Zhang-Man: every party prepares Psi-, sends qubit 2p+2 to party p+1 (mod n+1),
// then the dealer picks detect or message mode for the whole run.
//
// Improved: the dealer prepares all pairs and, for k = 1..n, sends (2k, 2k+1) to
// agent k and picks a mode for that step. In message mode she applies the secret on
// qubit 1 (first step only), Bell-measures the link (1, 2k+2) without destroying it
// and agent k Bell-measures (2k, 2k+1). In detecting mode the link pair (1, 2k) is
// checked, both transmitted pairs are thrown away and re-prepared (the link in the
// label the dealer has on record) and the step is repeated. The dealer announces
// her final (1, 2n+2) outcome last.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qss/adversary.hpp"
#include "qss/bell.hpp"
#include "qss/errors.hpp"
#include "qss/qstate.hpp"
#include "qss/rng.hpp"
#include "qss/transcript.hpp"

namespace qss {

struct ProtocolConfig {
    static constexpr int kMaxAgents = static_cast<int>(PureState::kMaxQubits / 2) - 1;

    Protocol protocol = Protocol::zhang_man;
    int n_agents = 3;
    double p_detect = 0.25;
    std::uint64_t trials = 10000;
    std::uint64_t master_seed = 1;
    /// Improved protocol: detection sub-rounds allowed per step before the run is
    /// abandoned as a pure detect-mode run.
    int max_detect_rounds = 32;
    /// Dealer compares the agents' piece announcements with her own record before
    /// declaring her outcome.
    bool announcement_check = true;

    void validate() const {
        if (n_agents < 2 || n_agents > kMaxAgents) {
            throw InputError("agents must be in [2, " + std::to_string(kMaxAgents) + "], got " + std::to_string(n_agents));
        }
        if (!(p_detect >= 0.0 && p_detect <= 1.0)) throw InputError("p-detect must be in [0, 1]");
        if (max_detect_rounds < 1) throw InputError("max-detect-rounds must be >= 1");
    }
};

struct TrialReport {
    Mode mode = Mode::detect;
    std::optional<std::string> dealer_secret;
    std::optional<std::string> authorized_reconstruction;
    std::optional<std::string> adversary_guess;
    std::optional<CollusionState> collusion;
    bool detected = false;
    /// The dealer's chain check on the agents' announcements failed.
    bool announcement_mismatch = false;
    int subrounds = 0;
    int subround_failures = 0;
    Transcript transcript;
};

/// Outcome of one detection check on a Bell pair shared across a link.
struct DetectionOutcome {
    Basis basis = Basis::rectilinear;
    bool first_bit = false;
    bool second_bit = false;
    bool pass = true;
};

/// Dealer picks a basis uniformly; both qubits are measured (and consumed) in it. The
/// check passes iff the observed (anti)correlation is what `expected` predicts.
inline DetectionOutcome detection_subround(PureState& state, QubitId qa, QubitId qb, BellLabel expected, Rng& rng) {
    DetectionOutcome out;
    out.basis = rng.bit() ? Basis::diagonal : Basis::rectilinear;
    out.first_bit = state.measure_qubit(qa, out.basis, rng);
    out.second_bit = state.measure_qubit(qb, out.basis, rng);
    const Correlation seen = out.first_bit == out.second_bit ? Correlation::correlated : Correlation::anticorrelated;
    out.pass = seen == detect_correlation_rule(expected, out.basis);
    return out;
}

namespace detail {

class Engine {
public:
    Engine(const ProtocolConfig& config, AdversaryStrategy adversary, Rng& rng)
        : config_(config),
          adversary_(adversary ? std::move(adversary) : honest()),
          rng_(rng),
          n_(config.n_agents) {
        config_.validate();
        adversary_->validate(config_.protocol, n_);
        report_.transcript = Transcript(config_.protocol, n_);
        const auto cols = adversary_->colluders();
        colluders_ = {cols.begin(), cols.end()};
    }

    TrialReport run_zhang_man() {
        std::vector<BellLabel> initials;
        for (int p = 0; p <= n_; ++p) {
            const auto [a, b] = layout::party_pair(p);
            prepare(PartyId{p}, a, b, kPsiMinus);
            initials.push_back(kPsiMinus);
        }
        transcript().set_initial_labels(initials);

        for (int p = 0; p <= n_; ++p) {
            const int to = (p + 1) % (n_ + 1);
            send(PartyId{p}, PartyId{to}, {live(layout::party_pair(p).second)});
        }

        if (rng_.bernoulli(config_.p_detect)) {
            transcript().push_mode(Mode::detect);
            report_.mode = Mode::detect;
            for (int p = 0; p <= n_; ++p) {
                const auto [a, b] = layout::party_pair(p);
                const int to = (p + 1) % (n_ + 1);
                if (!detect(PartyId{p}, live(a), PartyId{to}, live(b), kPsiMinus, to)) break;
            }
            return std::move(report_);
        }

        transcript().push_mode(Mode::message);
        const PauliOp secret = draw_secret();
        encode(secret);
        const QubitPair dealer_pair{live(1), live(layout::last_qubit(n_))};
        const std::size_t dealer_event = bell_measure(PartyId::dealer(), dealer_pair, Consume::yes);

        const StepContext ctx = context(0);
        std::vector<Transfer> transfers;
        std::vector<PlannedMeasurement> plan;
        for (int k = 1; k <= n_; ++k) {
            const auto [a, b] = layout::agent_pair(k);
            plan.push_back({PartyId::agent(k), {live(a), live(b)}});
        }
        run_step(ctx, transfers, plan);
        finish_message_mode(secret, dealer_event);
        return std::move(report_);
    }

    TrialReport run_improved() {
        std::vector<BellLabel> initials;
        for (int p = 0; p <= n_; ++p) {
            const auto [a, b] = layout::party_pair(p);
            prepare(PartyId::dealer(), a, b, kPsiMinus);
            initials.push_back(kPsiMinus);
        }
        transcript().set_initial_labels(initials);

        // Label of the link pair (1, 2k) as the dealer knows it.
        BellLabel link_label = kPsiMinus;
        std::optional<PauliOp> secret;
        std::size_t dealer_event = 0;
        for (int k = 1; k <= n_; ++k) {
            const auto [a, b] = layout::agent_pair(k);
            int rounds = 0;
            while (true) {
                send(PartyId::dealer(), PartyId::agent(k), {live(a), live(b)});
                if (!rng_.bernoulli(config_.p_detect)) break;

                transcript().push_mode(Mode::detect);
                ++rounds;
                if (!detect(PartyId::dealer(), live(1), PartyId::agent(k), live(a), link_label, k)) {
                    report_.mode = Mode::detect;
                    return std::move(report_);
                }
                // Throw away the untested pair and re-prepare both.
                discard(PartyId::agent(k), live(b), live(b + 1));
                regenerate_link(a, link_label);
                const QubitId nb = bump(b);
                const QubitId nb1 = bump(b + 1);
                prepare_ids(PartyId::dealer(), nb, nb1, kPsiMinus);
                if (rounds >= config_.max_detect_rounds) {
                    report_.mode = Mode::detect;
                    return std::move(report_);
                }
            }

            transcript().push_mode(Mode::message);
            if (k == 1) {
                secret = draw_secret();
                encode(*secret);
            }
            const bool last = k == n_;
            dealer_event = bell_measure(PartyId::dealer(), {live(1), live(b + 1)}, last ? Consume::yes : Consume::no);
            link_label = transcript().events()[dealer_event].label;

            std::vector<Transfer> transfers;
            std::vector<PlannedMeasurement> plan{{PartyId::agent(k), {live(a), live(b)}}};
            run_step(context(k), transfers, plan);
        }
        finish_message_mode(*secret, dealer_event);
        return std::move(report_);
    }

private:
    Transcript& transcript() { return report_.transcript; }

    StepContext context(int step) const {
        StepContext ctx;
        ctx.protocol = config_.protocol;
        ctx.n_agents = n_;
        ctx.step = step;
        ctx.qubit = [this](int number) { return live(number); };
        return ctx;
    }

    QubitId live(int number) const {
        const auto it = generation_.find(number);
        return QubitId{number, it == generation_.end() ? 0 : it->second};
    }

    QubitId bump(int number) {
        ++generation_[number];
        return live(number);
    }

    PartyId holder(QubitId q) const {
        const auto it = holder_.find(q);
        if (it == holder_.end()) throw SimulationFault("qubit " + to_string(q) + " is not held by anyone");
        return it->second;
    }

    void require_holds(PartyId party, QubitId q) const {
        if (holder(q) != party) {
            throw SimulationFault(to_string(party) + " does not hold qubit " + to_string(q) + " (held by " +
                                  to_string(holder(q)) + ")");
        }
    }

    void prepare(PartyId party, int a, int b, BellLabel label) { prepare_ids(party, live(a), live(b), label); }

    void prepare_ids(PartyId party, QubitId a, QubitId b, BellLabel label) {
        state_.add_bell_pair(a, b, label);
        holder_[a] = party;
        holder_[b] = party;
        QuantumEvent e;
        e.kind = EventKind::prepare;
        e.actor = party;
        e.qubits = {a, b};
        e.label = label;
        transcript().log_event(e);
    }

    /// Fresh link pair (1, 2k) in the label the consumed one had.
    void regenerate_link(int a, BellLabel label) {
        const QubitId old1{1, live(1).generation};
        const QubitId old_a{a, live(a).generation};
        const QubitId n1 = bump(1);
        const QubitId na = bump(a);
        state_.add_bell_pair(n1, na, label);
        holder_[n1] = PartyId::dealer();
        holder_[na] = PartyId::dealer();
        QuantumEvent e;
        e.kind = EventKind::regenerate;
        e.actor = PartyId::dealer();
        e.qubits = {n1, na};
        e.label = label;
        e.source = {old1, old_a};
        transcript().log_event(e);
    }

    void send(PartyId from, PartyId to, std::vector<QubitId> qubits) {
        for (QubitId q : qubits) {
            require_holds(from, q);
            transcript().record(from).sent.push_back(q);
        }
        const Channel hop{from, to, qubits};
        adversary_->on_channel(hop, state_, rng_, transcript());
        for (QubitId q : qubits) {
            holder_[q] = to;
            transcript().record(to).received.push_back(q);
        }
    }

    void encode(PauliOp op) {
        require_holds(PartyId::dealer(), live(1));
        state_.apply(live(1), op);
        transcript().set_dealer_secret(op);
        report_.dealer_secret = op.secret_bits();
        QuantumEvent e;
        e.kind = EventKind::encode;
        e.actor = PartyId::dealer();
        e.qubits = {live(1), live(1)};
        transcript().log_event(e);
    }

    PauliOp draw_secret() { return kAllPauliOps[rng_.below(4)]; }

    std::size_t bell_measure(PartyId party, QubitPair pair, Consume consume) {
        require_holds(party, pair.first);
        require_holds(party, pair.second);
        if (pair.first == pair.second) throw SimulationFault("Bell measurement on a single qubit");
        const BellLabel outcome = state_.measure_bell(pair.first, pair.second, rng_, consume);
        if (consume == Consume::yes) {
            holder_.erase(pair.first);
            holder_.erase(pair.second);
        }
        transcript().record(party).bell_outcomes.push_back({pair, outcome});
        QuantumEvent e;
        e.kind = EventKind::bell_measure;
        e.actor = party;
        e.qubits = pair;
        e.label = outcome;
        e.nondemolition = consume == Consume::no;
        return transcript().log_event(e);
    }

    void discard(PartyId agent, QubitId agent_qubit, QubitId dealer_qubit) {
        require_holds(agent, agent_qubit);
        require_holds(PartyId::dealer(), dealer_qubit);
        // Tracing out is equivalent to measuring and forgetting the result.
        state_.measure_bell(agent_qubit, dealer_qubit, rng_, Consume::yes);
        holder_.erase(agent_qubit);
        holder_.erase(dealer_qubit);
        QuantumEvent e;
        e.kind = EventKind::discard;
        e.actor = PartyId::dealer();
        e.qubits = {agent_qubit, dealer_qubit};
        transcript().log_event(e);
    }

    bool detect(PartyId first, QubitId qa, PartyId second, QubitId qb, BellLabel expected, int link) {
        require_holds(first, qa);
        require_holds(second, qb);
        const DetectionOutcome d = detection_subround(state_, qa, qb, expected, rng_);
        holder_.erase(qa);
        holder_.erase(qb);
        transcript().record(first).single_outcomes.push_back({qa, d.basis, d.first_bit});
        transcript().record(second).single_outcomes.push_back({qb, d.basis, d.second_bit});
        for (auto [party, q] : {std::pair{first, qa}, std::pair{second, qb}}) {
            QuantumEvent e;
            e.kind = EventKind::single_measure;
            e.actor = party;
            e.qubits = {q, q};
            transcript().log_event(e);
        }
        transcript().record_detection({link, d.basis, d.pass});
        ++report_.subrounds;
        if (!d.pass) {
            ++report_.subround_failures;
            report_.detected = true;
        }
        return d.pass;
    }

    void run_step(const StepContext& ctx, std::vector<Transfer>& transfers, std::vector<PlannedMeasurement>& plan) {
        adversary_->on_circulation(ctx, transfers);
        adversary_->on_measurement(ctx, plan);
        for (const auto& t : transfers) {
            if (!t.from.is_agent() || !colluders_.contains(t.from.index) || !t.to.is_agent() ||
                !colluders_.contains(t.to.index)) {
                throw SimulationFault("transfer of qubit " + to_string(t.qubit) + " between non-colluders");
            }
            require_holds(t.from, t.qubit);
            holder_[t.qubit] = t.to;
            transcript().record(t.from).sent.push_back(t.qubit);
            transcript().record(t.to).received.push_back(t.qubit);
        }
        for (const auto& m : plan) bell_measure(m.party, m.pair, Consume::yes);
    }

    void finish_message_mode(PauliOp secret, std::size_t dealer_event) {
        report_.mode = Mode::message;
        // Agents announce their pieces (nominal pairs); colluders may substitute.
        std::vector<Announcement> pieces;
        for (int k = 1; k <= n_; ++k) {
            const auto [a, b] = layout::agent_pair(k);
            const auto& outcomes = transcript().record(PartyId::agent(k)).bell_outcomes;
            const BellLabel label = outcomes.empty() ? kPhiPlus : outcomes.back().label;
            pieces.push_back({PartyId::agent(k), a, b, label});
        }
        const ColluderView view(transcript(), colluders_);
        adversary_->on_announcement(view, pieces, rng_);
        for (const auto& a : pieces) transcript().announce(a);

        const QuantumEvent& dealer = transcript().events()[dealer_event];
        if (config_.announcement_check) {
            std::vector<Announcement> all = pieces;
            all.push_back({PartyId::dealer(), 1, layout::last_qubit(n_), dealer.label});
            if (reconstruct_op(all, n_, transcript().initial_labels()) != secret) {
                report_.announcement_mismatch = true;
                report_.detected = true;
            }
        }
        transcript().announce({PartyId::dealer(), 1, layout::last_qubit(n_), dealer.label});
        transcript().mark_public(dealer_event);

        report_.authorized_reconstruction = reconstruct_from_transcript(transcript());
        if (auto st = adversary_->deduce(ColluderView(transcript(), colluders_))) {
            report_.adversary_guess = st->guess;
            report_.collusion = std::move(st);
        }
    }

    ProtocolConfig config_;
    AdversaryStrategy adversary_;
    Rng& rng_;
    int n_;
    std::set<int> colluders_;
    PureState state_;
    std::map<QubitId, PartyId> holder_;
    std::map<int, int> generation_;
    TrialReport report_;
};

}  // namespace detail

inline TrialReport run_zhang_man(const ProtocolConfig& config, AdversaryStrategy adversary, Rng& rng) {
    if (config.protocol != Protocol::zhang_man) throw InputError("run_zhang_man: config.protocol is not zhang-man");
    return detail::Engine(config, std::move(adversary), rng).run_zhang_man();
}

inline TrialReport run_improved(const ProtocolConfig& config, AdversaryStrategy adversary, Rng& rng) {
    if (config.protocol != Protocol::improved) throw InputError("run_improved: config.protocol is not improved");
    return detail::Engine(config, std::move(adversary), rng).run_improved();
}

inline TrialReport run_protocol(const ProtocolConfig& config, AdversaryStrategy adversary, Rng& rng) {
    return config.protocol == Protocol::zhang_man ? run_zhang_man(config, std::move(adversary), rng)
                                                  : run_improved(config, std::move(adversary), rng);
}

/// Bookkeeping checks on a finished run: each qubit prepared once and destructively
/// measured at most once; every honest announcement names a pair its announcer
/// actually measured with that outcome. Returns human-readable violations.
inline std::vector<std::string> conservation_violations(const Transcript& t, const std::set<int>& dishonest = {}) {
    std::vector<std::string> out;
    std::map<QubitId, int> prepared;
    std::map<QubitId, int> consumed;
    for (const auto& e : t.events()) {
        switch (e.kind) {
            case EventKind::prepare:
            case EventKind::regenerate:
                ++prepared[e.qubits.first];
                ++prepared[e.qubits.second];
                break;
            case EventKind::bell_measure:
            case EventKind::discard:
                if (e.kind == EventKind::discard || !e.nondemolition) {
                    ++consumed[e.qubits.first];
                    ++consumed[e.qubits.second];
                }
                break;
            case EventKind::single_measure:
                if (e.actor.index >= 0) ++consumed[e.qubits.first];
                break;
            case EventKind::encode: break;
        }
    }
    for (const auto& [q, n] : prepared) {
        if (n != 1) out.push_back("qubit " + to_string(q) + " prepared " + std::to_string(n) + " times");
    }
    for (const auto& [q, n] : consumed) {
        if (n > 1) out.push_back("qubit " + to_string(q) + " measured " + std::to_string(n) + " times");
        if (!prepared.contains(q)) out.push_back("qubit " + to_string(q) + " measured but never prepared");
    }
    for (const auto& a : t.announcements()) {
        if (dishonest.contains(a.party.index)) continue;
        const auto& rec = t.read_record(a.party, a.party);
        const bool backed = std::any_of(rec.bell_outcomes.begin(), rec.bell_outcomes.end(), [&](const BellRecord& r) {
            const std::set<int> nums{r.pair.first.number, r.pair.second.number};
            return nums == std::set<int>{a.qubit_a, a.qubit_b} && r.label == a.label;
        });
        if (!backed) out.push_back(to_string(a.party) + " announced a pair it did not measure");
    }
    return out;
}

}  // namespace qss
