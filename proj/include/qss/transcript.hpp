#pragma once

// Classical record of one protocol run: public announcements, per-party private
// records, detection results and the ordered quantum event log that the
// coalition-knowledge solver replays.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qss/bell.hpp"
#include "qss/errors.hpp"
#include "qss/qstate.hpp"

namespace qss {

enum class Protocol : std::uint8_t { zhang_man, improved };

inline std::string_view to_string(Protocol p) { return p == Protocol::zhang_man ? "zhang-man" : "improved"; }

inline Protocol parse_protocol(std::string_view text) {
    if (text == "zhang-man" || text == "zhang_man") return Protocol::zhang_man;
    if (text == "improved") return Protocol::improved;
    throw InputError("unknown protocol '" + std::string(text) + "'");
}

enum class Mode : std::uint8_t { detect, message };

inline std::string_view to_string(Mode m) { return m == Mode::detect ? "detect" : "message"; }

/// 0 is the dealer, 1..n the agents, -1 an outside eavesdropper.
struct PartyId {
    int index = 0;

    static constexpr PartyId dealer() { return {0}; }
    static constexpr PartyId agent(int k) { return {k}; }
    static constexpr PartyId eavesdropper() { return {-1}; }

    constexpr bool is_dealer() const { return index == 0; }
    constexpr bool is_agent() const { return index > 0; }
    constexpr auto operator<=>(const PartyId&) const = default;
};

inline std::string to_string(PartyId p) {
    if (p.index == 0) return "dealer";
    if (p.index < 0) return "eve";
    return "agent" + std::to_string(p.index);
}

inline PartyId parse_party(std::string_view text) {
    if (text == "dealer") return PartyId::dealer();
    if (text == "eve") return PartyId::eavesdropper();
    if (text.starts_with("agent") && text.size() > 5) {
        int k = 0;
        for (char c : text.substr(5)) {
            if (c < '0' || c > '9') throw InputError("bad party '" + std::string(text) + "'");
            k = k * 10 + (c - '0');
        }
        if (k > 0) return PartyId::agent(k);
    }
    throw InputError("bad party '" + std::string(text) + "'");
}

/// Public Bell outcome. Qubit numbers are the diagram numbers; the claim may be
/// false if the announcer is dishonest.
struct Announcement {
    PartyId party;
    int qubit_a = 0;
    int qubit_b = 0;
    BellLabel label;

    bool operator==(const Announcement&) const = default;
};

enum class EventKind : std::uint8_t {
    prepare,         ///< new Bell pair with a known label
    regenerate,      ///< new pair carrying the label the `source` pair had when it was consumed
    encode,          ///< dealer's secret Pauli on `qubits.first`
    bell_measure,    ///< Bell measurement; `label` is the outcome
    single_measure,  ///< single-qubit measurement (detection or interception)
    discard,         ///< pair thrown away; outcome irrelevant
};

struct QuantumEvent {
    EventKind kind = EventKind::prepare;
    PartyId actor;
    QubitPair qubits;
    BellLabel label;
    bool nondemolition = false;
    /// Dealer's outcome made public by her final announcement.
    bool public_outcome = false;
    /// Outcome hidden from the reader (masked copy handed to colluders).
    bool outcome_hidden = false;
    QubitPair source;
};

struct BellRecord {
    QubitPair pair;
    BellLabel label;
};

struct SingleRecord {
    QubitId qubit;
    Basis basis = Basis::rectilinear;
    bool bit = false;
};

struct PartyRecord {
    std::vector<BellRecord> bell_outcomes;
    std::vector<SingleRecord> single_outcomes;
    std::vector<QubitId> received;
    std::vector<QubitId> sent;
};

struct DetectionResult {
    /// Index of the agent the tested link delivers to (0 = link into the dealer).
    int link = 0;
    Basis basis = Basis::rectilinear;
    bool pass = true;
};

struct RecordAccess {
    PartyId reader;
    PartyId owner;
};

class Transcript {
public:
    Transcript() = default;
    Transcript(Protocol protocol, int n_agents) : protocol_(protocol), n_agents_(n_agents) {}

    Protocol protocol() const { return protocol_; }
    int n_agents() const { return n_agents_; }

    const std::vector<Mode>& modes() const { return modes_; }
    void push_mode(Mode m) { modes_.push_back(m); }

    const std::vector<Announcement>& announcements() const { return announcements_; }
    void announce(Announcement a) { announcements_.push_back(a); }

    const std::vector<DetectionResult>& detections() const { return detections_; }
    void record_detection(DetectionResult d) { detections_.push_back(d); }

    const std::optional<PauliOp>& dealer_secret() const { return dealer_secret_; }
    void set_dealer_secret(PauliOp op) { dealer_secret_ = op; }

    const std::vector<QuantumEvent>& events() const { return events_; }
    std::size_t log_event(const QuantumEvent& e) {
        events_.push_back(e);
        return events_.size() - 1;
    }
    void mark_public(std::size_t event_index) { events_.at(event_index).public_outcome = true; }

    const std::vector<BellLabel>& initial_labels() const { return initial_labels_; }
    void set_initial_labels(std::vector<BellLabel> labels) { initial_labels_ = std::move(labels); }

    /// Writer access for the engine.
    PartyRecord& record(PartyId owner) { return records_[owner.index]; }

    /// Audited read. Every access is logged so tests can check that adversary code
    /// only looked at the records it is entitled to.
    const PartyRecord& read_record(PartyId owner, PartyId reader) const {
        audit_.push_back({reader, owner});
        static const PartyRecord empty;
        const auto it = records_.find(owner.index);
        return it == records_.end() ? empty : it->second;
    }

    const std::vector<RecordAccess>& access_log() const { return audit_; }

    /// Dealer's public (1, 2(n+1)) announcement, if made.
    std::optional<Announcement> dealer_announcement() const {
        for (const auto& a : announcements_) {
            if (a.party.is_dealer()) return a;
        }
        return std::nullopt;
    }

    std::optional<Announcement> agent_announcement(int k) const {
        for (const auto& a : announcements_) {
            if (a.party.index == k) return a;
        }
        return std::nullopt;
    }

    /// Line-oriented text form:
    ///   transcript protocol=<p> agents=<n>
    ///   mode step=<i> value=<detect|message>
    ///   detection link=<k> basis=<b> result=<pass|fail>
    ///   announce party=<party> pair=<a>,<b> label=<label>
    std::string serialize() const {
        std::ostringstream os;
        os << "transcript protocol=" << to_string(protocol_) << " agents=" << n_agents_ << '\n';
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            os << "mode step=" << i + 1 << " value=" << to_string(modes_[i]) << '\n';
        }
        for (const auto& d : detections_) {
            os << "detection link=" << d.link << " basis=" << to_string(d.basis) << " result=" << (d.pass ? "pass" : "fail")
               << '\n';
        }
        for (const auto& a : announcements_) os << serialize_announcement(a) << '\n';
        return os.str();
    }

    static std::string serialize_announcement(const Announcement& a) {
        return "announce party=" + to_string(a.party) + " pair=" + std::to_string(a.qubit_a) + "," +
               std::to_string(a.qubit_b) + " label=" + std::string(to_string(a.label));
    }

private:
    Protocol protocol_ = Protocol::zhang_man;
    int n_agents_ = 0;
    std::vector<Mode> modes_;
    std::vector<Announcement> announcements_;
    std::vector<DetectionResult> detections_;
    std::optional<PauliOp> dealer_secret_;
    std::vector<QuantumEvent> events_;
    std::vector<BellLabel> initial_labels_;
    std::map<int, PartyRecord> records_;
    mutable std::vector<RecordAccess> audit_;
};

namespace detail {

inline std::map<std::string, std::string> parse_fields(std::string_view line) {
    std::map<std::string, std::string> out;
    std::istringstream is{std::string(line)};
    std::string token;
    is >> token;  // record kind
    while (is >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw InputError("malformed field '" + token + "'");
        out[token.substr(0, eq)] = token.substr(eq + 1);
    }
    return out;
}

inline int parse_int(const std::string& s) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw InputError("bad integer '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw InputError("bad integer '" + s + "'");
    }
}

}  // namespace detail

inline Announcement parse_announcement(std::string_view line) {
    if (!line.starts_with("announce ")) throw InputError("not an announcement line: '" + std::string(line) + "'");
    auto fields = detail::parse_fields(line);
    for (const char* key : {"party", "pair", "label"}) {
        if (!fields.contains(key)) throw InputError(std::string("announcement missing ") + key);
    }
    const auto& pair = fields["pair"];
    const auto comma = pair.find(',');
    if (comma == std::string::npos) throw InputError("bad pair '" + pair + "'");
    return Announcement{parse_party(fields["party"]), detail::parse_int(pair.substr(0, comma)),
                        detail::parse_int(pair.substr(comma + 1)), parse_bell_label(fields["label"])};
}

/// All `announce` lines of a serialized transcript, in order.
inline std::vector<Announcement> parse_announcements(std::string_view text) {
    std::vector<Announcement> out;
    std::istringstream is{std::string(text)};
    std::string line;
    while (std::getline(is, line)) {
        if (line.starts_with("announce ")) out.push_back(parse_announcement(line));
    }
    return out;
}

/// Authorized reconstruction: XOR chain over the initial pairs and the dealer's
/// plus every agent's announced label. Needs all n+1 announcements.
inline PauliOp reconstruct_op(std::span<const Announcement> announcements, int n_agents,
                              std::span<const BellLabel> initial_labels) {
    std::vector<BellLabel> measured;
    bool dealer_seen = false;
    std::vector<bool> agent_seen(static_cast<std::size_t>(n_agents) + 1, false);
    for (const auto& a : announcements) {
        if (a.party.is_dealer()) {
            dealer_seen = true;
        } else if (a.party.index >= 1 && a.party.index <= n_agents) {
            agent_seen[static_cast<std::size_t>(a.party.index)] = true;
        } else {
            continue;
        }
        measured.push_back(a.label);
    }
    if (!dealer_seen) throw IncompleteTranscript("dealer announcement missing");
    for (int k = 1; k <= n_agents; ++k) {
        if (!agent_seen[static_cast<std::size_t>(k)]) {
            throw IncompleteTranscript("announcement of agent" + std::to_string(k) + " missing");
        }
    }
    return ring_reconstruct(initial_labels, measured);
}

/// Secret bits an authorized group reads off a complete message-mode transcript.
inline std::string reconstruct_from_transcript(const Transcript& transcript, std::span<const BellLabel> initial_labels) {
    return reconstruct_op(transcript.announcements(), transcript.n_agents(), initial_labels).secret_bits();
}

inline std::string reconstruct_from_transcript(const Transcript& transcript) {
    return reconstruct_from_transcript(transcript, transcript.initial_labels());
}

}  // namespace qss
