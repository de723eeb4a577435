#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>

#include "qss/qss.hpp"

namespace qss::test {

/// Half-width of a 5 sigma band for a Bernoulli(p) frequency over n samples.
inline double five_sigma(double p, std::uint64_t n) { return 5.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

/// First trial (seeded like run_trials) whose report satisfies `pred`.
inline std::optional<TrialReport> find_trial(const ProtocolConfig& config, const AdversaryStrategy& adversary,
                                             const std::function<bool(const TrialReport&)>& pred,
                                             std::uint64_t limit = 100000) {
    for (std::uint64_t t = 0; t < limit; ++t) {
        Rng rng(derive_seed(config.master_seed, t));
        TrialReport r = run_protocol(config, adversary, rng);
        if (pred(r)) return r;
    }
    return std::nullopt;
}

/// Bell outcome `party` recorded for the pair of diagram qubits {a, b}.
inline std::optional<BellLabel> outcome_on(const Transcript& t, PartyId party, int a, int b) {
    for (const auto& r : t.read_record(party, party).bell_outcomes) {
        const int x = r.pair.first.number, y = r.pair.second.number;
        if ((x == a && y == b) || (x == b && y == a)) return r.label;
    }
    return std::nullopt;
}

}  // namespace qss::test
