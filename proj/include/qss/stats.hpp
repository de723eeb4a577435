#pragma once

// Monte-Carlo harness and summary statistics.
//
// Trial t always runs on Rng(derive_seed(master_seed, t)), so records and the summary
// are the same whatever the thread count or scheduling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qss/adversary.hpp"
#include "qss/errors.hpp"
#include "qss/protocol.hpp"
#include "qss/rng.hpp"

namespace qss {

/// Joint count table: rows are the dealer's secret (4 values), columns whatever
/// the other variable is.
using CountTable = std::vector<std::vector<std::uint64_t>>;

/// Plug-in mutual information in bits: sum p(s,g) log2(p(s,g) / (p(s) p(g))).
inline double estimate_mi(const CountTable& joint) {
    std::uint64_t total = 0;
    std::size_t cols = 0;
    for (const auto& row : joint) {
        cols = std::max(cols, row.size());
        for (auto c : row) total += c;
    }
    if (total == 0) throw InputError("estimate_mi: empty count table");
    std::vector<double> row_sum(joint.size(), 0.0);
    std::vector<double> col_sum(cols, 0.0);
    for (std::size_t r = 0; r < joint.size(); ++r) {
        for (std::size_t c = 0; c < joint[r].size(); ++c) {
            row_sum[r] += static_cast<double>(joint[r][c]);
            col_sum[c] += static_cast<double>(joint[r][c]);
        }
    }
    const double n = static_cast<double>(total);
    double mi = 0.0;
    for (std::size_t r = 0; r < joint.size(); ++r) {
        for (std::size_t c = 0; c < joint[r].size(); ++c) {
            if (joint[r][c] == 0) continue;
            const double p = static_cast<double>(joint[r][c]) / n;
            mi += p * std::log2(p * n * n / (row_sum[r] * col_sum[c]));
        }
    }
    return std::max(0.0, mi);
}

/// First-order bias of the plug-in estimator for independent variables:
/// (rows-1)(cols-1) / (2 N ln 2).
inline double mi_bias(std::size_t rows, std::size_t cols, std::uint64_t samples) {
    if (samples == 0) return 0.0;
    return static_cast<double>((rows - 1) * (cols - 1)) / (2.0 * static_cast<double>(samples) * std::log(2.0));
}

inline int secret_index(const std::string& bits) { return encode_secret(bits).op_label().index(); }

/// One line of the per-trial report.
struct TrialRecord {
    std::uint64_t index = 0;
    Mode mode = Mode::detect;
    std::string secret;          ///< empty unless message mode
    std::string reconstruction;  ///< empty unless message mode
    std::string guess;           ///< empty unless the adversary produced one
    bool detected = false;
    bool announcement_mismatch = false;
    int subrounds = 0;
    int subround_failures = 0;
    /// Colluders' view: 16 * dealer label + 4 * first colluder outcome + second; -1 if none.
    int view = -1;
    std::vector<std::string> violations;
};

inline TrialRecord make_record(std::uint64_t index, const TrialReport& r, const std::set<int>& dishonest) {
    TrialRecord rec;
    rec.index = index;
    rec.mode = r.mode;
    rec.secret = r.dealer_secret && r.mode == Mode::message ? *r.dealer_secret : "";
    rec.reconstruction = r.authorized_reconstruction.value_or("");
    rec.guess = r.adversary_guess.value_or("");
    rec.detected = r.detected;
    rec.announcement_mismatch = r.announcement_mismatch;
    rec.subrounds = r.subrounds;
    rec.subround_failures = r.subround_failures;
    if (r.collusion && r.collusion->private_outcomes.size() == 2) {
        if (const auto d = r.transcript.dealer_announcement()) {
            rec.view = static_cast<int>(16 * d->label.index() + 4 * r.collusion->private_outcomes[0].label.index() +
                                        r.collusion->private_outcomes[1].label.index());
        }
    }
    rec.violations = conservation_violations(r.transcript, dishonest);
    return rec;
}

struct SummaryStats {
    std::uint64_t trials = 0;
    std::uint64_t message_trials = 0;
    std::uint64_t recovered = 0;
    std::uint64_t guess_trials = 0;
    std::uint64_t guess_correct = 0;
    std::uint64_t detected_trials = 0;
    std::uint64_t subrounds = 0;
    std::uint64_t subround_failures = 0;
    std::uint64_t announcement_mismatches = 0;
    double recovery_rate = 0.0;
    double attack_success_rate = 0.0;
    double detection_rate = 0.0;
    double subround_failure_rate = 0.0;
    /// MI between secret and the colluders' final guess.
    double mi_bits = 0.0;
    /// MI between secret and the colluders' full view (dealer label + both outcomes).
    double mi_view_bits = 0.0;
    double mi_bias = 0.0;
    double mi_view_bias = 0.0;
    std::uint64_t seed = 0;
};

inline SummaryStats summarize(const std::vector<TrialRecord>& records, std::uint64_t seed) {
    SummaryStats s;
    s.seed = seed;
    s.trials = records.size();
    CountTable by_guess(4, std::vector<std::uint64_t>(4, 0));
    CountTable by_view(4, std::vector<std::uint64_t>(64, 0));
    std::uint64_t view_trials = 0;
    for (const auto& r : records) {
        if (r.detected) ++s.detected_trials;
        if (r.announcement_mismatch) ++s.announcement_mismatches;
        s.subrounds += static_cast<std::uint64_t>(r.subrounds);
        s.subround_failures += static_cast<std::uint64_t>(r.subround_failures);
        if (r.mode != Mode::message) continue;
        ++s.message_trials;
        if (r.reconstruction == r.secret) ++s.recovered;
        if (!r.guess.empty()) {
            ++s.guess_trials;
            if (r.guess == r.secret) ++s.guess_correct;
            ++by_guess[static_cast<std::size_t>(secret_index(r.secret))][static_cast<std::size_t>(secret_index(r.guess))];
        }
        if (r.view >= 0) {
            ++view_trials;
            ++by_view[static_cast<std::size_t>(secret_index(r.secret))][static_cast<std::size_t>(r.view)];
        }
    }
    auto ratio = [](std::uint64_t a, std::uint64_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
    s.recovery_rate = ratio(s.recovered, s.message_trials);
    s.attack_success_rate = ratio(s.guess_correct, s.guess_trials);
    s.detection_rate = ratio(s.detected_trials, s.trials);
    s.subround_failure_rate = ratio(s.subround_failures, s.subrounds);
    if (s.guess_trials > 0) {
        s.mi_bits = estimate_mi(by_guess);
        s.mi_bias = mi_bias(4, 4, s.guess_trials);
    }
    if (view_trials > 0) {
        s.mi_view_bits = estimate_mi(by_view);
        s.mi_view_bias = mi_bias(4, 64, view_trials);
    }
    return s;
}

/// Runs trials [0, config.trials) on `threads` workers. Record order is by index.
inline std::vector<TrialRecord> run_trials(const ProtocolConfig& config, const AdversaryStrategy& adversary,
                                           unsigned threads = 1) {
    config.validate();
    const AdversaryStrategy strategy = adversary ? adversary : honest();
    strategy->validate(config.protocol, config.n_agents);
    const auto cols = strategy->colluders();
    const std::set<int> dishonest(cols.begin(), cols.end());

    std::vector<TrialRecord> records(config.trials);
    auto work = [&](std::uint64_t begin, std::uint64_t step) {
        for (std::uint64_t t = begin; t < config.trials; t += step) {
            Rng rng(derive_seed(config.master_seed, t));
            const TrialReport report = run_protocol(config, strategy, rng);
            records[t] = make_record(t, report, dishonest);
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::uint64_t>(1, config.trials))));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
        for (auto& th : pool) th.join();
    }
    return records;
}

namespace detail {
inline std::string fixed(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << v;
    return os.str();
}
}  // namespace detail

inline void write_record(std::ostream& os, const TrialRecord& r) {
    auto opt = [](const std::string& s) { return s.empty() ? std::string("-") : s; };
    os << "trial index=" << r.index << " mode=" << to_string(r.mode) << " secret=" << opt(r.secret)
       << " reconstruction=" << opt(r.reconstruction) << " guess=" << opt(r.guess) << " detected=" << (r.detected ? 1 : 0)
       << " announcement_mismatch=" << (r.announcement_mismatch ? 1 : 0) << " subrounds=" << r.subrounds
       << " subround_failures=" << r.subround_failures << '\n';
}

inline void write_summary(std::ostream& os, const SummaryStats& s) {
    os << "summary trials=" << s.trials << " message_trials=" << s.message_trials
       << " recovery_rate=" << detail::fixed(s.recovery_rate) << " attack_success_rate=" << detail::fixed(s.attack_success_rate)
       << " detection_rate=" << detail::fixed(s.detection_rate) << " subrounds=" << s.subrounds
       << " subround_failures=" << s.subround_failures << " subround_failure_rate=" << detail::fixed(s.subround_failure_rate)
       << " announcement_mismatches=" << s.announcement_mismatches << " mi_bits=" << detail::fixed(s.mi_bits)
       << " mi_bias=" << detail::fixed(s.mi_bias) << " mi_view_bits=" << detail::fixed(s.mi_view_bits)
       << " mi_view_bias=" << detail::fixed(s.mi_view_bias) << " seed=" << s.seed << '\n';
}

inline void write_summary_csv(std::ostream& os, const SummaryStats& s) {
    os << "trials,message_trials,recovery_rate,attack_success_rate,detection_rate,subrounds,subround_failures,"
          "subround_failure_rate,mi_bits,mi_bias,mi_view_bits,mi_view_bias,seed\n";
    os << s.trials << ',' << s.message_trials << ',' << detail::fixed(s.recovery_rate) << ','
       << detail::fixed(s.attack_success_rate) << ',' << detail::fixed(s.detection_rate) << ',' << s.subrounds << ','
       << s.subround_failures << ',' << detail::fixed(s.subround_failure_rate) << ',' << detail::fixed(s.mi_bits) << ','
       << detail::fixed(s.mi_bias) << ',' << detail::fixed(s.mi_view_bits) << ',' << detail::fixed(s.mi_view_bias) << ','
       << s.seed << '\n';
}

}  // namespace qss
