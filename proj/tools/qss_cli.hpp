#pragma once

// Command-line front end: `run`, `verify`, `table`.
//
// Exit codes: 0 success, 1 an invariant check failed, 2 configuration error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "qss/qss.hpp"

namespace qss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitConfig = 2;

struct RunOptions {
    std::string protocol = "zhang-man";
    int agents = 3;
    std::string adversary = "none";
    std::string colluders = "1,3";
    int channel = 1;
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
    double p_detect = 0.25;
    std::string out;
    std::string csv;
    std::string config;
    unsigned threads = 1;
    int max_detect_rounds = 32;
    bool randomize_fakes = false;
    bool announcement_check = true;
};

/// `key = value` lines, '#' comments.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InputError(path + ":" + std::to_string(lineno) + ": expected key = value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

inline std::vector<int> parse_colluders(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(detail::parse_int(tok));
    if (out.size() != 2) throw InputError("--colluders expects two agent indices, e.g. 1,3");
    return out;
}

inline AdversaryStrategy make_adversary(const RunOptions& o) {
    if (o.adversary == "none") return honest();
    if (o.adversary == "collusion") {
        const auto c = parse_colluders(o.colluders);
        return collusion_swap(c[0], c[1], o.randomize_fakes);
    }
    if (o.adversary == "intercept-resend") return intercept_resend(o.channel);
    throw InputError("unknown adversary '" + o.adversary + "' (none|collusion|intercept-resend)");
}

inline ProtocolConfig make_config(const RunOptions& o) {
    ProtocolConfig c;
    c.protocol = parse_protocol(o.protocol);
    c.n_agents = o.agents;
    c.p_detect = o.p_detect;
    c.trials = o.trials;
    c.master_seed = o.seed;
    c.max_detect_rounds = o.max_detect_rounds;
    c.announcement_check = o.announcement_check;
    c.validate();
    return c;
}

/// Invariants the run must satisfy for its configuration; empty when all hold.
inline std::vector<std::string> run_invariant_failures(const ProtocolConfig& config, const Adversary& adversary,
                                                       const std::vector<TrialRecord>& records, const SummaryStats& s) {
    std::vector<std::string> out;
    for (const auto& r : records) {
        for (const auto& v : r.violations) out.push_back("trial " + std::to_string(r.index) + ": " + v);
    }
    const SummaryStats again = summarize(records, s.seed);
    if (again.recovered != s.recovered || again.message_trials != s.message_trials) {
        out.push_back("summary does not match per-trial records");
    }
    const std::string name(adversary.name());
    if (name == "none") {
        if (s.recovered != s.message_trials) out.push_back("honest run: reconstruction differs from the secret");
        if (s.subround_failures != 0) out.push_back("honest run: detection sub-round failed");
        if (s.announcement_mismatches != 0) out.push_back("honest run: announcement check failed");
    }
    if (name == "collusion" && config.protocol == Protocol::zhang_man) {
        if (s.detected_trials != 0) out.push_back("zhang-man collusion: attack was detected");
        // With agents outside [i, j] the pair alone cannot finish the chain.
        const auto cols = adversary.colluders();
        if (cols.front() == 1 && cols.back() == config.n_agents && s.guess_correct != s.message_trials) {
            out.push_back("zhang-man collusion: colluders missed the secret");
        }
    }
    return out;
}

inline void write_report(std::ostream& os, const RunOptions& o, const std::vector<TrialRecord>& records,
                         const SummaryStats& s) {
    os << "run protocol=" << o.protocol << " agents=" << o.agents << " adversary=" << o.adversary;
    if (o.adversary == "collusion") os << " colluders=" << o.colluders;
    if (o.adversary == "intercept-resend") os << " channel=" << o.channel;
    os << " trials=" << o.trials << " seed=" << o.seed << " p_detect=" << detail::fixed(o.p_detect) << '\n';
    for (const auto& r : records) write_record(os, r);
    write_summary(os, s);
    os << "note mi_bias is the plug-in estimator's expected value for independent variables\n";
}

inline int do_run(RunOptions o, const CLI::App& sub, std::ostream& out, std::ostream& err) {
    try {
        if (!o.config.empty()) {
            // Flags given on the command line win over the file.
            for (const auto& [key, value] : read_config_file(o.config)) {
                const CLI::Option* opt = nullptr;
                try {
                    opt = sub.get_option("--" + key);
                } catch (const CLI::OptionNotFound&) {
                    throw InputError("unknown config key '" + key + "'");
                }
                if (opt->count() > 0) continue;
                try {
                    if (key == "protocol") o.protocol = value;
                    else if (key == "agents") o.agents = std::stoi(value);
                    else if (key == "adversary") o.adversary = value;
                    else if (key == "colluders") o.colluders = value;
                    else if (key == "channel") o.channel = std::stoi(value);
                    else if (key == "trials") o.trials = std::stoull(value);
                    else if (key == "seed") o.seed = std::stoull(value);
                    else if (key == "p-detect") o.p_detect = std::stod(value);
                    else if (key == "out") o.out = value;
                    else if (key == "csv") o.csv = value;
                    else if (key == "threads") o.threads = static_cast<unsigned>(std::stoul(value));
                    else if (key == "max-detect-rounds") o.max_detect_rounds = std::stoi(value);
                    else if (key == "randomize-fakes") o.randomize_fakes = value == "true" || value == "1";
                    else if (key == "announcement-check") o.announcement_check = !(value == "false" || value == "0");
                    else throw InputError("config key '" + key + "' not allowed in a config file");
                } catch (const std::logic_error& e) {
                    if (dynamic_cast<const InputError*>(&e)) throw;
                    throw InputError("bad value '" + value + "' for config key '" + key + "'");
                }
            }
        }
        const ProtocolConfig config = make_config(o);
        const AdversaryStrategy adversary = make_adversary(o);
        adversary->validate(config.protocol, config.n_agents);

        const auto records = run_trials(config, adversary, o.threads);
        const SummaryStats summary = summarize(records, config.master_seed);

        if (!o.out.empty()) {
            std::ofstream f(o.out, std::ios::binary);
            if (!f) throw InputError("cannot write '" + o.out + "'");
            write_report(f, o, records, summary);
        }
        if (!o.csv.empty()) {
            std::ofstream f(o.csv, std::ios::binary);
            if (!f) throw InputError("cannot write '" + o.csv + "'");
            write_summary_csv(f, summary);
        }
        write_summary(out, summary);

        const auto failures = run_invariant_failures(config, *adversary, records, summary);
        for (const auto& f : failures) err << "invariant violated: " << f << '\n';
        return failures.empty() ? kExitOk : kExitInvariant;
    } catch (const InputError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }
}

inline int do_verify(bool swap_table, bool identities, bool dense_coding, std::ostream& out) {
    if (!swap_table && !identities && !dense_coding) swap_table = identities = dense_coding = true;
    bool ok = true;
    auto section = [&](const std::string& title, const std::vector<verify::CheckResult>& checks) {
        verify::write_checks(out, title, checks);
        for (const auto& c : checks) ok = ok && c.pass;
    };
    if (swap_table) section("swap-table", verify::check_swap_table());
    if (identities) section("identities", verify::check_identities());
    if (dense_coding) {
        section("dense-coding orthogonality", verify::check_dense_coding());
        section("dense-coding labels", verify::check_dense_coding_labels());
    }
    return ok ? kExitOk : kExitInvariant;
}

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantum secret sharing simulation lab"};
    app.require_subcommand(1);

    RunOptions o;
    CLI::App* run = app.add_subcommand("run", "Monte-Carlo protocol runs");
    run->add_option("--protocol", o.protocol, "zhang-man | improved");
    run->add_option("--agents", o.agents, "number of agents n");
    run->add_option("--adversary", o.adversary, "none | collusion | intercept-resend");
    run->add_option("--colluders", o.colluders, "colluding agents i,j");
    run->add_option("--channel", o.channel, "agent whose incoming link is intercepted (0 = into the dealer)");
    run->add_option("--trials", o.trials, "number of trials");
    run->add_option("--seed", o.seed, "master seed");
    run->add_option("--p-detect", o.p_detect, "probability of choosing detecting mode");
    run->add_option("--out", o.out, "per-trial report file");
    run->add_option("--csv", o.csv, "summary CSV file");
    run->add_option("--config", o.config, "key = value config file; flags override it");
    run->add_option("--threads", o.threads, "worker threads");
    run->add_option("--max-detect-rounds", o.max_detect_rounds, "improved: detection rounds allowed per step");
    run->add_flag("--randomize-fakes", o.randomize_fakes, "colluders pick a random XOR-preserving fake pair");
    run->add_option("--announcement-check", o.announcement_check, "dealer checks agents' announcements (true|false)");

    bool swap_table = false, identities = false, dense_coding = false;
    CLI::App* ver = app.add_subcommand("verify", "check the label algebra against the statevector oracle");
    ver->add_flag("--swap-table", swap_table, "all 64 swapping cases");
    ver->add_flag("--identities", identities, "the three printed swapping expansions");
    ver->add_flag("--dense-coding", dense_coding, "u1..u4 on Psi-");

    CLI::App* table = app.add_subcommand("table", "dump the 64-entry swap table as CSV");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }

    if (run->parsed()) return do_run(o, *run, out, err);
    if (ver->parsed()) return do_verify(swap_table, identities, dense_coding, out);
    if (table->parsed()) {
        verify::write_swap_table_csv(out);
        return kExitOk;
    }
    return kExitConfig;
}

}  // namespace qss::cli
