// qrsp: remote-state-preparation experiments from the command line.
//
// One invocation runs one experiment: pick a protocol (subcommand or
// --protocol), describe the target state (JSON file via --spec, or inline
// via --s with --phases / --coeffs), choose exhaustive or sampled mode, and
// the report is written as JSON or CSV. Identical configuration and seed
// always produce identical report bytes; wall time goes to stderr only.
//
// Exit codes: 0 success, 2 configuration error, 3 target not preparable
// under the requested options, 4 internal invariant violation.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qrsp/experiment.hpp"
#include "qrsp/io_json.hpp"

namespace {

struct CliOptions {
    std::string protocol;
    std::string spec_path;
    std::size_t s = 0;
    std::vector<double> phases;
    std::vector<double> coeffs;
    std::size_t pairs = 0;
    std::string mode = "exhaustive";
    std::size_t trials = 10000;
    std::uint64_t seed = 0;
    std::string policy = "enumerate";
    std::string us_catalog = "identity";
    std::string format = "json";
    std::string out;
    std::size_t threads = 0;
    std::size_t dump_catalog = 0;

    bool s_given = false;
    bool pairs_given = false;
    bool dump_given = false;
};

std::uint64_t default_seed_from_env() {
    const char* env = std::getenv("QRSP_SEED");
    if (env == nullptr || *env == '\0') return 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == nullptr || *end != '\0') {
        throw std::invalid_argument(std::string("QRSP_SEED is not an unsigned integer: \"") +
                                    env + "\"");
    }
    return static_cast<std::uint64_t>(v);
}

qrsp::io::Target build_target(const CliOptions& opt, qrsp::experiment::Protocol protocol) {
    const bool inline_given = opt.s_given || !opt.phases.empty() || !opt.coeffs.empty();
    if (!opt.spec_path.empty() && inline_given) {
        throw std::invalid_argument(
            "the target was given both as a file (--spec) and inline (--s/--phases/--coeffs); "
            "pick one");
    }
    if (!opt.spec_path.empty()) return qrsp::io::load_target_file(opt.spec_path);
    if (!inline_given) {
        throw std::invalid_argument(
            "no target state given; use --spec <file> or --s with --phases/--coeffs");
    }
    if (!opt.s_given) throw std::invalid_argument("inline targets need --s");

    using qrsp::experiment::Protocol;
    qrsp::io::Target target;
    if (protocol == Protocol::equatorial) {
        if (!opt.coeffs.empty()) {
            throw std::invalid_argument("the equatorial protocol takes --phases, not --coeffs");
        }
        if (opt.phases.size() != opt.s) {
            throw std::invalid_argument("--phases needs exactly " + std::to_string(opt.s) +
                                        " values (one per level)");
        }
        target.phases = opt.phases;
        target.spec = qrsp::states::equatorial_spec(opt.s, opt.phases);
    } else {
        if (!opt.phases.empty()) {
            throw std::invalid_argument("--phases only applies to the equatorial protocol");
        }
        if (opt.coeffs.size() != opt.s) {
            throw std::invalid_argument("--coeffs needs exactly " + std::to_string(opt.s) +
                                        " values (one per level)");
        }
        target.spec = qrsp::states::real_spec(opt.s, opt.coeffs);
    }
    return target;
}

void write_output(const std::string& path, const std::string& bytes) {
    if (path.empty()) {
        std::cout << bytes;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output path \"" + path + "\"");
    out << bytes;
    out.flush();
    if (!out) throw std::invalid_argument("cannot write output path \"" + path + "\"");
}

int run(const CliOptions& opt) {
    namespace exp = qrsp::experiment;

    const exp::Protocol protocol = exp::parse_protocol(opt.protocol);
    const exp::ReportFormat format = exp::parse_format(opt.format);

    if (opt.dump_given) {
        if (protocol != exp::Protocol::real_min) {
            throw std::invalid_argument("--dump-catalog only applies to the real-min protocol");
        }
        const auto& cat = qrsp::realspace::catalog(opt.dump_catalog);
        write_output(opt.out, qrsp::io::catalog_to_json(cat).dump(2) + "\n");
        return 0;
    }

    exp::ExperimentConfig cfg;
    cfg.protocol = protocol;
    cfg.target = build_target(opt, protocol);
    if (opt.pairs_given) cfg.pairs = opt.pairs;
    cfg.mode = exp::parse_mode(opt.mode);
    cfg.trials = opt.trials;
    cfg.seed = opt.seed;
    cfg.policy = exp::parse_policy(opt.policy);
    cfg.us_catalog = opt.us_catalog;
    cfg.threads = opt.threads;

    const exp::ExperimentReport report = exp::run_experiment(cfg);
    write_output(opt.out, exp::emit_report(report, format));
    std::fprintf(stderr, "wall time: %.6f s\n", report.wall_time_seconds);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CliOptions opt;
    CLI::App app{
        "Remote state preparation over EPR pairs: exhaustive branch analysis and seeded "
        "Monte Carlo, reported as JSON or CSV."};

    try {
        opt.seed = default_seed_from_env();
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    app.add_option("--protocol", opt.protocol,
                   "Protocol to run: equatorial, real-min, or separable (or use the subcommand "
                   "of the same name)");
    app.add_option("--spec", opt.spec_path, "Target state as a JSON file");
    auto* s_opt =
        app.add_option("--s", opt.s, "Number of levels of the inline target")->check(CLI::PositiveNumber);
    app.add_option("--phases", opt.phases,
                   "Inline equatorial target: one phase per level, radians, first one 0");
    app.add_option("--coeffs", opt.coeffs, "Inline real target: one real coefficient per level");
    auto* pairs_opt = app.add_option("--pairs", opt.pairs, "EPR pair count L (default: protocol rule)")
                          ->check(CLI::PositiveNumber);
    app.add_option("--mode", opt.mode, "exhaustive (default) or sample");
    app.add_option("--trials", opt.trials, "Sample mode: number of rounds (default 10000)");
    app.add_option("--seed", opt.seed,
                   "Sample mode: base seed; round i uses seed+i (default 0, or QRSP_SEED)");
    app.add_option("--policy", opt.policy,
                   "Separable protocol grouping policy: singletons, pairs, triples, or "
                   "enumerate (default)");
    app.add_option("--us-catalog", opt.us_catalog,
                   "Separable protocol transformation catalog: identity (default) or "
                   "slot-permutations");
    app.add_option("--format", opt.format, "Report format: json (default) or csv");
    app.add_option("--out", opt.out, "Write the report here instead of stdout");
    app.add_option("--threads", opt.threads,
                   "Sample mode worker threads (default: available parallelism; does not "
                   "change the report bytes)");
    auto* dump_opt = app.add_option("--dump-catalog", opt.dump_catalog,
                                    "real-min only: print the operator catalog of this size "
                                    "(1, 2, 4, or 8) as JSON and exit");

    app.require_subcommand(0, 1);
    std::string sub_protocol;
    for (const std::string name : {"equatorial", "real-min", "separable"}) {
        auto* sub = app.add_subcommand(name, "Run the " + name + " protocol");
        sub->fallthrough();
        sub->callback([&sub_protocol, name] { sub_protocol = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    opt.s_given = s_opt->count() > 0;
    opt.pairs_given = pairs_opt->count() > 0;
    opt.dump_given = dump_opt->count() > 0;

    try {
        if (!sub_protocol.empty() && !opt.protocol.empty()) {
            throw std::invalid_argument(
                "the protocol was given both as a subcommand and via --protocol; pick one");
        }
        if (!sub_protocol.empty()) opt.protocol = sub_protocol;
        if (opt.protocol.empty()) {
            throw std::invalid_argument(
                "no protocol chosen; use a subcommand or --protocol "
                "(equatorial, real-min, or separable)");
        }
        return run(opt);
    } catch (const qrsp::separable::NotPreparableError& e) {
        qrsp::io::ordered_json failure;
        failure["error"] = "not-preparable";
        failure["message"] = e.what();
        try {
            write_output(opt.out, failure.dump(2) + "\n");
        } catch (const std::exception& io_error) {
            std::fprintf(stderr, "error: %s\n", io_error.what());
            return 2;
        }
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::out_of_range& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
}
