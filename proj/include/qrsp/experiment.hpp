#pragma once

// Experiment harness: one config in, one report out.
//
// Exhaustive mode enumerates every measurement branch and reports exact
// probabilities. Sample mode aggregates N independent protocol rounds whose
// seeds are derived as seed + trial_index, so a report is a pure function of
// its config: identical config and seed give byte-identical serialized
// output, regardless of the worker-thread count. Wall time is measured but
// never serialized for the same reason.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qrsp/channel.hpp"
#include "qrsp/equatorial.hpp"
#include "qrsp/io_json.hpp"
#include "qrsp/realspace.hpp"
#include "qrsp/separable.hpp"
#include "qrsp/states.hpp"

namespace qrsp::experiment {

enum class Protocol { equatorial, real_min, separable };
enum class RunMode { exhaustive, sample };
enum class ReportFormat { json, csv };

inline std::string protocol_name(Protocol p) {
    switch (p) {
        case Protocol::equatorial: return "equatorial";
        case Protocol::real_min: return "real-min";
        case Protocol::separable: return "separable";
    }
    throw std::logic_error("unreachable");
}

inline Protocol parse_protocol(const std::string& name) {
    if (name == "equatorial") return Protocol::equatorial;
    if (name == "real-min") return Protocol::real_min;
    if (name == "separable") return Protocol::separable;
    throw std::invalid_argument("unknown protocol \"" + name +
                                "\" (expected equatorial, real-min, or separable)");
}

inline std::string mode_name(RunMode m) {
    return m == RunMode::exhaustive ? "exhaustive" : "sample";
}

inline RunMode parse_mode(const std::string& name) {
    if (name == "exhaustive") return RunMode::exhaustive;
    if (name == "sample") return RunMode::sample;
    throw std::invalid_argument("unknown mode \"" + name + "\" (expected exhaustive or sample)");
}

inline std::string format_name(ReportFormat f) { return f == ReportFormat::json ? "json" : "csv"; }

inline ReportFormat parse_format(const std::string& name) {
    if (name == "json") return ReportFormat::json;
    if (name == "csv") return ReportFormat::csv;
    throw std::invalid_argument("unknown format \"" + name + "\" (expected json or csv)");
}

inline separable::GroupingPolicy parse_policy(const std::string& name) {
    if (name == "singletons") return separable::GroupingPolicy::singletons;
    if (name == "pairs") return separable::GroupingPolicy::pairs;
    if (name == "triples") return separable::GroupingPolicy::triples;
    if (name == "enumerate") return separable::GroupingPolicy::enumerate_contiguous;
    throw std::invalid_argument("unknown grouping policy \"" + name +
                                "\" (expected singletons, pairs, triples, or enumerate)");
}

struct ExperimentConfig {
    Protocol protocol = Protocol::equatorial;
    io::Target target;
    std::optional<std::size_t> pairs;  // EPR pair count L; module default when absent
    RunMode mode = RunMode::exhaustive;
    std::size_t trials = 10000;   // sample mode only
    std::uint64_t seed = 0;       // sample mode only
    separable::GroupingPolicy policy = separable::GroupingPolicy::enumerate_contiguous;
    std::string us_catalog = "identity";  // "identity" or "slot-permutations"
    channel::CbitMode cbit_mode = channel::CbitMode::fractional;
    std::size_t threads = 0;  // 0: available parallelism; affects wall time only
};

struct BranchRow {
    std::size_t k = 0;
    double prob = 0.0;
    bool success = false;
    double fidelity = 0.0;
    double cbits = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::size_t pairs_used = 0;
    double exact_success_probability = 0.0;
    std::optional<double> empirical_success_probability;  // sample mode
    std::optional<double> mean_fidelity_on_success;       // absent if nothing succeeded
    double cbits_per_run = 0.0;
    double teleport_cbits = 0.0;
    std::vector<BranchRow> branches;  // exhaustive mode
    std::size_t trials_run = 0;       // sample mode
    double wall_time_seconds = 0.0;   // informational; never serialized
};

inline void validate_config(const ExperimentConfig& cfg) {
    const auto& spec = cfg.target.spec;
    if (spec.s == 0 || spec.amplitudes.size() != spec.s) {
        throw std::invalid_argument("experiment config has no target state");
    }
    switch (cfg.protocol) {
        case Protocol::equatorial:
            if (spec.kind != states::QuditKind::equatorial) {
                throw std::invalid_argument("the equatorial protocol needs an equatorial target");
            }
            if (cfg.target.phases.size() != spec.s) {
                throw std::invalid_argument("equatorial target is missing its phase vector");
            }
            break;
        case Protocol::real_min:
            if (spec.kind != states::QuditKind::real) {
                throw std::invalid_argument("the real-min protocol needs a real target");
            }
            break;
        case Protocol::separable:
            if (spec.kind == states::QuditKind::equatorial) {
                throw std::invalid_argument(
                    "the separable protocol needs a real or general target");
            }
            if (cfg.us_catalog != "identity" && cfg.us_catalog != "slot-permutations") {
                throw std::invalid_argument("unknown transformation catalog \"" + cfg.us_catalog +
                                            "\" (expected identity or slot-permutations)");
            }
            break;
    }
    if (cfg.mode == RunMode::sample && cfg.trials < 1) {
        throw std::invalid_argument("sample mode needs at least one trial");
    }
}

/// The pair count the run will use: the explicit config value when present,
/// otherwise the protocol's own default (minimum admissible count for the
/// equatorial and separable protocols; the fixed catalog size rule for
/// real-min). An explicit value that the protocol cannot honor is an error.
inline std::size_t resolved_pairs(const ExperimentConfig& cfg) {
    const std::size_t s = cfg.target.spec.s;
    if (cfg.protocol == Protocol::real_min) {
        const std::size_t rule = realspace::pad_to_catalog(cfg.target.spec).s_cat <= 4 ? 2 : 3;
        if (cfg.pairs && *cfg.pairs != rule) {
            throw std::invalid_argument("the real-min protocol uses exactly " +
                                        std::to_string(rule) + " pairs for s = " +
                                        std::to_string(s));
        }
        return rule;
    }
    if (cfg.pairs) return *cfg.pairs;
    return std::max<std::size_t>(states::qubit_bounds(s).first, 1);
}

namespace detail {

inline separable::UsCatalog make_us_catalog(const std::string& name, std::size_t pairs) {
    if (name == "identity") return separable::identity_catalog(pairs);
    if (name == "slot-permutations") return separable::slot_permutation_catalog(pairs);
    throw std::invalid_argument("unknown transformation catalog \"" + name + "\"");
}

inline channel::BranchTable exhaustive_table(const ExperimentConfig& cfg, std::size_t pairs,
                                             const separable::UsCatalog& us) {
    switch (cfg.protocol) {
        case Protocol::equatorial:
            return equatorial::run_equatorial_exhaustive(cfg.target.spec.s, cfg.target.phases,
                                                         pairs, cfg.cbit_mode);
        case Protocol::real_min:
            return realspace::run_realspace_exhaustive(cfg.target.spec, cfg.cbit_mode);
        case Protocol::separable:
            return separable::run_separable_exhaustive(cfg.target.spec, pairs, cfg.policy, us,
                                                       cfg.cbit_mode);
    }
    throw std::logic_error("unreachable");
}

}  // namespace detail

/// One protocol round under this config, with an explicit seed. Sample mode
/// aggregates exactly these transcripts at seeds seed, seed+1, ...
inline channel::ProtocolTranscript run_single_trial(const ExperimentConfig& cfg,
                                                    std::size_t pairs,
                                                    const separable::UsCatalog& us,
                                                    std::uint64_t seed) {
    switch (cfg.protocol) {
        case Protocol::equatorial:
            return equatorial::run_equatorial_sampled(cfg.target.spec.s, cfg.target.phases, pairs,
                                                      seed, cfg.cbit_mode);
        case Protocol::real_min:
            return realspace::run_realspace_sampled(cfg.target.spec, seed, cfg.cbit_mode);
        case Protocol::separable:
            return separable::run_separable_sampled(cfg.target.spec, pairs, cfg.policy, us, seed,
                                                    cfg.cbit_mode);
    }
    throw std::logic_error("unreachable");
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const auto start = std::chrono::steady_clock::now();

    const std::size_t pairs = resolved_pairs(cfg);
    const separable::UsCatalog us = cfg.protocol == Protocol::separable
                                        ? detail::make_us_catalog(cfg.us_catalog, pairs)
                                        : separable::identity_catalog(1);
    const channel::BranchTable table = detail::exhaustive_table(cfg, pairs, us);

    ExperimentReport r;
    r.config = cfg;
    r.pairs_used = pairs;
    r.exact_success_probability = table.success_prob();
    r.cbits_per_run = table.cbits_per_run();
    r.teleport_cbits = channel::teleport_cost(cfg.target.spec.s, pairs);

    if (cfg.mode == RunMode::exhaustive) {
        double weight = 0.0, weighted_fidelity = 0.0;
        for (const auto& b : table.branches) {
            r.branches.push_back(BranchRow{b.outcome, b.prob, b.success, b.fidelity, b.cbits});
            if (b.success) {
                weight += b.prob;
                weighted_fidelity += b.prob * b.fidelity;
            }
        }
        if (weight > 0.0) r.mean_fidelity_on_success = weighted_fidelity / weight;
    } else {
        struct TrialResult {
            bool success = false;
            double fidelity = 0.0;
        };
        std::vector<TrialResult> results(cfg.trials);
        const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
        const std::size_t workers =
            std::min<std::size_t>(cfg.threads > 0 ? cfg.threads : hw, cfg.trials);

        auto run_range = [&](std::size_t first_trial, std::size_t stride) {
            for (std::size_t i = first_trial; i < cfg.trials; i += stride) {
                const auto t = run_single_trial(cfg, pairs, us, cfg.seed + i);
                results[i] = TrialResult{t.success, t.fidelity};
            }
        };
        if (workers <= 1) {
            run_range(0, 1);
        } else {
            std::vector<std::exception_ptr> errors(workers);
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        run_range(w, workers);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto& th : pool) th.join();
            for (const auto& e : errors) {
                if (e) std::rethrow_exception(e);
            }
        }

        // Stable reduction in trial order, so the report does not depend on
        // how trials were scheduled.
        std::size_t successes = 0;
        double fidelity_sum = 0.0;
        for (const auto& t : results) {
            if (t.success) {
                ++successes;
                fidelity_sum += t.fidelity;
            }
        }
        r.trials_run = cfg.trials;
        r.empirical_success_probability =
            static_cast<double>(successes) / static_cast<double>(cfg.trials);
        if (successes > 0) {
            r.mean_fidelity_on_success = fidelity_sum / static_cast<double>(successes);
        }
    }

    r.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline io::ordered_json report_to_json(const ExperimentReport& r) {
    const auto& cfg = r.config;
    io::ordered_json c;
    c["protocol"] = protocol_name(cfg.protocol);
    c["kind"] = states::kind_name(cfg.target.spec.kind);
    c["s"] = cfg.target.spec.s;
    c["pairs"] = r.pairs_used;
    c["mode"] = mode_name(cfg.mode);
    if (cfg.mode == RunMode::sample) {
        c["trials"] = cfg.trials;
        c["seed"] = cfg.seed;
    }
    if (cfg.protocol == Protocol::separable) {
        c["policy"] = separable::policy_name(cfg.policy);
        c["us_catalog"] = cfg.us_catalog;
    }

    io::ordered_json j;
    j["config"] = std::move(c);
    io::ordered_json p;
    p["exact"] = r.exact_success_probability;
    if (r.empirical_success_probability) p["empirical"] = *r.empirical_success_probability;
    j["success_probability"] = std::move(p);
    j["mean_fidelity_on_success"] =
        r.mean_fidelity_on_success ? io::ordered_json(*r.mean_fidelity_on_success)
                                   : io::ordered_json(nullptr);
    j["cbits_per_run"] = r.cbits_per_run;
    j["teleport_cbits_baseline"] = r.teleport_cbits;
    if (cfg.mode == RunMode::sample) j["trials_run"] = r.trials_run;
    if (cfg.mode == RunMode::exhaustive) {
        j["branches"] = io::ordered_json::array();
        for (const auto& b : r.branches) {
            io::ordered_json row;
            row["k"] = b.k;
            row["prob"] = b.prob;
            row["success"] = b.success;
            row["fidelity"] = b.fidelity;
            row["cbits"] = b.cbits;
            j["branches"].push_back(std::move(row));
        }
    }
    return j;
}

namespace detail {

// Shortest round-trip decimal form, identical to the JSON rendering.
inline std::string csv_number(double x) { return io::ordered_json(x).dump(); }

}  // namespace detail

/// Serialized report bytes. JSON is a single object; CSV is one header line
/// plus one row per branch (exhaustive) or a single aggregate row (sample).
inline std::string emit_report(const ExperimentReport& r, ReportFormat format) {
    if (format == ReportFormat::json) return report_to_json(r).dump(2) + "\n";

    std::string out;
    if (r.config.mode == RunMode::exhaustive) {
        out += "k,prob,success,fidelity,cbits\n";
        for (const auto& b : r.branches) {
            out += std::to_string(b.k) + ',' + detail::csv_number(b.prob) + ',' +
                   (b.success ? "1" : "0") + ',' + detail::csv_number(b.fidelity) + ',' +
                   detail::csv_number(b.cbits) + '\n';
        }
    } else {
        out +=
            "protocol,s,pairs,mode,trials,seed,success_probability_exact,"
            "success_probability_empirical,mean_fidelity_on_success,cbits_per_run,"
            "teleport_cbits_baseline\n";
        out += protocol_name(r.config.protocol) + ',' + std::to_string(r.config.target.spec.s) +
               ',' + std::to_string(r.pairs_used) + ',' + mode_name(r.config.mode) + ',' +
               std::to_string(r.config.trials) + ',' + std::to_string(r.config.seed) + ',' +
               detail::csv_number(r.exact_success_probability) + ',' +
               detail::csv_number(r.empirical_success_probability.value_or(0.0)) + ',' +
               (r.mean_fidelity_on_success ? detail::csv_number(*r.mean_fidelity_on_success)
                                           : std::string{}) +
               ',' + detail::csv_number(r.cbits_per_run) + ',' +
               detail::csv_number(r.teleport_cbits) + '\n';
    }
    return out;
}

}  // namespace qrsp::experiment
