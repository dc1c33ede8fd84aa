#pragma once

// JSON input and output for the library's domain types.
//
// Input: target-state descriptions, one JSON object per file, in one of
// three shapes keyed by "kind":
//
//   {"kind": "equatorial", "s": 3, "phases": [0.0, 1.2, 2.5]}
//   {"kind": "real",       "s": 6, "coeffs": [ ... 6 reals ... ]}
//   {"kind": "general",    "s": 4, "re": [ ... ], "im": [ ... ]}
//
// Phases are radians, one per level. Coefficient vectors are renormalized
// when their norm is within 1e-6 of 1 and rejected otherwise. Unknown or
// missing keys are errors; the loader never guesses.
//
// Output: serializers for protocol transcripts, branch tables, separability
// reports, and operator catalogs. All of them use insertion-ordered JSON so
// that a fixed input always produces the same bytes.

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qrsp/channel.hpp"
#include "qrsp/realspace.hpp"
#include "qrsp/separable.hpp"
#include "qrsp/states.hpp"

namespace qrsp::io {

using ordered_json = nlohmann::ordered_json;

/// A loaded target: the state itself plus, for equatorial targets, the raw
/// phase vector (the equatorial protocol is driven by phases, not by the
/// derived amplitudes).
struct Target {
    states::QuditSpec spec;
    std::vector<double> phases;  // filled iff spec.kind == equatorial
};

namespace detail {

inline const ordered_json& require_key(const ordered_json& j, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw std::invalid_argument("target JSON is missing the \"" + key + "\" field");
    }
    return *it;
}

inline void require_only_keys(const ordered_json& j, const std::vector<std::string>& keys) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const auto& k : keys) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw std::invalid_argument("target JSON has an unknown field \"" + it.key() + "\"");
        }
    }
}

inline std::size_t read_levels(const ordered_json& j) {
    const auto& s = require_key(j, "s");
    if (!s.is_number_integer() && !s.is_number_unsigned()) {
        throw std::invalid_argument("\"s\" must be a positive integer");
    }
    const auto v = s.get<long long>();
    if (v < 1) throw std::invalid_argument("\"s\" must be a positive integer");
    return static_cast<std::size_t>(v);
}

inline std::vector<double> read_real_array(const ordered_json& j, const std::string& key,
                                           std::size_t expected) {
    const auto& arr = require_key(j, key);
    if (!arr.is_array()) throw std::invalid_argument("\"" + key + "\" must be an array");
    if (arr.size() != expected) {
        throw std::invalid_argument("\"" + key + "\" must have exactly " +
                                    std::to_string(expected) + " entries");
    }
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& e : arr) {
        if (!e.is_number()) throw std::invalid_argument("\"" + key + "\" entries must be numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

}  // namespace detail

/// Parses a target description. Throws std::invalid_argument on any schema
/// violation; state-level validity (normalization, kind constraints) is
/// enforced by the states factories.
inline Target load_target(const ordered_json& j) {
    if (!j.is_object()) throw std::invalid_argument("target JSON must be a single object");
    const auto& kind = detail::require_key(j, "kind");
    if (!kind.is_string()) throw std::invalid_argument("\"kind\" must be a string");
    const std::string k = kind.get<std::string>();
    const std::size_t s = detail::read_levels(j);

    Target t;
    if (k == "equatorial") {
        detail::require_only_keys(j, {"kind", "s", "phases"});
        t.phases = detail::read_real_array(j, "phases", s);
        t.spec = states::equatorial_spec(s, t.phases);
    } else if (k == "real") {
        detail::require_only_keys(j, {"kind", "s", "coeffs"});
        t.spec = states::real_spec(s, detail::read_real_array(j, "coeffs", s));
    } else if (k == "general") {
        detail::require_only_keys(j, {"kind", "s", "re", "im"});
        t.spec = states::general_spec(s, detail::read_real_array(j, "re", s),
                                      detail::read_real_array(j, "im", s));
    } else {
        throw std::invalid_argument("unknown target kind \"" + k +
                                    "\" (expected equatorial, real, or general)");
    }
    return t;
}

inline Target load_target(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("target JSON does not parse: ") + e.what());
    }
    return load_target(j);
}

inline Target load_target_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open target file \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_target(buf.str());
}

/// Serializes a state back into the loader's schema. Equatorial phases are
/// recovered as principal-value arguments, which reload to the same state.
inline ordered_json target_to_json(const states::QuditSpec& q) {
    ordered_json j;
    j["kind"] = states::kind_name(q.kind);
    j["s"] = q.s;
    switch (q.kind) {
        case states::QuditKind::equatorial: {
            std::vector<double> phases;
            phases.reserve(q.s);
            for (const auto& a : q.amplitudes) phases.push_back(std::arg(a));
            j["phases"] = phases;
            break;
        }
        case states::QuditKind::real: {
            std::vector<double> coeffs;
            coeffs.reserve(q.s);
            for (const auto& a : q.amplitudes) coeffs.push_back(a.real());
            j["coeffs"] = coeffs;
            break;
        }
        case states::QuditKind::general: {
            std::vector<double> re, im;
            re.reserve(q.s);
            im.reserve(q.s);
            for (const auto& a : q.amplitudes) {
                re.push_back(a.real());
                im.push_back(a.imag());
            }
            j["re"] = re;
            j["im"] = im;
            break;
        }
    }
    return j;
}

// ---------------------------------------------------------------------------
// Result serializers
// ---------------------------------------------------------------------------

/// One sampled round: {protocol, s, L, outcome, success, fidelity, cbits,
/// messages: [{alphabet, symbol}]}.
inline ordered_json transcript_to_json(const channel::ProtocolTranscript& t) {
    ordered_json j;
    j["protocol"] = t.protocol;
    j["s"] = t.s;
    j["L"] = t.pairs;
    j["outcome"] = t.alice_outcome;
    j["success"] = t.success;
    j["fidelity"] = t.fidelity;
    j["cbits"] = t.cbits_total;
    j["messages"] = ordered_json::array();
    for (const auto& m : t.messages) {
        ordered_json msg;
        msg["alphabet"] = m.alphabet_size;
        msg["symbol"] = m.symbol;
        j["messages"].push_back(std::move(msg));
    }
    return j;
}

/// Exhaustive enumeration: the transcript header fields plus
/// branches: [{k, prob, fidelity_after_correction}].
inline ordered_json branch_table_to_json(const channel::BranchTable& t) {
    ordered_json j;
    j["protocol"] = t.protocol;
    j["s"] = t.s;
    j["L"] = t.pairs;
    j["success_probability"] = t.success_prob();
    j["cbits_per_run"] = t.cbits_per_run();
    j["branches"] = ordered_json::array();
    for (const auto& b : t.branches) {
        ordered_json row;
        row["k"] = b.outcome;
        row["prob"] = b.prob;
        row["fidelity_after_correction"] = b.fidelity;
        j["branches"].push_back(std::move(row));
    }
    return j;
}

/// Separability analysis: {grouping, measure, separable, factors}. The
/// grouping is reported as party sizes in slot order; each factor uses the
/// general-state schema ({re, im}).
inline ordered_json separability_report_to_json(const separable::SeparabilityReport& r) {
    ordered_json j;
    std::vector<std::size_t> sizes;
    sizes.reserve(r.grouping.parties.size());
    for (const auto& p : r.grouping.parties) sizes.push_back(p.size());
    j["grouping"] = sizes;
    j["measure"] = r.measure;
    j["separable"] = r.separable;
    j["factors"] = ordered_json::array();
    for (const auto& f : r.factors) {
        std::vector<double> re, im;
        re.reserve(f.amplitudes().size());
        im.reserve(f.amplitudes().size());
        for (const auto& a : f.amplitudes()) {
            re.push_back(a.real());
            im.push_back(a.imag());
        }
        ordered_json factor;
        factor["re"] = re;
        factor["im"] = im;
        j["factors"].push_back(std::move(factor));
    }
    return j;
}

namespace detail {

inline ordered_json real_matrix_to_json(const linalg::Matrix& m) {
    ordered_json rows = ordered_json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::vector<double> row;
        row.reserve(m.cols());
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c).real());
        rows.push_back(row);
    }
    return rows;
}

}  // namespace detail

/// Operator catalog dump: {s_cat, operators, factorizations}. Operators are
/// real matrices as nested arrays; each factorization slot is either null or
/// {m, n} with tensor(m, n) equal to the operator.
inline ordered_json catalog_to_json(const realspace::OperatorCatalog& cat) {
    ordered_json j;
    j["s_cat"] = cat.s_cat;
    j["operators"] = ordered_json::array();
    for (const auto& v : cat.operators) j["operators"].push_back(detail::real_matrix_to_json(v));
    j["factorizations"] = ordered_json::array();
    for (const auto& f : cat.factorizations) {
        if (!f) {
            j["factorizations"].push_back(nullptr);
        } else {
            ordered_json entry;
            entry["m"] = detail::real_matrix_to_json(f->m);
            entry["n"] = detail::real_matrix_to_json(f->n);
            j["factorizations"].push_back(std::move(entry));
        }
    }
    return j;
}

}  // namespace qrsp::io
