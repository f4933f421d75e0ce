#pragma once

// Mode-constrained clause-body enumeration. The number of distinct legal
// bodies per length is the search-space proxy used to compare mode sets.
//
// Bodies are sets of literals identified up to renaming of body variables.
// Head variables (ids 0..h-1, one per target-mode argument) are bound from
// the start and are never renamed.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ermodes/er_model.hpp"
#include "ermodes/modegen.hpp"

namespace ermodes {

struct Term {
    enum class Kind { variable, constant };

    Kind kind = Kind::variable;
    int var = -1;  // variables only
    std::string type;

    static Term variable(int id, std::string type) { return {Kind::variable, id, std::move(type)}; }
    static Term constant(std::string type) { return {Kind::constant, -1, std::move(type)}; }

    friend bool operator==(const Term&, const Term&) = default;
    friend auto operator<=>(const Term&, const Term&) = default;
};

struct ClauseLiteral {
    std::string predicate;
    std::vector<Term> args;

    friend bool operator==(const ClauseLiteral&, const ClauseLiteral&) = default;
    friend auto operator<=>(const ClauseLiteral&, const ClauseLiteral&) = default;
};

using ClauseBody = std::vector<ClauseLiteral>;

struct ClauseSpaceReport {
    std::vector<std::uint64_t> counts_by_length;  // index = body length
    std::uint64_t total = 0;
    bool truncated = false;

    friend bool operator==(const ClauseSpaceReport&, const ClauseSpaceReport&) = default;
};

inline constexpr std::uint64_t default_clause_cap = 1'000'000;

class UnknownPredicate : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline std::vector<std::string> head_types(const ModeSet& m) {
    std::vector<std::string> out;
    for (const auto& a : m.target_mode.args) out.push_back(a.type_name);
    return out;
}

// "advises(H0, V1)"; head variables print as H<id>, body variables as V<id>.
inline std::string render(const ClauseLiteral& l, int head_arity) {
    std::string out = l.predicate + "(";
    for (std::size_t i = 0; i < l.args.size(); ++i) {
        if (i != 0) out += ", ";
        const auto& t = l.args[i];
        if (t.kind == Term::Kind::constant) out += "#" + t.type;
        else out += (t.var < head_arity ? "H" : "V") + std::to_string(t.var);
    }
    return out + ")";
}

// Identical for two bodies iff they are equal as literal sets up to a
// renaming of body variables. Minimum over literal orders of the text
// obtained by numbering body variables in order of first appearance.
inline std::string canonical_key(const ClauseBody& body, int head_arity) {
    std::vector<std::size_t> order(body.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::string best;
    bool first = true;
    std::vector<int> renamed;
    do {
        std::string key;
        renamed.clear();
        for (auto idx : order) {
            const auto& lit = body[idx];
            key += lit.predicate;
            key += '(';
            for (const auto& t : lit.args) {
                if (t.kind == Term::Kind::constant) {
                    key += "#" + t.type;
                } else if (t.var < head_arity) {
                    key += "H" + std::to_string(t.var);
                } else {
                    auto it = std::find(renamed.begin(), renamed.end(), t.var);
                    auto n = it - renamed.begin();
                    if (it == renamed.end()) renamed.push_back(t.var);
                    key += "V" + std::to_string(n) + ":" + t.type;
                }
                key += ',';
            }
            key += ");";
        }
        if (first || key < best) best = std::move(key);
        first = false;
    } while (std::next_permutation(order.begin(), order.end()));
    return best;
}

namespace detail {

struct PartialBody {
    ClauseBody literals;
    std::vector<std::string> var_types;  // indexed by variable id
};

// Every literal that `mode` can add to `b`: inputs range over bound
// variables of the right type, outputs are fresh, constants are placeholders.
inline void extensions(const PartialBody& b, const ModeSpec& mode,
                       const std::function<void(ClauseLiteral, std::vector<std::string>)>& emit) {
    std::vector<std::vector<int>> choices;
    for (const auto& a : mode.args) {
        std::vector<int> c;
        if (a.direction == Direction::input)
            for (int v = 0; v < static_cast<int>(b.var_types.size()); ++v)
                if (b.var_types[static_cast<std::size_t>(v)] == a.type_name) c.push_back(v);
        if (a.direction == Direction::input && c.empty()) return;
        choices.push_back(std::move(c));
    }
    std::vector<std::size_t> pick(mode.args.size(), 0);
    for (;;) {
        ClauseLiteral lit{mode.predicate, {}};
        auto types = b.var_types;
        for (std::size_t i = 0; i < mode.args.size(); ++i) {
            const auto& a = mode.args[i];
            switch (a.direction) {
                case Direction::input: lit.args.push_back(Term::variable(choices[i][pick[i]], a.type_name)); break;
                case Direction::output:
                    lit.args.push_back(Term::variable(static_cast<int>(types.size()), a.type_name));
                    types.push_back(a.type_name);
                    break;
                case Direction::constant: lit.args.push_back(Term::constant(a.type_name)); break;
            }
        }
        emit(std::move(lit), std::move(types));

        std::size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (mode.args[i].direction != Direction::input) continue;
            if (++pick[i] < choices[i].size()) break;
            pick[i] = 0;
        }
        if (i == pick.size()) return;
    }
}

}  // namespace detail

// Streams every distinct legal body of length <= max_len to `visit`
// (shortest first, deterministic order) and stops after `cap` bodies.
inline ClauseSpaceReport enumerate_clauses(const ModeSet& m, int max_len, std::uint64_t cap,
                                           const std::function<void(const ClauseBody&)>& visit = {}) {
    if (max_len < 0) throw std::invalid_argument("max_len must be >= 0");
    if (cap < 1) throw std::invalid_argument("cap must be >= 1");
    const auto head = head_types(m);
    const int head_arity = static_cast<int>(head.size());

    ClauseSpaceReport report;
    report.counts_by_length.assign(static_cast<std::size_t>(max_len) + 1, 0);

    auto accept = [&](const ClauseBody& body) {
        if (report.total == cap) {
            report.truncated = true;
            return false;
        }
        ++report.counts_by_length[body.size()];
        ++report.total;
        if (visit) visit(body);
        return true;
    };

    std::vector<detail::PartialBody> level{{{}, head}};
    if (!accept(level.front().literals)) return report;

    for (int len = 1; len <= max_len && !level.empty(); ++len) {
        std::vector<detail::PartialBody> next;
        std::unordered_set<std::string> seen;
        for (const auto& body : level) {
            for (const auto& mode : m.body_modes) {
                bool stop = false;
                detail::extensions(body, mode, [&](ClauseLiteral lit, std::vector<std::string> types) {
                    if (stop) return;
                    if (std::find(body.literals.begin(), body.literals.end(), lit) != body.literals.end()) return;
                    detail::PartialBody grown{body.literals, std::move(types)};
                    grown.literals.push_back(std::move(lit));
                    if (!seen.insert(canonical_key(grown.literals, head_arity)).second) return;
                    if (!accept(grown.literals)) {
                        stop = true;
                        return;
                    }
                    next.push_back(std::move(grown));
                });
                if (stop) return report;
            }
        }
        level = std::move(next);
    }
    return report;
}

inline std::vector<ClauseBody> collect_clauses(const ModeSet& m, int max_len,
                                               std::uint64_t cap = default_clause_cap) {
    std::vector<ClauseBody> out;
    enumerate_clauses(m, max_len, cap, [&](const ClauseBody& b) { out.push_back(b); });
    return out;
}

namespace detail {

inline bool literal_fits(const ClauseLiteral& lit, const ModeSpec& mode, const std::set<int>& bound,
                         std::vector<int>& introduced) {
    if (lit.predicate != mode.predicate || lit.args.size() != mode.args.size()) return false;
    introduced.clear();
    for (std::size_t i = 0; i < lit.args.size(); ++i) {
        const auto& t = lit.args[i];
        const auto& a = mode.args[i];
        if (t.type != a.type_name) return false;
        switch (a.direction) {
            case Direction::constant:
                if (t.kind != Term::Kind::constant) return false;
                break;
            case Direction::input:
                if (t.kind != Term::Kind::variable || bound.count(t.var) == 0) return false;
                break;
            case Direction::output:
                if (t.kind != Term::Kind::variable || bound.count(t.var) != 0) return false;
                if (std::find(introduced.begin(), introduced.end(), t.var) != introduced.end()) return false;
                introduced.push_back(t.var);
                break;
        }
    }
    return true;
}

inline bool order_exists(const ClauseBody& body, const ModeSet& m, std::vector<bool>& used, std::set<int>& bound,
                         std::size_t remaining) {
    if (remaining == 0) return true;
    std::vector<int> introduced;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (used[i]) continue;
        for (const auto& mode : m.body_modes) {
            if (!literal_fits(body[i], mode, bound, introduced)) continue;
            auto added = introduced;
            used[i] = true;
            bound.insert(added.begin(), added.end());
            if (order_exists(body, m, used, bound, remaining - 1)) return true;
            for (int v : added) bound.erase(v);
            used[i] = false;
        }
    }
    return false;
}

}  // namespace detail

// True iff some ordering of `body` is legal under `m`: every input
// variable is a head variable or was introduced by an earlier output.
// Variables 0..h-1 denote the head arguments.
inline bool contains_clause(const ModeSet& m, ClauseBody body) {
    for (const auto& lit : body) {
        bool known = std::any_of(m.body_modes.begin(), m.body_modes.end(),
                                 [&](const ModeSpec& s) { return s.predicate == lit.predicate; });
        if (!known) throw UnknownPredicate("no mode declares predicate " + lit.predicate);
    }
    std::sort(body.begin(), body.end());
    body.erase(std::unique(body.begin(), body.end()), body.end());

    const auto head = head_types(m);
    std::vector<std::string> var_types;
    auto type_of = [&](int v) -> std::string& {
        if (v >= static_cast<int>(var_types.size())) var_types.resize(static_cast<std::size_t>(v) + 1);
        return var_types[static_cast<std::size_t>(v)];
    };
    for (std::size_t i = 0; i < head.size(); ++i) type_of(static_cast<int>(i)) = head[i];
    for (const auto& lit : body)
        for (const auto& t : lit.args) {
            if (t.kind != Term::Kind::variable) continue;
            if (t.var < 0) return false;
            auto& known = type_of(t.var);
            if (known.empty()) known = t.type;
            else if (known != t.type) return false;
        }

    std::set<int> bound;
    for (int i = 0; i < static_cast<int>(head.size()); ++i) bound.insert(i);
    std::vector<bool> used(body.size(), false);
    return detail::order_exists(body, m, used, bound, body.size());
}

// Naive baseline: every relationship with each participant slot as the
// single input, plus an all-output variant, plus every entity-attribute mode.
inline ModeSet exhaustive_modes(const ERDiagram& d) {
    const auto& ann = d.annotation();
    if (!ann) throw MissingAnnotation("diagram has no annotation");
    ModeSet m;
    m.target_mode = target_mode_for(d, ann->target);
    for (const auto& r : d.relationships()) {
        for (std::size_t pos = 0; pos < r.participants.size(); ++pos)
            m.body_modes.push_back(relationship_mode(r, pos));
        m.body_modes.push_back(relationship_mode(r, std::nullopt));
    }
    for (const auto& e : d.entities())
        for (const auto& a : e.attributes) m.body_modes.push_back(entity_attribute_mode(e, a));
    canonicalize(m.body_modes);
    return m;
}

inline nlohmann::json report_to_json(const ClauseSpaceReport& r) {
    nlohmann::json counts = nlohmann::json::object();
    for (std::size_t len = 0; len < r.counts_by_length.size(); ++len) counts[std::to_string(len)] = r.counts_by_length[len];
    return {{"counts_by_length", counts},
            {"metric", "distinct clause bodies up to variable renaming (search-space proxy)"},
            {"total", r.total},
            {"truncated", r.truncated}};
}

inline std::string serialize_report(const ClauseSpaceReport& r) { return report_to_json(r).dump(2) + "\n"; }

inline std::string render_table(const ClauseSpaceReport& r) {
    std::string out = "length  bodies\n";
    for (std::size_t len = 0; len < r.counts_by_length.size(); ++len) {
        auto l = std::to_string(len);
        out += l + std::string(8 - std::min<std::size_t>(l.size(), 7), ' ') + std::to_string(r.counts_by_length[len]) + "\n";
    }
    out += "total   " + std::to_string(r.total) + (r.truncated ? " (truncated at cap)" : "") + "\n";
    out += "metric: distinct clause bodies up to variable renaming (search-space proxy)\n";
    return out;
}

}  // namespace ermodes
