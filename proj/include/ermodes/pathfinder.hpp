#pragma once

// Breadth-first path search over an ER diagram, from the entity anchoring
// a target feature to an important feature, plus depth-bounded random walks.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ermodes/er_model.hpp"

namespace ermodes {

enum class Strategy { shortest, shortest_all, all, random };

inline std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::shortest: return "shortest";
        case Strategy::shortest_all: return "shortest-all";
        case Strategy::all: return "all";
        case Strategy::random: return "random";
    }
    return "?";
}

// Accepts the CLI spelling ("shortest-all") and the underscore form.
inline std::optional<Strategy> parse_strategy(std::string_view s) {
    if (s == "shortest") return Strategy::shortest;
    if (s == "shortest-all" || s == "shortest_all") return Strategy::shortest_all;
    if (s == "all") return Strategy::all;
    if (s == "random") return Strategy::random;
    return std::nullopt;
}

struct WalkConfig {
    Strategy strategy = Strategy::shortest;
    int max_depth = 4;  // relationships per path
    std::uint64_t seed = 0;
    int num_walks = 10;
};

class InvalidConfig : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidFeature : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void check_config(const WalkConfig& cfg) {
    if (cfg.max_depth < 1) throw InvalidConfig("max_depth must be >= 1");
    if (cfg.strategy == Strategy::random && cfg.num_walks < 1)
        throw InvalidConfig("num_walks must be >= 1 for the random strategy");
}

// Alternating entity/relationship names starting at an entity. A path
// either ends at an entity or, when the feature it reaches belongs to the
// relationship just traversed, at that relationship.
struct Path {
    std::vector<std::string> steps;
    FeatureRef endpoint;

    std::size_t relationship_count() const { return steps.size() / 2; }
    bool ends_at_relationship() const { return !steps.empty() && steps.size() % 2 == 0; }
    const std::string& start() const { return steps.front(); }

    friend bool operator==(const Path&, const Path&) = default;
    friend auto operator<=>(const Path&, const Path&) = default;
};

// "Professor -[Advises]-> Student -[Takes] => Takes.Grade"
inline std::string render(const Path& p) {
    std::string out;
    for (std::size_t i = 0; i < p.steps.size(); ++i) {
        if (i % 2 == 0) out += p.steps[i];
        else out += " -[" + p.steps[i] + "]" + (i + 1 < p.steps.size() ? "-> " : "");
    }
    if (p.ends_at_relationship() || p.endpoint.kind == FeatureRef::Kind::attribute)
        out += " => " + to_string(p.endpoint);
    return out;
}

// Entities reachable from `from` through `r`: distinct names in participant
// order, where `from` itself counts only if it holds a second position.
inline std::vector<std::string> next_entities(const Relationship& r, std::string_view from) {
    auto occurrences = std::count(r.participants.begin(), r.participants.end(), from);
    std::vector<std::string> out;
    if (occurrences == 0) return out;
    for (const auto& p : r.participants) {
        if (p == from && occurrences < 2) continue;
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Why `p` is not a walk in `d`, or nullopt when it is.
inline std::optional<std::string> path_mismatch(const ERDiagram& d, const Path& p) {
    if (p.steps.empty()) return "empty path";
    if (d.find_entity(p.steps.front()) == nullptr) return "unknown start entity " + p.steps.front();
    for (std::size_t i = 1; i < p.steps.size(); i += 2) {
        const auto* r = d.find_relationship(p.steps[i]);
        if (r == nullptr) return "unknown relationship " + p.steps[i];
        const auto& from = p.steps[i - 1];
        if (std::find(r->participants.begin(), r->participants.end(), from) == r->participants.end())
            return from + " does not participate in " + r->name;
        if (i + 1 < p.steps.size()) {
            auto next = next_entities(*r, from);
            if (std::find(next.begin(), next.end(), p.steps[i + 1]) == next.end())
                return p.steps[i + 1] + " is not reachable from " + from + " via " + r->name;
        }
    }
    return std::nullopt;
}

// Distinct entities a target is anchored at, in participant order.
inline std::vector<std::string> anchors_of(const ERDiagram& d, const FeatureRef& t) {
    std::vector<std::string> out;
    auto add_participants = [&](const Relationship& r) {
        for (const auto& p : r.participants)
            if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    };
    switch (t.kind) {
        case FeatureRef::Kind::attribute:
            if (d.find_attribute(t) == nullptr) break;
            if (d.find_entity(t.owner) != nullptr) out.push_back(t.owner);
            else add_participants(*d.find_relationship(t.owner));
            break;
        case FeatureRef::Kind::relationship:
            if (const auto* r = d.find_relationship(t.name)) add_participants(*r);
            break;
        case FeatureRef::Kind::entity:
            if (d.find_entity(t.name) != nullptr) out.push_back(t.name);
            break;
    }
    if (out.empty()) throw InvalidFeature("feature does not resolve: " + to_string(t));
    return out;
}

struct PathSearch {
    std::vector<Path> paths;
    // Set when no path reaches the feature within the depth bound.
    std::optional<std::string> diagnostic;
};

namespace detail {

inline bool entity_reaches(std::string_view entity, const FeatureRef& u) {
    if (u.kind == FeatureRef::Kind::entity) return u.name == entity;
    if (u.kind == FeatureRef::Kind::attribute) return u.owner == entity;
    return false;
}

inline bool relationship_reaches(const Relationship& r, const FeatureRef& u) {
    if (u.kind == FeatureRef::Kind::relationship) return u.name == r.name;
    if (u.kind == FeatureRef::Kind::attribute) return u.owner == r.name;
    return false;
}

inline std::vector<Path> search_from(const ERDiagram& d, const std::string& anchor,
                                     const FeatureRef& u, const WalkConfig& cfg) {
    const bool first_only = cfg.strategy == Strategy::shortest;
    std::vector<Path> solutions;
    std::set<std::vector<std::string>> searched;
    std::deque<std::vector<std::string>> to_explore;

    if (entity_reaches(anchor, u)) {
        solutions.push_back({{anchor}, u});
        if (first_only) return solutions;
    }
    to_explore.push_back({anchor});

    while (!to_explore.empty()) {
        auto n = std::move(to_explore.front());
        to_explore.pop_front();
        if (n.size() / 2 >= static_cast<std::size_t>(cfg.max_depth)) continue;
        // Minimal-length solutions are all generated before anything longer is dequeued.
        if (cfg.strategy == Strategy::shortest_all && !solutions.empty() &&
            n.size() / 2 + 1 > solutions.front().relationship_count())
            break;

        const auto& x = n.back();
        for (const auto* r : d.incident(x)) {
            auto via = n;
            via.push_back(r->name);
            if (relationship_reaches(*r, u) && searched.insert(via).second) {
                solutions.push_back({via, u});
                if (first_only) return solutions;
            }
            for (const auto& y : next_entities(*r, x)) {
                auto extended = via;
                extended.push_back(y);
                if (!searched.insert(extended).second) continue;
                if (entity_reaches(y, u)) {
                    solutions.push_back({extended, u});
                    if (first_only) return solutions;
                }
                to_explore.push_back(std::move(extended));
            }
        }
    }
    return solutions;
}

}  // namespace detail

// Paths from the anchor(s) of `t` to `u`, breadth-first. For a target with
// several anchor entities each anchor is searched and the results appended.
inline PathSearch find_paths(const ERDiagram& d, const FeatureRef& t, const FeatureRef& u,
                             const WalkConfig& cfg) {
    check_config(cfg);
    if (cfg.strategy == Strategy::random)
        throw InvalidConfig("find_paths does not take the random strategy; use random_paths");
    if (!d.resolves(u)) throw InvalidFeature("feature does not resolve: " + to_string(u));
    PathSearch result;
    for (const auto& anchor : anchors_of(d, t)) {
        for (auto& p : detail::search_from(d, anchor, u, cfg))
            if (std::find(result.paths.begin(), result.paths.end(), p) == result.paths.end())
                result.paths.push_back(std::move(p));
    }
    if (result.paths.empty())
        result.diagnostic = "no path from " + to_string(t) + " to " + to_string(u) + " within " +
                            std::to_string(cfg.max_depth) + " relationship(s)";
    return result;
}

// `num_walks` uniform random walks of up to `max_depth` relationships from
// the target's anchor(s). Each step picks uniformly among incident
// (relationship, next entity) pairs; a walk stuck at a dead end is kept.
inline std::vector<Path> random_paths(const ERDiagram& d, const FeatureRef& t, const WalkConfig& cfg) {
    check_config(cfg);
    if (cfg.strategy != Strategy::random) throw InvalidConfig("random_paths requires the random strategy");
    const auto anchors = anchors_of(d, t);
    std::mt19937_64 engine(cfg.seed);
    std::vector<Path> walks;
    walks.reserve(static_cast<std::size_t>(cfg.num_walks));
    for (int w = 0; w < cfg.num_walks; ++w) {
        std::vector<std::string> steps{anchors[static_cast<std::size_t>(w) % anchors.size()]};
        for (int depth = 0; depth < cfg.max_depth; ++depth) {
            std::vector<std::pair<const std::string*, std::string>> choices;
            for (const auto* r : d.incident(steps.back()))
                for (auto& y : next_entities(*r, steps.back())) choices.emplace_back(&r->name, std::move(y));
            if (choices.empty()) break;
            // Plain modulo keeps output independent of the standard library's distributions.
            const auto& pick = choices[engine() % choices.size()];
            steps.push_back(*pick.first);
            steps.push_back(pick.second);
        }
        auto end = FeatureRef::entity(steps.back());
        walks.push_back({std::move(steps), std::move(end)});
    }
    return walks;
}

}  // namespace ermodes
