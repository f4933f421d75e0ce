#pragma once

// Compiles paths into mode declarations and emits/parses mode files.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ermodes/er_model.hpp"
#include "ermodes/pathfinder.hpp"

namespace ermodes {

// Declaration order doubles as the canonical sort order and matches the
// ASCII order of the markers ('#' < '+' < '-').
enum class Direction { constant, input, output };

inline char marker(Direction d) {
    switch (d) {
        case Direction::constant: return '#';
        case Direction::input: return '+';
        case Direction::output: return '-';
    }
    return '?';
}

struct ArgMode {
    Direction direction = Direction::input;
    std::string type_name;

    friend bool operator==(const ArgMode&, const ArgMode&) = default;
    friend auto operator<=>(const ArgMode&, const ArgMode&) = default;
};

struct ModeSpec {
    std::string predicate;
    std::vector<ArgMode> args;

    friend bool operator==(const ModeSpec&, const ModeSpec&) = default;
    friend auto operator<=>(const ModeSpec&, const ModeSpec&) = default;
};

// "takes(+student, -course, #grade)"
inline std::string render(const ModeSpec& m) {
    std::string out = m.predicate + "(";
    for (std::size_t i = 0; i < m.args.size(); ++i) {
        if (i != 0) out += ", ";
        out += marker(m.args[i].direction);
        out += m.args[i].type_name;
    }
    return out + ")";
}

struct ModeSet {
    ModeSpec target_mode;
    std::vector<ModeSpec> body_modes;  // sorted, unique
    // Metadata; not part of equality.
    std::vector<std::string> warnings;

    friend bool operator==(const ModeSet& a, const ModeSet& b) {
        return a.target_mode == b.target_mode && a.body_modes == b.body_modes;
    }
};

inline void canonicalize(std::vector<ModeSpec>& modes) {
    std::sort(modes.begin(), modes.end());
    modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
}

class PathDiagramMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class MissingAnnotation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// a(+e) for a binary attribute, a(+e, #a) for a multivalued one.
inline ModeSpec entity_attribute_mode(const Entity& e, const Attribute& a) {
    ModeSpec m{lowercase(a.name), {{Direction::input, lowercase(e.name)}}};
    if (a.kind == AttributeKind::multivalued) m.args.push_back({Direction::constant, lowercase(a.name)});
    return m;
}

// Mode for `r` with participant `input_pos` bound (or none, for all outputs).
inline ModeSpec relationship_mode(const Relationship& r, std::optional<std::size_t> input_pos) {
    ModeSpec m{lowercase(r.name), {}};
    for (std::size_t i = 0; i < r.participants.size(); ++i)
        m.args.push_back({input_pos == i ? Direction::input : Direction::output, lowercase(r.participants[i])});
    for (const auto& a : r.attributes) m.args.push_back({Direction::constant, lowercase(a.name)});
    return m;
}

// Head mode for the target; every argument is an input.
inline ModeSpec target_mode_for(const ERDiagram& d, const FeatureRef& t) {
    ModeSpec m;
    auto all_inputs = [&m](const Relationship& r) {
        for (const auto& p : r.participants) m.args.push_back({Direction::input, lowercase(p)});
    };
    if (t.kind == FeatureRef::Kind::relationship) {
        const auto* r = d.find_relationship(t.name);
        if (r == nullptr) throw InvalidFeature("target does not resolve: " + to_string(t));
        m.predicate = lowercase(r->name);
        all_inputs(*r);
        for (const auto& a : r->attributes) m.args.push_back({Direction::input, lowercase(a.name)});
        return m;
    }
    const auto* a = d.find_attribute(t);
    if (a == nullptr) throw InvalidFeature("target must be an attribute or relationship: " + to_string(t));
    m.predicate = lowercase(a->name);
    if (const auto* e = d.find_entity(t.owner)) m.args.push_back({Direction::input, lowercase(e->name)});
    else all_inputs(*d.find_relationship(t.owner));
    if (a->kind == AttributeKind::multivalued) m.args.push_back({Direction::input, lowercase(a->name)});
    return m;
}

// Modes that let a learner follow `p`. Entering relationship r from entity
// e, each participant slot of type e in turn becomes the input while the
// other participants are outputs; attribute slots are constants. A path
// that ends at an entity owning the endpoint attribute also yields that
// attribute's mode.
inline std::vector<ModeSpec> create_mode(const Path& p, const ERDiagram& d) {
    if (auto why = path_mismatch(d, p)) throw PathDiagramMismatch(*why);
    std::vector<ModeSpec> out;
    for (std::size_t i = 1; i < p.steps.size(); i += 2) {
        const auto& r = *d.find_relationship(p.steps[i]);
        const auto& incoming = p.steps[i - 1];
        for (std::size_t pos = 0; pos < r.participants.size(); ++pos)
            if (r.participants[pos] == incoming) out.push_back(relationship_mode(r, pos));
    }
    if (!p.ends_at_relationship() && p.endpoint.kind == FeatureRef::Kind::attribute &&
        p.endpoint.owner == p.steps.back()) {
        if (const auto* a = d.find_attribute(p.endpoint))
            out.push_back(entity_attribute_mode(*d.find_entity(p.endpoint.owner), *a));
    }
    return out;
}

// Guided mode construction: paths from the target to each important
// feature, compiled and unioned. With the random strategy the important
// list is ignored and random walks from the target are compiled instead.
inline ModeSet gmc(const ERDiagram& d, const WalkConfig& cfg) {
    check_config(cfg);
    const auto& ann = d.annotation();
    if (!ann) throw MissingAnnotation("diagram has no annotation");
    if (ann->important.empty()) throw MissingAnnotation("annotation marks no important features");

    ModeSet m;
    m.target_mode = target_mode_for(d, ann->target);
    auto add = [&](const Path& p) {
        for (auto& mode : create_mode(p, d)) m.body_modes.push_back(std::move(mode));
    };
    if (cfg.strategy == Strategy::random) {
        for (const auto& p : random_paths(d, ann->target, cfg)) add(p);
    } else {
        for (const auto& feature : ann->important) {
            auto found = find_paths(d, ann->target, feature, cfg);
            if (found.diagnostic) m.warnings.push_back("unreachable: " + *found.diagnostic);
            for (const auto& p : found.paths) add(p);
        }
    }
    canonicalize(m.body_modes);
    return m;
}

// ---------------------------------------------------------------------------
// Mode files

enum class Dialect { generic, aleph, boostsrl };

inline std::optional<Dialect> parse_dialect(std::string_view s) {
    if (s == "generic") return Dialect::generic;
    if (s == "aleph") return Dialect::aleph;
    if (s == "boostsrl") return Dialect::boostsrl;
    return std::nullopt;
}

inline std::string emit_modes(const ModeSet& m, Dialect dialect) {
    std::ostringstream out;
    switch (dialect) {
        case Dialect::generic:
            out << "mode: " << render(m.target_mode) << ".\n";
            for (const auto& b : m.body_modes) out << "mode: " << render(b) << ".\n";
            break;
        case Dialect::aleph:
            out << ":- modeh(1, " << render(m.target_mode) << ").\n";
            for (const auto& b : m.body_modes) out << ":- modeb(*, " << render(b) << ").\n";
            break;
        case Dialect::boostsrl:
            out << "setParam: maxTreeDepth=3.\n"
                << "setParam: nodeSize=2.\n"
                << "setParam: numOfClauses=8.\n";
            out << "mode: " << render(m.target_mode) << ".\n";
            for (const auto& b : m.body_modes) out << "mode: " << render(b) << ".\n";
            break;
    }
    return out.str();
}

namespace detail {

class ModeLineParser {
public:
    ModeLineParser(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

    ModeSpec parse() {
        skip_space();
        expect_word("mode");
        skip_space();
        expect(':');
        skip_space();
        ModeSpec m;
        m.predicate = identifier("predicate name");
        skip_space();
        expect('(');
        skip_space();
        if (peek() != ')') {
            for (;;) {
                ArgMode a;
                switch (peek()) {
                    case '+': a.direction = Direction::input; break;
                    case '-': a.direction = Direction::output; break;
                    case '#': a.direction = Direction::constant; break;
                    default: fail("direction marker '+', '-' or '#'");
                }
                ++pos_;
                a.type_name = identifier("type name");
                m.args.push_back(std::move(a));
                skip_space();
                if (peek() == ',') {
                    ++pos_;
                    skip_space();
                    continue;
                }
                break;
            }
        }
        expect(')');
        skip_space();
        expect('.');
        skip_space();
        if (pos_ != line_.size()) fail("end of line");
        return m;
    }

private:
    char peek() const { return pos_ < line_.size() ? line_[pos_] : '\0'; }

    [[noreturn]] void fail(const std::string& expected) const {
        throw SyntaxError("line " + std::to_string(line_no_) + ", column " + std::to_string(pos_ + 1), expected);
    }

    void skip_space() {
        while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t' || line_[pos_] == '\r')) ++pos_;
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("'") + c + "'");
        ++pos_;
    }

    void expect_word(std::string_view w) {
        if (line_.substr(pos_, w.size()) != w) fail("\"" + std::string(w) + "\"");
        pos_ += w.size();
    }

    std::string identifier(const std::string& what) {
        auto begin = pos_;
        while (pos_ < line_.size() &&
               (std::isalnum(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '_'))
            ++pos_;
        auto id = line_.substr(begin, pos_ - begin);
        if (!is_identifier(id)) {
            pos_ = begin;
            fail(what);
        }
        return std::string(id);
    }

    std::string_view line_;
    std::size_t line_no_;
    std::size_t pos_ = 0;
};

}  // namespace detail

// Parses a generic-dialect mode file. The first declaration is the target
// mode. Blank lines and lines starting with '%' or "//" are skipped.
inline ModeSet parse_modes(std::string_view text) {
    ModeSet m;
    bool have_target = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        auto eol = text.find('\n');
        auto line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);

        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos) continue;
        auto rest = line.substr(first);
        if (rest.front() == '%' || rest.substr(0, 2) == "//") continue;

        auto mode = detail::ModeLineParser(line, line_no).parse();
        if (!have_target) {
            for (const auto& a : mode.args)
                if (a.direction != Direction::input)
                    throw SyntaxError("line " + std::to_string(line_no), "target mode with only '+' arguments");
            m.target_mode = std::move(mode);
            have_target = true;
        } else {
            m.body_modes.push_back(std::move(mode));
        }
    }
    if (!have_target) throw SyntaxError("end of input", "at least one mode declaration");
    canonicalize(m.body_modes);
    return m;
}

}  // namespace ermodes
