#pragma once

// Entity-Relationship diagram model: the source program that mode
// construction compiles. Diagrams are canonicalized at construction
// (entities, relationships and attributes sorted by name) and are
// immutable afterwards.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace ermodes {

enum class AttributeKind { binary, multivalued };

struct Attribute {
    std::string name;
    AttributeKind kind = AttributeKind::binary;

    friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct Entity {
    std::string name;
    std::vector<Attribute> attributes;

    friend bool operator==(const Entity&, const Entity&) = default;
};

struct Relationship {
    std::string name;
    // Ordered; an entity may appear more than once (reflexive relations).
    std::vector<std::string> participants;
    std::vector<Attribute> attributes;

    friend bool operator==(const Relationship&, const Relationship&) = default;
};

// Reference to an attribute (owner + name), an entity, or a relationship.
struct FeatureRef {
    enum class Kind { attribute, entity, relationship };

    Kind kind = Kind::entity;
    std::string owner;  // attribute refs only
    std::string name;

    static FeatureRef attribute(std::string owner, std::string name) {
        return {Kind::attribute, std::move(owner), std::move(name)};
    }
    static FeatureRef entity(std::string name) { return {Kind::entity, {}, std::move(name)}; }
    static FeatureRef relationship(std::string name) {
        return {Kind::relationship, {}, std::move(name)};
    }

    friend bool operator==(const FeatureRef&, const FeatureRef&) = default;
    friend auto operator<=>(const FeatureRef&, const FeatureRef&) = default;
};

inline std::string to_string(const FeatureRef& f) {
    return f.kind == FeatureRef::Kind::attribute ? f.owner + "." + f.name : f.name;
}

struct Annotation {
    FeatureRef target;
    // Selection order is meaningful and preserved.
    std::vector<FeatureRef> important;

    friend bool operator==(const Annotation&, const Annotation&) = default;
};

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto head = static_cast<unsigned char>(s.front());
    if (!(std::isalpha(head) || head == '_')) return false;
    return std::all_of(s.begin() + 1, s.end(), [](char ch) {
        auto c = static_cast<unsigned char>(ch);
        return std::isalnum(c) || c == '_';
    });
}

class ERDiagram {
public:
    ERDiagram() = default;

    ERDiagram(std::vector<Entity> entities, std::vector<Relationship> relationships,
              std::optional<Annotation> annotation = std::nullopt)
        : entities_(std::move(entities)),
          relationships_(std::move(relationships)),
          annotation_(std::move(annotation)) {
        auto by_name = [](const auto& a, const auto& b) { return a.name < b.name; };
        for (auto& e : entities_) std::stable_sort(e.attributes.begin(), e.attributes.end(), by_name);
        for (auto& r : relationships_)
            std::stable_sort(r.attributes.begin(), r.attributes.end(), by_name);
        std::stable_sort(entities_.begin(), entities_.end(), by_name);
        std::stable_sort(relationships_.begin(), relationships_.end(), by_name);
    }

    const std::vector<Entity>& entities() const { return entities_; }
    const std::vector<Relationship>& relationships() const { return relationships_; }
    const std::optional<Annotation>& annotation() const { return annotation_; }

    const Entity* find_entity(std::string_view name) const {
        for (const auto& e : entities_)
            if (e.name == name) return &e;
        return nullptr;
    }

    const Relationship* find_relationship(std::string_view name) const {
        for (const auto& r : relationships_)
            if (r.name == name) return &r;
        return nullptr;
    }

    // Attribute named by an attribute FeatureRef, owned by an entity or a relationship.
    const Attribute* find_attribute(const FeatureRef& ref) const {
        if (ref.kind != FeatureRef::Kind::attribute) return nullptr;
        const std::vector<Attribute>* attrs = nullptr;
        if (const auto* e = find_entity(ref.owner)) attrs = &e->attributes;
        else if (const auto* r = find_relationship(ref.owner)) attrs = &r->attributes;
        if (attrs == nullptr) return nullptr;
        for (const auto& a : *attrs)
            if (a.name == ref.name) return &a;
        return nullptr;
    }

    bool resolves(const FeatureRef& ref) const {
        switch (ref.kind) {
            case FeatureRef::Kind::attribute: return find_attribute(ref) != nullptr;
            case FeatureRef::Kind::entity: return find_entity(ref.name) != nullptr;
            case FeatureRef::Kind::relationship: return find_relationship(ref.name) != nullptr;
        }
        return false;
    }

    // Relationships in which the entity occupies at least one position, in name order.
    std::vector<const Relationship*> incident(std::string_view entity) const {
        std::vector<const Relationship*> out;
        for (const auto& r : relationships_)
            if (std::find(r.participants.begin(), r.participants.end(), entity) !=
                r.participants.end())
                out.push_back(&r);
        return out;
    }

    friend bool operator==(const ERDiagram&, const ERDiagram&) = default;

private:
    std::vector<Entity> entities_;
    std::vector<Relationship> relationships_;
    std::optional<Annotation> annotation_;
};

struct Violation {
    std::string invariant;
    std::string element;
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

inline std::string to_string(const Violation& v) {
    return v.invariant + " [" + v.element + "]: " + v.message;
}

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(std::string location, std::string expected)
        : std::runtime_error("syntax error at " + location + ": expected " + expected),
          location_(std::move(location)),
          expected_(std::move(expected)) {}

    const std::string& location() const { return location_; }
    const std::string& expected() const { return expected_; }

private:
    std::string location_;
    std::string expected_;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : std::runtime_error(summarize(violations)), violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const { return violations_; }

private:
    static std::string summarize(const std::vector<Violation>& vs) {
        std::string msg = "invalid diagram";
        for (const auto& v : vs) msg += "\n  " + to_string(v);
        return msg;
    }

    std::vector<Violation> violations_;
};

namespace detail {

inline void check_attributes(const std::vector<Attribute>& attrs, const std::string& owner,
                             std::vector<Violation>& out) {
    std::set<std::string> seen;
    for (const auto& a : attrs) {
        if (!is_identifier(a.name))
            out.push_back({"attribute.name.identifier", owner + "." + a.name,
                           "attribute name must be a nonempty identifier"});
        if (!seen.insert(a.name).second)
            out.push_back({"attribute.name.unique", owner + "." + a.name,
                           "duplicate attribute name within owner"});
    }
}

}  // namespace detail

// Every type invariant that does not hold, in a stable order. Empty iff valid.
inline std::vector<Violation> validate(const ERDiagram& d) {
    std::vector<Violation> out;

    std::set<std::string> entity_keys;
    for (const auto& e : d.entities()) {
        if (!is_identifier(e.name))
            out.push_back({"entity.name.identifier", e.name,
                           "entity name must be a nonempty identifier"});
        if (!entity_keys.insert(lowercase(e.name)).second)
            out.push_back({"entity.name.unique", e.name,
                           "entity name duplicates another entity (case-insensitive)"});
        detail::check_attributes(e.attributes, e.name, out);
    }

    std::set<std::string> relationship_keys;
    for (const auto& r : d.relationships()) {
        if (!is_identifier(r.name))
            out.push_back({"relationship.name.identifier", r.name,
                           "relationship name must be a nonempty identifier"});
        auto key = lowercase(r.name);
        if (!relationship_keys.insert(key).second)
            out.push_back({"relationship.name.unique", r.name,
                           "relationship name duplicates another relationship (case-insensitive)"});
        else if (entity_keys.count(key) != 0)
            out.push_back({"relationship.name.distinct", r.name,
                           "relationship name collides with an entity name (case-insensitive)"});
        if (r.participants.size() < 2)
            out.push_back({"relationship.participants.arity", r.name,
                           "relationship needs at least 2 participants"});
        for (const auto& p : r.participants)
            if (d.find_entity(p) == nullptr)
                out.push_back({"relationship.participant.exists", r.name + ":" + p,
                               "participant names no entity"});
        detail::check_attributes(r.attributes, r.name, out);
    }

    if (const auto& ann = d.annotation()) {
        const auto& t = ann->target;
        if (t.kind == FeatureRef::Kind::entity)
            out.push_back({"annotation.target.kind", to_string(t),
                           "target must be an attribute or a relationship"});
        else if (!d.resolves(t))
            out.push_back({"annotation.target.resolves", to_string(t),
                           "target does not name an existing feature"});
        std::vector<FeatureRef> seen;
        for (const auto& f : ann->important) {
            if (!d.resolves(f))
                out.push_back({"annotation.important.resolves", to_string(f),
                               "important feature does not name an existing feature"});
            if (f == t)
                out.push_back({"annotation.important.not_target", to_string(f),
                               "important feature equals the target"});
            if (std::find(seen.begin(), seen.end(), f) != seen.end())
                out.push_back({"annotation.important.unique", to_string(f),
                               "important feature listed twice"});
            seen.push_back(f);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Intermediate representation (.erd.json)

namespace detail {

using nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& where, const std::string& expected) {
    throw SyntaxError(where.empty() ? "/" : where, expected);
}

inline const json& member(const json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(where, "key \"" + key + "\"");
    return *it;
}

inline std::string string_at(const json& obj, const std::string& key, const std::string& where) {
    const auto& v = member(obj, key, where);
    if (!v.is_string()) schema_error(where + "/" + key, "string");
    return v.get<std::string>();
}

inline const json& array_at(const json& obj, const std::string& key, const std::string& where,
                            bool optional = false) {
    static const json empty = json::array();
    if (optional && !obj.contains(key)) return empty;
    const auto& v = member(obj, key, where);
    if (!v.is_array()) schema_error(where + "/" + key, "array");
    return v;
}

inline std::vector<Attribute> attributes_from(const json& owner, const std::string& where) {
    std::vector<Attribute> out;
    const auto& arr = array_at(owner, "attributes", where, true);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        auto at = where + "/attributes/" + std::to_string(i);
        if (!arr[i].is_object()) schema_error(at, "attribute object");
        Attribute a;
        a.name = string_at(arr[i], "name", at);
        auto kind = string_at(arr[i], "kind", at);
        if (kind == "binary") a.kind = AttributeKind::binary;
        else if (kind == "multivalued") a.kind = AttributeKind::multivalued;
        else schema_error(at + "/kind", "\"binary\" or \"multivalued\"");
        out.push_back(std::move(a));
    }
    return out;
}

inline FeatureRef feature_from(const json& j, const std::string& where) {
    if (!j.is_object()) schema_error(where, "feature reference object");
    if (j.contains("relationship")) return FeatureRef::relationship(string_at(j, "relationship", where));
    if (j.contains("entity")) return FeatureRef::entity(string_at(j, "entity", where));
    if (j.contains("owner"))
        return FeatureRef::attribute(string_at(j, "owner", where), string_at(j, "name", where));
    schema_error(where, "one of {\"owner\",\"name\"}, {\"entity\"}, {\"relationship\"}");
}

inline json feature_to(const FeatureRef& f) {
    switch (f.kind) {
        case FeatureRef::Kind::attribute: return json{{"owner", f.owner}, {"name", f.name}};
        case FeatureRef::Kind::entity: return json{{"entity", f.name}};
        case FeatureRef::Kind::relationship: return json{{"relationship", f.name}};
    }
    return json{};
}

inline json attributes_to(const std::vector<Attribute>& attrs) {
    json arr = json::array();
    for (const auto& a : attrs)
        arr.push_back({{"name", a.name},
                       {"kind", a.kind == AttributeKind::binary ? "binary" : "multivalued"}});
    return arr;
}

}  // namespace detail

inline ERDiagram diagram_from_json(const nlohmann::json& root) {
    using detail::array_at;
    using detail::string_at;
    if (!root.is_object()) detail::schema_error("/", "top-level object");

    std::vector<Entity> entities;
    const auto& ents = array_at(root, "entities", "");
    for (std::size_t i = 0; i < ents.size(); ++i) {
        auto at = "/entities/" + std::to_string(i);
        if (!ents[i].is_object()) detail::schema_error(at, "entity object");
        entities.push_back({string_at(ents[i], "name", at), detail::attributes_from(ents[i], at)});
    }

    std::vector<Relationship> relationships;
    const auto& rels = array_at(root, "relationships", "");
    for (std::size_t i = 0; i < rels.size(); ++i) {
        auto at = "/relationships/" + std::to_string(i);
        if (!rels[i].is_object()) detail::schema_error(at, "relationship object");
        Relationship r;
        r.name = string_at(rels[i], "name", at);
        const auto& parts = array_at(rels[i], "participants", at);
        for (std::size_t k = 0; k < parts.size(); ++k) {
            if (!parts[k].is_string())
                detail::schema_error(at + "/participants/" + std::to_string(k), "entity name string");
            r.participants.push_back(parts[k].get<std::string>());
        }
        r.attributes = detail::attributes_from(rels[i], at);
        relationships.push_back(std::move(r));
    }

    std::optional<Annotation> annotation;
    if (auto it = root.find("annotation"); it != root.end() && !it->is_null()) {
        if (!it->is_object()) detail::schema_error("/annotation", "annotation object or null");
        Annotation a;
        a.target = detail::feature_from(detail::member(*it, "target", "/annotation"),
                                        "/annotation/target");
        const auto& imp = array_at(*it, "important", "/annotation", true);
        for (std::size_t i = 0; i < imp.size(); ++i)
            a.important.push_back(
                detail::feature_from(imp[i], "/annotation/important/" + std::to_string(i)));
        annotation = std::move(a);
    }

    ERDiagram d(std::move(entities), std::move(relationships), std::move(annotation));
    if (auto violations = validate(d); !violations.empty()) throw ValidationError(std::move(violations));
    return d;
}

// Parses IR text. Throws SyntaxError (JSON or schema) or ValidationError.
inline ERDiagram parse_ir(std::string_view text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw SyntaxError("byte " + std::to_string(e.byte), "well-formed JSON (" + std::string(e.what()) + ")");
    }
    return diagram_from_json(root);
}

inline nlohmann::json diagram_to_json(const ERDiagram& d) {
    using nlohmann::json;
    json root;
    json ents = json::array();
    for (const auto& e : d.entities())
        ents.push_back({{"name", e.name}, {"attributes", detail::attributes_to(e.attributes)}});
    json rels = json::array();
    for (const auto& r : d.relationships())
        rels.push_back({{"name", r.name},
                        {"participants", r.participants},
                        {"attributes", detail::attributes_to(r.attributes)}});
    root["entities"] = std::move(ents);
    root["relationships"] = std::move(rels);
    if (const auto& a = d.annotation()) {
        json imp = json::array();
        for (const auto& f : a->important) imp.push_back(detail::feature_to(f));
        root["annotation"] = {{"target", detail::feature_to(a->target)}, {"important", imp}};
    } else {
        root["annotation"] = nullptr;
    }
    return root;
}

// Canonical text: two-space indented JSON, object keys sorted, trailing newline.
inline std::string serialize_ir(const ERDiagram& d) { return diagram_to_json(d).dump(2) + "\n"; }

}  // namespace ermodes
