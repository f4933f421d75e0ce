#pragma once

// HTTP backend for the diagram editor: a versioned on-disk diagram store
// and JSON endpoints for paths, modes and clause-space reports.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "ermodes/clausespace.hpp"
#include "ermodes/er_model.hpp"
#include "ermodes/modegen.hpp"
#include "ermodes/pathfinder.hpp"

namespace ermodes {

inline bool is_diagram_id(const std::string& id) {
    static const std::regex pattern("[A-Za-z0-9_-]{1,64}");
    return std::regex_match(id, pattern);
}

// Diagrams persisted as <id>.erd.json with the version counter in <id>.version.
// Writes to one diagram are serialized; readers see the last committed version.
class DiagramStore {
public:
    struct Snapshot {
        std::string id;
        std::uint64_t version = 0;
        std::shared_ptr<const ERDiagram> diagram;
        nlohmann::json layout;  // UI sidecar, null when absent
    };

    enum class PutStatus { ok, conflict };

    struct PutResult {
        PutStatus status;
        std::uint64_t version;  // committed version, or the current one on conflict
    };

    explicit DiagramStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
        load();
    }

    std::optional<Snapshot> get(const std::string& id) const {
        std::shared_lock lock(mu_);
        auto it = entries_.find(id);
        if (it == entries_.end() || it->second->current.version == 0) return std::nullopt;
        return it->second->current;
    }

    std::vector<std::pair<std::string, std::uint64_t>> list() const {
        std::shared_lock lock(mu_);
        std::vector<std::pair<std::string, std::uint64_t>> out;
        for (const auto& [id, entry] : entries_)
            if (entry->current.version != 0) out.emplace_back(id, entry->current.version);
        return out;
    }

    // Without a base version the write is unconditional (last write wins).
    PutResult put(const std::string& id, ERDiagram d, nlohmann::json layout,
                  std::optional<std::uint64_t> base_version) {
        std::shared_ptr<Entry> entry;
        {
            std::unique_lock lock(mu_);
            auto& slot = entries_[id];
            if (!slot) slot = std::make_shared<Entry>();
            entry = slot;
        }
        std::lock_guard write(entry->write);
        std::uint64_t current = 0;
        {
            std::shared_lock lock(mu_);
            current = entry->current.version;
        }
        if (base_version && *base_version != current) return {PutStatus::conflict, current};

        Snapshot next{id, current + 1, std::make_shared<const ERDiagram>(std::move(d)), std::move(layout)};
        persist(next);
        std::unique_lock lock(mu_);
        entry->current = std::move(next);
        return {PutStatus::ok, entry->current.version};
    }

    static nlohmann::json document(const Snapshot& s) {
        auto doc = diagram_to_json(*s.diagram);
        if (!s.layout.is_null()) doc["layout"] = s.layout;
        return doc;
    }

private:
    struct Entry {
        std::mutex write;
        Snapshot current;
    };

    std::filesystem::path file_for(const std::string& id, const char* ext) const { return dir_ / (id + ext); }

    static void write_atomically(const std::filesystem::path& path, const std::string& text) {
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << text;
            if (!out) throw std::runtime_error("cannot write " + tmp.string());
        }
        std::filesystem::rename(tmp, path);
    }

    void persist(const Snapshot& s) const {
        write_atomically(file_for(s.id, ".erd.json"), document(s).dump(2) + "\n");
        write_atomically(file_for(s.id, ".version"), std::to_string(s.version) + "\n");
    }

    void load() {
        const std::string suffix = ".erd.json";
        for (const auto& f : std::filesystem::directory_iterator(dir_)) {
            auto name = f.path().filename().string();
            if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
                continue;
            auto id = name.substr(0, name.size() - suffix.size());
            if (!is_diagram_id(id)) continue;

            std::ifstream in(f.path(), std::ios::binary);
            std::stringstream text;
            text << in.rdbuf();
            auto doc = nlohmann::json::parse(text.str());
            nlohmann::json layout = doc.contains("layout") ? doc["layout"] : nlohmann::json();

            std::uint64_t version = 1;
            if (std::ifstream vin(file_for(id, ".version")); vin) vin >> version;

            auto entry = std::make_shared<Entry>();
            entry->current = {id, version, std::make_shared<const ERDiagram>(diagram_from_json(doc)), std::move(layout)};
            entries_[id] = std::move(entry);
        }
    }

    std::filesystem::path dir_;
    mutable std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<Entry>> entries_;
};

struct RequestError : std::runtime_error {
    RequestError(int status, std::string message, nlohmann::json detail = nullptr)
        : std::runtime_error(std::move(message)), status(status), detail(std::move(detail)) {}
    int status;
    nlohmann::json detail;
};

// WalkConfig from a request body; absent fields keep their defaults.
inline WalkConfig walk_config_from_json(const nlohmann::json& body) {
    WalkConfig cfg;
    try {
        if (body.contains("strategy")) {
            auto s = parse_strategy(body.at("strategy").get<std::string>());
            if (!s) throw RequestError(400, "unknown strategy");
            cfg.strategy = *s;
        }
        if (body.contains("max_depth")) cfg.max_depth = body.at("max_depth").get<int>();
        if (body.contains("seed")) cfg.seed = body.at("seed").get<std::uint64_t>();
        if (body.contains("num_walks")) cfg.num_walks = body.at("num_walks").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw RequestError(400, std::string("invalid config: ") + e.what());
    }
    try {
        check_config(cfg);
    } catch (const InvalidConfig& e) {
        throw RequestError(400, e.what());
    }
    return cfg;
}

inline nlohmann::json path_to_json(const Path& p) {
    return {{"steps", p.steps}, {"endpoint", to_string(p.endpoint)}, {"text", render(p)}};
}

class Service {
public:
    explicit Service(std::filesystem::path store_dir) : store_(std::move(store_dir)) {}

    DiagramStore& store() { return store_; }

    void mount(httplib::Server& server) {
        using httplib::Request;
        using httplib::Response;
        const std::string id = "/diagrams/([^/]+)";

        server.Get("/health", [this](const Request&, Response& res) {
            handle(res, [&] { return reply(res, 200, {{"status", "ok"}}); });
        });
        server.Get("/diagrams", [this](const Request&, Response& res) {
            handle(res, [&] {
                nlohmann::json list = nlohmann::json::array();
                for (const auto& [name, version] : store_.list()) list.push_back({{"id", name}, {"version", version}});
                return reply(res, 200, {{"diagrams", list}});
            });
        });
        server.Get(id, [this](const Request& req, Response& res) {
            handle(res, [&] {
                auto snap = lookup(req.matches[1]);
                set_version(res, snap.version);
                return reply(res, 200,
                             {{"id", snap.id}, {"version", snap.version}, {"diagram", DiagramStore::document(snap)}});
            });
        });
        server.Put(id, [this](const Request& req, Response& res) {
            handle(res, [&] { put_diagram(req, res); });
        });
        server.Post(id + "/paths", [this](const Request& req, Response& res) {
            handle(res, [&] { post_paths(req, res); });
        });
        server.Post(id + "/modes", [this](const Request& req, Response& res) {
            handle(res, [&] { post_modes(req, res); });
        });
        server.Post(id + "/clausespace", [this](const Request& req, Response& res) {
            handle(res, [&] { post_clausespace(req, res); });
        });
    }

private:
    template <typename F>
    static void handle(httplib::Response& res, F&& body) {
        try {
            body();
        } catch (const RequestError& e) {
            nlohmann::json err{{"error", e.what()}};
            if (!e.detail.is_null()) err["detail"] = e.detail;
            if (res.get_header_value("X-Diagram-Version").empty()) err["version"] = nullptr;
            reply(res, e.status, err);
        } catch (const std::exception& e) {
            reply(res, 500, {{"error", e.what()}});
        }
    }

    static void reply(httplib::Response& res, int status, nlohmann::json body) {
        if (auto v = res.get_header_value("X-Diagram-Version"); !v.empty() && !body.contains("version"))
            body["version"] = std::stoull(v);
        res.status = status;
        res.set_content(body.dump(2) + "\n", "application/json");
    }

    static void set_version(httplib::Response& res, std::uint64_t version) {
        res.set_header("X-Diagram-Version", std::to_string(version));
    }

    static nlohmann::json body_json(const httplib::Request& req) {
        if (req.body.empty()) return nlohmann::json::object();
        try {
            auto j = nlohmann::json::parse(req.body);
            if (!j.is_object()) throw RequestError(400, "request body must be a JSON object");
            return j;
        } catch (const nlohmann::json::parse_error& e) {
            throw RequestError(400, std::string("malformed JSON: ") + e.what());
        }
    }

    DiagramStore::Snapshot lookup(const std::string& id) const {
        if (!is_diagram_id(id)) throw RequestError(400, "invalid diagram id");
        auto snap = store_.get(id);
        if (!snap) throw RequestError(404, "unknown diagram " + id);
        return *snap;
    }

    static std::optional<std::uint64_t> base_version(const httplib::Request& req) {
        std::string raw = req.get_header_value("If-Match");
        if (raw.empty()) raw = req.get_param_value("base_version");
        if (raw.empty()) return std::nullopt;
        if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') raw = raw.substr(1, raw.size() - 2);
        try {
            std::size_t used = 0;
            auto v = std::stoull(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw RequestError(400, "base version must be an unsigned integer");
        }
    }

    void put_diagram(const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        if (!is_diagram_id(id)) throw RequestError(400, "invalid diagram id");
        auto base = base_version(req);
        auto doc = body_json(req);
        nlohmann::json layout = doc.contains("layout") ? doc["layout"] : nlohmann::json();
        std::optional<ERDiagram> d;
        try {
            d = diagram_from_json(doc);
        } catch (const SyntaxError& e) {
            throw RequestError(400, e.what(), {{"location", e.location()}, {"expected", e.expected()}});
        } catch (const ValidationError& e) {
            nlohmann::json vs = nlohmann::json::array();
            for (const auto& v : e.violations())
                vs.push_back({{"invariant", v.invariant}, {"element", v.element}, {"message", v.message}});
            throw RequestError(400, "invalid diagram", {{"violations", vs}});
        }
        auto result = store_.put(id, std::move(*d), std::move(layout), base);
        set_version(res, result.version);
        if (result.status == DiagramStore::PutStatus::conflict)
            throw RequestError(409, "stale version: diagram is at version " + std::to_string(result.version));
        reply(res, 200, {{"id", id}, {"version", result.version}});
    }

    static const Annotation& annotation_of(const ERDiagram& d) {
        if (!d.annotation()) throw RequestError(400, "diagram has no annotation");
        return *d.annotation();
    }

    void post_paths(const httplib::Request& req, httplib::Response& res) {
        auto snap = lookup(req.matches[1]);
        set_version(res, snap.version);
        auto cfg = walk_config_from_json(body_json(req));
        const auto& d = *snap.diagram;
        const auto& ann = annotation_of(d);

        nlohmann::json results = nlohmann::json::array();
        auto paths_json = [](const std::vector<Path>& ps) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& p : ps) arr.push_back(path_to_json(p));
            return arr;
        };
        if (cfg.strategy == Strategy::random) {
            results.push_back({{"feature", nullptr}, {"paths", paths_json(random_paths(d, ann.target, cfg))},
                               {"diagnostic", nullptr}});
        } else {
            for (const auto& f : ann.important) {
                auto found = find_paths(d, ann.target, f, cfg);
                results.push_back({{"feature", to_string(f)},
                                   {"paths", paths_json(found.paths)},
                                   {"diagnostic", found.diagnostic ? nlohmann::json(*found.diagnostic) : nullptr}});
            }
        }
        reply(res, 200, {{"target", to_string(ann.target)}, {"results", results}});
    }

    void post_modes(const httplib::Request& req, httplib::Response& res) {
        auto snap = lookup(req.matches[1]);
        set_version(res, snap.version);
        auto body = body_json(req);
        auto cfg = walk_config_from_json(body);
        auto dialect = Dialect::generic;
        if (body.contains("dialect")) {
            auto parsed = body["dialect"].is_string() ? parse_dialect(body["dialect"].get<std::string>()) : std::nullopt;
            if (!parsed) throw RequestError(400, "unknown dialect");
            dialect = *parsed;
        }
        ModeSet modes;
        try {
            modes = gmc(*snap.diagram, cfg);
        } catch (const MissingAnnotation& e) {
            throw RequestError(400, e.what());
        }
        reply(res, 200, {{"modes", emit_modes(modes, dialect)}, {"warnings", modes.warnings}});
    }

    void post_clausespace(const httplib::Request& req, httplib::Response& res) {
        auto snap = lookup(req.matches[1]);
        set_version(res, snap.version);
        auto body = body_json(req);
        auto cfg = walk_config_from_json(body);
        int max_len = 3;
        std::uint64_t cap = default_clause_cap;
        std::string baseline = "gmc";
        try {
            if (body.contains("max_len")) max_len = body["max_len"].get<int>();
            if (body.contains("cap")) cap = body["cap"].get<std::uint64_t>();
            if (body.contains("modes")) baseline = body["modes"].get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw RequestError(400, std::string("invalid request: ") + e.what());
        }
        if (max_len < 0 || cap < 1) throw RequestError(400, "max_len must be >= 0 and cap >= 1");
        if (baseline != "gmc" && baseline != "exhaustive") throw RequestError(400, "modes must be gmc or exhaustive");
        ModeSet modes;
        try {
            modes = baseline == "gmc" ? gmc(*snap.diagram, cfg) : exhaustive_modes(*snap.diagram);
        } catch (const MissingAnnotation& e) {
            throw RequestError(400, e.what());
        }
        reply(res, 200, {{"report", report_to_json(enumerate_clauses(modes, max_len, cap))}});
    }

    DiagramStore store_;
};

}  // namespace ermodes
