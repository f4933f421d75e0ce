#pragma once

// Command-line front end. Exit codes: 0 success, 1 invalid input
// (diagram, mode file, annotation), 2 usage error.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ermodes/clausespace.hpp"
#include "ermodes/er_model.hpp"
#include "ermodes/modegen.hpp"
#include "ermodes/pathfinder.hpp"
#include "ermodes/service.hpp"

namespace ermodes::cli {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::stringstream text;
    text << in.rdbuf();
    return text.str();
}

struct Options {
    std::string diagram;
    std::string modes_file;
    std::string strategy = "shortest";
    int max_depth = 4;
    std::uint64_t seed = 0;
    int num_walks = 10;
    std::string dialect = "generic";
    std::string output;
    int max_len = 3;
    std::uint64_t cap = default_clause_cap;
    bool exhaustive = false;
    std::string format = "json";
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string store = "store";
};

inline WalkConfig walk_config(const Options& o) {
    WalkConfig cfg;
    cfg.strategy = *parse_strategy(o.strategy);
    cfg.max_depth = o.max_depth;
    cfg.seed = o.seed;
    cfg.num_walks = o.num_walks;
    return cfg;
}

inline void write_output(const Options& o, const std::string& text, std::ostream& out) {
    if (o.output.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.output, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw InputError("cannot write " + o.output);
}

inline const Annotation& require_annotation(const ERDiagram& d) {
    if (!d.annotation()) throw MissingAnnotation("diagram has no annotation");
    return *d.annotation();
}

inline int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
    try {
        parse_ir(read_file(o.diagram));
    } catch (const ValidationError& e) {
        for (const auto& v : e.violations()) out << to_string(v) << "\n";
        err << o.diagram << ": " << e.violations().size() << " violation(s)\n";
        return 1;
    }
    out << "ok\n";
    return 0;
}

inline void print_paths(std::ostream& out, const std::vector<Path>& paths) {
    for (const auto& p : paths) out << render(p) << "\n";
}

inline int cmd_paths(const Options& o, std::ostream& out, std::ostream& err) {
    auto d = parse_ir(read_file(o.diagram));
    const auto& ann = require_annotation(d);
    auto cfg = walk_config(o);
    std::ostringstream text;
    if (cfg.strategy == Strategy::random) {
        print_paths(text, random_paths(d, ann.target, cfg));
    } else {
        for (const auto& f : ann.important) {
            auto found = find_paths(d, ann.target, f, cfg);
            text << "# " << to_string(ann.target) << " -> " << to_string(f) << "\n";
            print_paths(text, found.paths);
            if (found.diagnostic) err << "warning: " << *found.diagnostic << "\n";
        }
    }
    write_output(o, text.str(), out);
    return 0;
}

inline int cmd_random(Options o, std::ostream& out, std::ostream& err) {
    o.strategy = "random";
    return cmd_paths(o, out, err);
}

inline int cmd_gmc(const Options& o, std::ostream& out, std::ostream& err) {
    auto d = parse_ir(read_file(o.diagram));
    auto modes = gmc(d, walk_config(o));
    for (const auto& w : modes.warnings) err << "warning: " << w << "\n";
    write_output(o, emit_modes(modes, *parse_dialect(o.dialect)), out);
    return 0;
}

inline int cmd_emit(const Options& o, std::ostream& out, std::ostream&) {
    auto modes = parse_modes(read_file(o.modes_file));
    write_output(o, emit_modes(modes, *parse_dialect(o.dialect)), out);
    return 0;
}

inline int cmd_enumerate(const Options& o, std::ostream& out, std::ostream&) {
    ModeSet modes;
    if (!o.modes_file.empty()) {
        modes = parse_modes(read_file(o.modes_file));
    } else {
        auto d = parse_ir(read_file(o.diagram));
        modes = o.exhaustive ? exhaustive_modes(d) : gmc(d, walk_config(o));
    }
    auto report = enumerate_clauses(modes, o.max_len, o.cap);
    write_output(o, o.format == "table" ? render_table(report) : serialize_report(report), out);
    return 0;
}

inline int cmd_serve(const Options& o, std::ostream& out, std::ostream& err) {
    Service service(o.store);
    httplib::Server server;
    service.mount(server);
    out << "serving on http://" << o.host << ":" << o.port << " (store: " << o.store << ")\n" << std::flush;
    if (!server.listen(o.host, o.port)) {
        err << "cannot listen on " << o.host << ":" << o.port << "\n";
        return 1;
    }
    return 0;
}

// `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Compile annotated ER diagrams into ILP mode declarations", "ermodes"};
    app.require_subcommand(1);
    Options o;

    const std::vector<std::string> strategies{"shortest", "shortest-all", "all", "random"};
    const std::vector<std::string> dialects{"generic", "aleph", "boostsrl"};

    auto walk_flags = [&](CLI::App* sub, bool with_strategy) {
        sub->add_option("--diagram", o.diagram, "IR file (.erd.json)")->check(CLI::ExistingFile);
        if (with_strategy)
            sub->add_option("--strategy", o.strategy, "path strategy")->check(CLI::IsMember(strategies));
        sub->add_option("--max-depth", o.max_depth, "max relationships per path")->check(CLI::PositiveNumber);
        sub->add_option("--seed", o.seed, "random-walk seed");
        sub->add_option("--num-walks", o.num_walks, "number of random walks")->check(CLI::PositiveNumber);
        sub->add_option("--output", o.output, "write to FILE instead of stdout");
    };

    auto* validate = app.add_subcommand("validate", "check a diagram against the model invariants");
    validate->add_option("file", o.diagram, "IR file")->check(CLI::ExistingFile);
    validate->add_option("--diagram", o.diagram, "IR file")->check(CLI::ExistingFile);

    auto* paths = app.add_subcommand("paths", "list paths from the target to each important feature");
    walk_flags(paths, true);
    paths->get_option("--diagram")->required();

    auto* gmc_cmd = app.add_subcommand("gmc", "generate a mode file from an annotated diagram");
    walk_flags(gmc_cmd, true);
    gmc_cmd->get_option("--diagram")->required();
    gmc_cmd->add_option("--dialect", o.dialect, "output dialect")->check(CLI::IsMember(dialects));

    auto* random = app.add_subcommand("random", "random walks from the target");
    walk_flags(random, false);
    random->get_option("--diagram")->required();

    auto* enumerate = app.add_subcommand("enumerate", "count legal clause bodies under a mode set");
    walk_flags(enumerate, true);
    enumerate->add_option("--modes", o.modes_file, "generic mode file")->check(CLI::ExistingFile);
    enumerate->add_flag("--exhaustive", o.exhaustive, "use the exhaustive baseline modes for --diagram");
    enumerate->add_option("--max-len", o.max_len, "maximum body length")->check(CLI::NonNegativeNumber);
    enumerate->add_option("--cap", o.cap, "stop after this many bodies")->check(CLI::PositiveNumber);
    enumerate->add_option("--format", o.format, "json or table")->check(CLI::IsMember({"json", "table"}));

    auto* emit = app.add_subcommand("emit", "re-emit a generic mode file in another dialect");
    emit->add_option("--modes", o.modes_file, "generic mode file")->required()->check(CLI::ExistingFile);
    emit->add_option("--dialect", o.dialect, "output dialect")->check(CLI::IsMember(dialects));
    emit->add_option("--output", o.output, "write to FILE instead of stdout");

    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    serve->add_option("--port", o.port, "listen port")->check(CLI::Range(1, 65535));
    serve->add_option("--host", o.host, "bind address");
    serve->add_option("--store", o.store, "diagram store directory");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (validate->parsed() && o.diagram.empty()) throw CLI::RequiredError("file");
        if (enumerate->parsed() && o.modes_file.empty() == o.diagram.empty())
            throw CLI::ValidationError("enumerate", "give exactly one of --modes or --diagram");
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(o, out, err);
        if (paths->parsed()) return cmd_paths(o, out, err);
        if (gmc_cmd->parsed()) return cmd_gmc(o, out, err);
        if (random->parsed()) return cmd_random(o, out, err);
        if (enumerate->parsed()) return cmd_enumerate(o, out, err);
        if (emit->parsed()) return cmd_emit(o, out, err);
        if (serve->parsed()) return cmd_serve(o, out, err);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const InvalidConfig& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace ermodes::cli
