#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "ermodes/er_model.hpp"

namespace ermodes::testing {

inline std::string fixture_path(const std::string& name) { return std::string(ERMODES_FIXTURE_DIR) + "/" + name; }
inline std::string golden_path(const std::string& name) { return std::string(ERMODES_GOLDEN_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream text;
    text << in.rdbuf();
    return text.str();
}

inline ERDiagram load_fixture(const std::string& name) { return parse_ir(slurp(fixture_path(name + ".erd.json"))); }

inline const char* const bundled_fixtures[] = {"university", "imdb", "uwcse"};

}  // namespace ermodes::testing
