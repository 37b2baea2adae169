#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace support {

inline const nlohmann::json& oracles() {
    static const nlohmann::json data = [] {
        std::ifstream in(std::string(MINERDR_FIXTURE_DIR) + "/oracles.json");
        return nlohmann::json::parse(in);
    }();
    return data;
}

inline std::vector<double> vec(const nlohmann::json& j) { return j.get<std::vector<double>>(); }

inline std::string fixture(const std::string& name) { return std::string(MINERDR_FIXTURE_DIR) + "/" + name; }

}  // namespace support
