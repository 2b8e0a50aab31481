#pragma once

#include "qfkit/suites.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <string>

namespace qfkit {

struct RunReport {
    std::string command;
    std::uint64_t seed = 0;
    long trials = 0;
    std::vector<Violation> violations;
    Real max_violation = 0;
    std::map<std::string, Real> constants;
    long wall_time_ms = 0;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["schema"] = 1;
        j["command"] = command;
        j["seed"] = seed;
        j["trials"] = trials;
        j["violations"] = nlohmann::ordered_json::array();
        for (const auto& v : violations)
            j["violations"].push_back({{"suite", v.suite}, {"instance_digest", v.digest}, {"slack", v.slack}});
        j["max_violation"] = max_violation;
        j["constants"] = nlohmann::ordered_json::object();
        for (const auto& [k, val] : constants) j["constants"][k] = val;
        j["wall_time_ms"] = wall_time_ms;
        return j;
    }
};

inline void write_json(const nlohmann::ordered_json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace qfkit
