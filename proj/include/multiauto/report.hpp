#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "multiauto/fixed_point.hpp"
#include "multiauto/memory_material.hpp"
#include "multiauto/sequence_limits.hpp"
#include "multiauto/volterra.hpp"

namespace multiauto {

// JSON verdict: {function_id, family, depth, seed, tolerances, survivors,
// forward_residual, backward_residual, passed, notes[]}.
nlohmann::json verdict_json(const std::string& function_id, const std::string& family,
                            const BochnerVerdict& v);

// JSON trace: {certificate:{...}, sweeps:[...], residual, quad_err, seed}.
nlohmann::json trace_json(const IterationTrace& t, std::uint64_t seed);

nlohmann::json decompose_json(const DecomposeResult& r);
nlohmann::json compact_json(const CompactReport& r);

// CSV, header `t1,...,tn,value,err_bound`, row-major over the grid.
std::string grid_csv(const SampledGrid& g);

// CSV, header `t,r11,r12,...,rdd`.
std::string resolvent_csv(const ResolventTable& t);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

struct RunManifest {
    std::string config_hash;
    std::string version;
    std::string started, finished; // informational only, never hashed
    std::vector<std::pair<std::string, std::size_t>> files;
    bool verdict = false;

    nlohmann::json to_json() const;
};

std::string fnv1a_hex(const std::string& data);

} // namespace multiauto
