#include "multiauto/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace multiauto {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

nlohmann::json verdict_json(const std::string& function_id, const std::string& family,
                            const BochnerVerdict& v) {
    nlohmann::json j;
    j["function_id"] = function_id;
    j["family"] = family;
    j["depth"] = v.depth;
    j["seed"] = v.seed;
    j["tolerances"] = {{"tol_limit", v.tol_limit}, {"tol_subseq", v.tol_subseq}};
    j["survivors"] = v.subsequence_indices;
    j["forward_residual"] = v.forward_residual;
    j["backward_residual"] = v.backward_residual;
    j["passed"] = v.passed;
    j["notes"] = v.notes;
    return j;
}

nlohmann::json trace_json(const IterationTrace& t, std::uint64_t seed) {
    nlohmann::json j;
    j["certificate"] = {{"L_outer", t.certificate.lip_outer},
                        {"L_inner", t.certificate.lip_inner},
                        {"kernel_mass", t.certificate.kernel_mass},
                        {"theta", t.certificate.theta}};
    j["sweeps"] = t.sup_diffs;
    j["residual"] = t.residual;
    j["quad_err"] = t.quad_err;
    j["seed"] = seed;
    j["k_final"] = t.k_final;
    j["notes"] = t.notes;
    if (t.has_asymptotic) j["asymptotic"] = decompose_json(t.asymptotic);
    return j;
}

nlohmann::json decompose_json(const DecomposeResult& r) {
    nlohmann::json j;
    j["residual"] = r.residual;
    j["decay_pass"] = r.decay_pass;
    j["decay"] = r.decay;
    j["survivors"] = r.survivors;
    j["notes"] = r.notes;
    return j;
}

nlohmann::json compact_json(const CompactReport& r) {
    nlohmann::json j;
    j["pointwise_pass"] = r.pointwise.passed;
    j["uniform_continuity_pass"] = r.uc.passed;
    j["compact_pass"] = r.compact_pass;
    j["agreement"] = r.agreement;
    j["uc_sup_diffs"] = r.uc.sup_diffs;
    j["notes"] = r.notes;
    return j;
}

std::string grid_csv(const SampledGrid& g) {
    std::ostringstream os;
    for (int i = 0; i < g.window.dim; ++i) os << 't' << (i + 1) << ',';
    os << "value,err_bound\n";
    for (std::size_t idx = 0; idx < g.values.size(); ++idx) {
        std::vector<double> p = g.window.point(idx);
        for (double c : p) os << fmt_double(c) << ',';
        os << fmt_double(g.values[idx]) << ',' << fmt_double(g.err_bound) << '\n';
    }
    return os.str();
}

std::string resolvent_csv(const ResolventTable& t) {
    std::ostringstream os;
    os << 't';
    const int d = t.R_values.empty() ? 0 : static_cast<int>(t.R_values.front().rows());
    for (int i = 1; i <= d; ++i)
        for (int j = 1; j <= d; ++j) os << ",r" << i << j;
    os << '\n';
    for (std::size_t k = 0; k < t.times.size(); ++k) {
        os << fmt_double(t.times[k]);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) os << ',' << fmt_double(t.R_values[k](i, j));
        os << '\n';
    }
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["version"] = version;
    j["started"] = started;
    j["finished"] = finished;
    j["verdict"] = verdict;
    j["files"] = nlohmann::json::array();
    for (const auto& [name, bytes] : files) j["files"].push_back({{"name", name}, {"bytes", bytes}});
    return j;
}

} // namespace multiauto
