// SPDX-License-Identifier: MIT
//
// Serialization layer. Matrices travel as {"rows", "cols", "re", "im"} with
// row-major coefficient arrays; doubles rely on the library's shortest
// round-trip printing, so dump/parse is bit-exact. Reports carry the tool
// version and an FNV-1a hash of the canonical config string and no
// timestamps, which keeps equal configurations byte-identical.

#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "symcore/matcore.hpp"

namespace symcore {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "symcore 1.0.0";

inline json matrix_to_json(const CMatrix& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    json re = json::array(), im = json::array();
    for (const cplx& x : m.data()) {
        re.push_back(x.real());
        im.push_back(x.imag());
    }
    j["re"] = std::move(re);
    j["im"] = std::move(im);
    return j;
}

inline CMatrix matrix_from_json(const json& j) {
    int rows = j.at("rows").get<int>();
    int cols = j.at("cols").get<int>();
    const json& re = j.at("re");
    const json& im = j.at("im");
    if (re.size() != static_cast<size_t>(rows) * cols || im.size() != re.size())
        throw ShapeMismatch("matrix_from_json: coefficient arrays do not match shape");
    CMatrix m(rows, cols);
    for (size_t i = 0; i < re.size(); ++i)
        m.data()[i] = cplx(re[i].get<double>(), im[i].get<double>());
    return m;
}

inline uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hash_hex(uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Skeleton every CLI report starts from: version, subcommand, config echo and
// its hash. Callers append their payload fields in a fixed order.
inline json make_report(const std::string& subcommand, const json& config) {
    json j;
    j["version"] = kToolVersion;
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["config_hash"] = hash_hex(fnv1a(config.dump()));
    return j;
}

// CSV cell for a double: %.17g survives a round trip through strtod.
inline std::string csv_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string csv_escape(const std::string& s) {
    bool needs = s.find_first_of(",\"\n") != std::string::npos;
    if (!needs) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

}  // namespace symcore
