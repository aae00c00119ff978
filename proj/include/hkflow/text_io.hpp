#pragma once
#include <charconv>
#include <cmath>
#include <string>
#include <vector>

namespace hkflow {

// Shortest round-trip decimal for a double. All data files (CSV, profiles)
// go through this so outputs are byte-deterministic and parse back bit-exact.
inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string csv_row(const std::vector<std::string>& cells) {
    std::string out;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

} // namespace hkflow
