#pragma once

#include <charconv>
#include <string>
#include <vector>

namespace dipfill {

// Shortest round-trip decimal form; keeps CSV output byte-deterministic.
inline std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string csv_line(const std::vector<std::string>& fields) {
    std::string s;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) s += ',';
        s += fields[i];
    }
    s += '\n';
    return s;
}

}  // namespace dipfill
