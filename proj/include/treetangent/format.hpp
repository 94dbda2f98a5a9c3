#pragma once

#include <cstdio>
#include <string>

namespace treetangent {

// Locale-independent, round-trip-exact double formatting for CSV output.
// %.17g guarantees the printed text parses back to the identical bits, which
// is what makes "rerun reproduces the CSV byte-identically" checkable.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace treetangent
