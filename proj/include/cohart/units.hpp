#ifndef COHART_UNITS_HPP
#define COHART_UNITS_HPP

#include <cctype>
#include <cstdlib>
#include <string>

#include "cohart/errors.hpp"

namespace cohart {

// Parses a length like "633 nm", "7.6um", "180 mm" or "0.18 m" into meters.
// Accepted suffixes: nm, um (or µm), mm, m. A bare number is meters.
inline double parse_length(const std::string& text) {
    const char* s = text.c_str();
    char* end = nullptr;
    double value = std::strtod(s, &end);
    if (end == s)
        throw ConfigError("cannot parse length '" + text + "'");
    std::string unit;
    for (const char* p = end; *p; ++p)
        if (!std::isspace(static_cast<unsigned char>(*p))) unit += *p;
    if (unit.empty() || unit == "m") return value;
    if (unit == "nm") return value * 1e-9;
    if (unit == "um" || unit == "µm" || unit == "μm") return value * 1e-6;
    if (unit == "mm") return value * 1e-3;
    throw ConfigError("unknown length unit '" + unit + "' in '" + text + "'");
}

} // namespace cohart

#endif
