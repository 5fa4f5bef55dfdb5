// format.hpp
// Locale-independent real formatting for CSV output.

#pragma once

#include <charconv>
#include <string>

namespace weakval {

/// Shortest-general form with 17 significant digits ('.' separator).
inline std::string format_real(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

} // namespace weakval
