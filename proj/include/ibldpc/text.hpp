#pragma once

#include <charconv>
#include <string>

namespace ibldpc {

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_double(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

}  // namespace ibldpc
