#pragma once

#include <charconv>
#include <string>

namespace morley {

/// Shortest decimal string that parses back to exactly `value`.
inline std::string format_number(double value)
{
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

}  // namespace morley
