#pragma once

#include <string>

namespace blockcells {

/// Shortest decimal form that parses back to the same real64 bit pattern.
std::string format_double(double v);

/// Inverse of format_double; throws std::invalid_argument on trailing junk.
double parse_double(const std::string& text);

}  // namespace blockcells
