#pragma once

#include <optional>
#include <string>

namespace cpm {

// Shortest decimal string that round-trips to the same double.
std::string format_roundtrip(double x);
// Fixed-point with the given decimals, "-" when absent.
std::string format_fixed(std::optional<double> x, int decimals = 4);

}  // namespace cpm
