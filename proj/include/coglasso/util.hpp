#ifndef COGLASSO_UTIL_HPP
#define COGLASSO_UTIL_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace coglasso {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Linear-interpolation quantile (R type 7) of an unsorted sample; q in [0, 1].
double quantile(std::vector<double> values, double q);

// FNV-1a 64-bit, used for config hashes embedded in provenance records.
std::uint64_t fnv1a64(const std::string& text);

std::string to_hex(std::uint64_t value);

}  // namespace coglasso

#endif
