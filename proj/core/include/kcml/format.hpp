#ifndef KCML_FORMAT_HPP
#define KCML_FORMAT_HPP

#include <span>
#include <string>

namespace kcml {

/// "%.{digits}g" rendering; machine files use 17 significant digits,
/// human tables 4.
std::string format_significant(double value, int digits);

/// Space-separated values at the given precision.
std::string format_row(std::span<const double> values, int digits);

} // namespace kcml

#endif
