#include "kcml/format.hpp"

#include <cstdio>

namespace kcml {

std::string format_significant(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
    return buf;
}

std::string format_row(std::span<const double> values, int digits) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += format_significant(values[i], digits);
    }
    return out;
}

} // namespace kcml
