#pragma once

#include <string>

#include <fmt/format.h>

namespace gradvar {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double x) { return fmt::format("{:.17g}", x); }

}  // namespace gradvar
