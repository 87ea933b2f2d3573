#pragma once

#include <string>

namespace bioreactor {

/// Shortest decimal text that reads back to the same double, independent of
/// the global locale ("." separator, "inf", "nan").
std::string format_double(double value);

}  // namespace bioreactor
