#pragma once

#include <string>

namespace fmmc {

/// %.17g: enough digits to round-trip any double.
std::string format_double(double x);

}  // namespace fmmc
