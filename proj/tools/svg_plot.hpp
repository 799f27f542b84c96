#pragma once

#include "geomimu/common.hpp"

#include <string>

namespace geomimu::cli {

/// Two stacked panels (accelerometer, gyroscope) of a T×6 signal.
std::string render_signal_svg(const Signal& samples, double rate, const std::string& title);

}  // namespace geomimu::cli
