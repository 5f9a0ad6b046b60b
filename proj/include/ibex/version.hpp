#pragma once

namespace ibex {

inline constexpr const char* version = "0.1.0";

}  // namespace ibex
