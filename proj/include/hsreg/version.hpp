#pragma once

namespace hsreg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hsreg
