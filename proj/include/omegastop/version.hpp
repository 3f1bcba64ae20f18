#pragma once

namespace omegastop {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace omegastop
