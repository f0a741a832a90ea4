#pragma once

namespace mixmin {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mixmin
