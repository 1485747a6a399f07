#pragma once

namespace tailrisk {

inline constexpr const char* kToolName = "shadow";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace tailrisk
