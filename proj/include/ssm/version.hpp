#pragma once

namespace ssm {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "ssm";

}  // namespace ssm
