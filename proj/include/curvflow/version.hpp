#pragma once

namespace curvflow {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace curvflow
