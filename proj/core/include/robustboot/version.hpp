#pragma once

namespace robustboot {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace robustboot
