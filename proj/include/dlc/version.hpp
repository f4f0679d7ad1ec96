#pragma once

namespace dlc {

inline constexpr const char* kToolVersion = "dlc 0.1.0";

}  // namespace dlc
