#pragma once

#include <string_view>

namespace rlg {

inline constexpr std::string_view kToolName = "rlg-lab";
inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace rlg
