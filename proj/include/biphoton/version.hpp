#pragma once

#include <string_view>

namespace biphoton {

inline constexpr std::string_view kToolName = "biphoton";
inline constexpr std::string_view kToolVersion = "0.1.0";

} // namespace biphoton
