#pragma once

#include <string_view>

namespace lattice_shadow {

inline constexpr std::string_view tool_name = "lattice-shadow";
inline constexpr std::string_view tool_version = "0.1.0";

}  // namespace lattice_shadow
