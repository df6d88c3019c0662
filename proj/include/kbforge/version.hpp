#pragma once

#include <string_view>

namespace kbforge {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace kbforge
