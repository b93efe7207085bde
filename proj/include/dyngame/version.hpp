#pragma once

namespace dyngame {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dyngame
