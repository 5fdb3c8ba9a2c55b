#pragma once

namespace lipreg {

inline constexpr const char* kVersion = "0.1.0";

} // namespace lipreg
