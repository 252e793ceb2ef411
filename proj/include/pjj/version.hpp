#pragma once

namespace pjj {

inline constexpr const char* version = "0.1.0";

} // namespace pjj
