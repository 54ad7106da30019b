#pragma once

namespace oamturb {
inline constexpr const char* version = "1.0.0";
}
