#pragma once

namespace vcm {
inline constexpr const char* kVersion = "0.1.0";
}
