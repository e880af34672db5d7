#pragma once

namespace flyq {
inline constexpr const char* kVersion = "0.1.0";
}
