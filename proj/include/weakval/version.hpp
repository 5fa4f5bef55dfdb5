#pragma once

namespace weakval {
inline constexpr const char* version = "0.1.0";
}
