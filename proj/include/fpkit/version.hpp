#pragma once

namespace fpkit {
inline constexpr const char* version = "0.1.0";
}
