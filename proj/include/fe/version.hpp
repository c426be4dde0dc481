#pragma once

namespace fe {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fe
