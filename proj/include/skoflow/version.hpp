#pragma once

namespace skoflow {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace skoflow
