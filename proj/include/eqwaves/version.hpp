#pragma once

namespace eqw {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSnapshotFormatVersion = 1;

}  // namespace eqw
