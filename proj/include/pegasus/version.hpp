#pragma once

namespace pegasus {

inline constexpr const char* kVersion = "0.1.0";

// Bumped when the serialized model container layout changes.
inline constexpr unsigned kModelFormatVersion = 1;

} // namespace pegasus
