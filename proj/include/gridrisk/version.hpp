#pragma once

namespace gridrisk {

inline constexpr const char* kEngineVersion = "0.1.0";

// Version tag written into CSV/JSON artifacts so downstream consumers can
// detect schema changes.
inline constexpr const char* kSchemaVersion = "1";

}  // namespace gridrisk
