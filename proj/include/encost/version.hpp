// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace encost {

inline constexpr const char* tool_version = "0.1.0";

// Bumped whenever any serialized artifact (descriptor set, model file,
// evaluation report) changes shape.
inline constexpr int schema_version = 1;

}  // namespace encost
