/*
 * Copyright (C) 2025 The geosplat authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace geosplat {

// Shared container format for binary artifacts (gaussian tables, grids,
// material checkpoints, split-sum caches): one line of JSON followed by a
// newline and the raw little-endian payload.

/// Writes header + payload; the header gains "byte_order": "little".
void save_blob(const std::string& path, nlohmann::json header, const void* payload, size_t bytes);

/// Reads header + payload; throws std::runtime_error on malformed files.
nlohmann::json load_blob(const std::string& path, std::vector<unsigned char>& payload);

}  // namespace geosplat
