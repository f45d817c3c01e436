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

#include "geosplat/blob_io.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>

namespace geosplat {

static_assert(std::endian::native == std::endian::little,
              "blob format is little-endian; big-endian hosts are unsupported");

void save_blob(const std::string& path, nlohmann::json header, const void* payload, size_t bytes) {
    header["byte_order"] = "little";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    std::string h = header.dump();
    out.write(h.data(), std::streamsize(h.size()));
    out.put('\n');
    if (bytes) out.write(static_cast<const char*>(payload), std::streamsize(bytes));
    if (!out) throw std::runtime_error("write failed: " + path);
}

nlohmann::json load_blob(const std::string& path, std::vector<unsigned char>& payload) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string header_line;
    if (!std::getline(in, header_line)) throw std::runtime_error("missing blob header: " + path);
    nlohmann::json header = nlohmann::json::parse(header_line, nullptr, false);
    if (header.is_discarded()) throw std::runtime_error("malformed blob header: " + path);
    payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return header;
}

}  // namespace geosplat
