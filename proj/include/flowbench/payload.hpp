// Copyright 2026 The flowbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowbench {

/// Tree-shaped payload passed between workflow functions. Keys keep
/// document order so serialization is byte-stable.
using Payload = nlohmann::ordered_json;

inline std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> segments;
  std::string current;
  for (char c : path) {
    if (c == '.') {
      segments.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  segments.push_back(current);
  return segments;
}

/// Resolves a dot-separated path (e.g. "data.length") against a payload.
/// Arrays and strings expose a pseudo-field "length"; numeric segments
/// index into arrays. Returns nullopt when any segment is missing.
inline std::optional<Payload> payload_get(const Payload& root,
                                          std::string_view path) {
  const Payload* node = &root;
  for (const std::string& seg : split_path(path)) {
    if (seg.empty()) return std::nullopt;
    if (node->is_object()) {
      auto it = node->find(seg);
      if (it == node->end()) return std::nullopt;
      node = &*it;
      continue;
    }
    if (seg == "length") {
      if (node->is_array() || node->is_string()) {
        return Payload(node->is_array()
                           ? node->size()
                           : node->get_ref<const std::string&>().size());
      }
      return std::nullopt;
    }
    if (node->is_array()) {
      std::size_t idx = 0;
      for (char c : seg) {
        if (c < '0' || c > '9') return std::nullopt;
        idx = idx * 10 + static_cast<std::size_t>(c - '0');
      }
      if (idx >= node->size()) return std::nullopt;
      node = &(*node)[idx];
      continue;
    }
    return std::nullopt;
  }
  return *node;
}

/// Serialized size of a payload in bytes, as it would travel on the wire.
inline std::uint64_t payload_byte_size(const Payload& p) {
  if (p.is_null()) return 0;
  return static_cast<std::uint64_t>(p.dump().size());
}

}  // namespace flowbench
