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

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowbench/payload.hpp"

namespace flowbench {

class MissingObject : public std::runtime_error {
 public:
  explicit MissingObject(const std::string& key)
      : std::runtime_error("object store has no key '" + key + "'") {}
};

class MissingItem : public std::runtime_error {
 public:
  explicit MissingItem(const std::string& what)
      : std::runtime_error("key-value store has no item " + what) {}
};

/// NoSQL key-value interface: tables of items addressed by a partition key
/// and an optional sort key. Operations are create, modify, retrieve, and
/// delete; every operation is logged for cost accounting.
class KeyValueStore {
 public:
  using Key = std::pair<std::string, std::string>;  // partition, sort ("" = none)

  struct Op {
    std::string op;  // create | modify | retrieve | delete
    std::string table;
    std::string partition;
    std::string sort;
    std::uint64_t bytes = 0;
  };

  void create(const std::string& table, const std::string& partition,
              const std::string& sort, Payload item) {
    const std::uint64_t bytes = payload_byte_size(item);
    tables_[table][{partition, sort}] = std::move(item);
    log_.push_back({"create", table, partition, sort, bytes});
  }

  void modify(const std::string& table, const std::string& partition,
              const std::string& sort, Payload item) {
    auto& t = tables_[table];
    auto it = t.find({partition, sort});
    if (it == t.end())
      throw MissingItem("'" + partition + "/" + sort + "' in " + table);
    const std::uint64_t bytes = payload_byte_size(item);
    it->second = std::move(item);
    log_.push_back({"modify", table, partition, sort, bytes});
  }

  std::optional<Payload> retrieve(const std::string& table,
                                  const std::string& partition,
                                  const std::string& sort = "") {
    log_.push_back({"retrieve", table, partition, sort, 0});
    auto t = tables_.find(table);
    if (t == tables_.end()) return std::nullopt;
    auto it = t->second.find({partition, sort});
    if (it == t->second.end()) return std::nullopt;
    return it->second;
  }

  void erase(const std::string& table, const std::string& partition,
             const std::string& sort = "") {
    auto t = tables_.find(table);
    if (t != tables_.end()) t->second.erase({partition, sort});
    log_.push_back({"delete", table, partition, sort, 0});
  }

  /// Items matching a partition key across all sort keys.
  std::vector<Payload> query(const std::string& table,
                             const std::string& partition) const {
    std::vector<Payload> out;
    auto t = tables_.find(table);
    if (t == tables_.end()) return out;
    for (const auto& [key, item] : t->second)
      if (key.first == partition) out.push_back(item);
    return out;
  }

  std::size_t item_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : tables_) n += t.size();
    return n;
  }

  const std::vector<Op>& log() const { return log_; }

 private:
  std::map<std::string, std::map<Key, Payload>> tables_;
  std::vector<Op> log_;
};

/// Object storage abstracted to key -> byte size. Contents are not
/// materialized; kernels that need bytes model them as sizes.
class ObjectStore {
 public:
  struct Op {
    std::string op;  // read | write
    std::string key;
    std::uint64_t bytes = 0;
  };

  void put(const std::string& key, std::uint64_t bytes) {
    objects_[key] = bytes;
    log_.push_back({"write", key, bytes});
  }

  std::uint64_t read(const std::string& key) {
    auto it = objects_.find(key);
    if (it == objects_.end()) throw MissingObject(key);
    log_.push_back({"read", key, it->second});
    return it->second;
  }

  bool contains(const std::string& key) const { return objects_.count(key); }
  std::size_t object_count() const { return objects_.size(); }
  const std::vector<Op>& log() const { return log_; }

 private:
  std::map<std::string, std::uint64_t> objects_;
  std::vector<Op> log_;
};

}  // namespace flowbench
