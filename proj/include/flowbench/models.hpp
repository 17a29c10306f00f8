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
#include <stdexcept>
#include <string>

#include "flowbench/encoding.hpp"
#include "flowbench/payload.hpp"
#include "flowbench/rng.hpp"
#include "flowbench/transcribe.hpp"

namespace flowbench {

class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& m) : std::runtime_error(m) {}
};

/// Deterministic or seeded duration, in integer microseconds.
struct DurationDist {
  enum class Kind { Constant, Uniform };
  Kind kind = Kind::Constant;
  long long a_us = 0;  // constant value, or lower bound
  long long b_us = 0;  // upper bound (uniform)

  long long draw(Rng& rng) const {
    if (kind == Kind::Constant) return a_us;
    return rng.next_int(a_us, b_us);
  }

  static DurationDist constant(long long us) { return {Kind::Constant, us, us}; }
  static DurationDist uniform(long long lo, long long hi) {
    return {Kind::Uniform, lo, hi};
  }
};

/// Simulator parameter set for one platform flavor. Values of the shipped
/// defaults are illustrative calibrations, not measured ground truth.
struct PlatformModel {
  std::string name;
  CloudPlatform shape = CloudPlatform::Aws;
  long long container_cap = 0;  // 0 = unlimited
  DurationDist cold_start = DurationDist::constant(300000);
  long long warm_start_us = 5000;
  long long per_transition_us = 25000;
  long long storage_latency_us = 20000;        // latency floor per operation
  long long storage_bandwidth_bps = 100000000;  // bytes per second
  long long payload_channel_threshold = 262144;
  std::map<long long, double> suspension_share;  // memory MB -> S_M
  long long max_parallelism = 0;  // 0 = unlimited
  // Azure orchestrator replays grow with history length.
  long long replay_per_event_us = 0;
  Payload pricing;  // optional overrides consumed by the cost module

  long long storage_latency(std::uint64_t bytes) const {
    long long transfer = 0;
    if (storage_bandwidth_bps > 0)
      transfer = static_cast<long long>(
          (static_cast<__int128>(bytes) * 1000000) / storage_bandwidth_bps);
    return storage_latency_us + transfer;
  }

  double suspension(long long memory_mb) const {
    if (suspension_share.empty()) return 0.0;
    auto it = suspension_share.find(memory_mb);
    if (it != suspension_share.end()) return it->second;
    // nearest configured memory size at or below, else the smallest
    auto ub = suspension_share.upper_bound(memory_mb);
    if (ub == suspension_share.begin()) return ub->second;
    return std::prev(ub)->second;
  }
};

inline PlatformModel aws_like_model() {
  PlatformModel m;
  m.name = "aws-like";
  m.shape = CloudPlatform::Aws;
  m.container_cap = 0;  // scales out freely
  m.cold_start = DurationDist::constant(300000);
  m.warm_start_us = 3000;
  m.per_transition_us = 25000;
  m.storage_latency_us = 20000;
  m.storage_bandwidth_bps = 100000000;
  m.payload_channel_threshold = 262144;
  m.suspension_share = {{128, 0.55}, {256, 0.45}, {512, 0.35},
                        {1024, 0.25}, {2048, 0.12}};
  m.max_parallelism = 40;
  return m;
}

inline PlatformModel gcp_like_model() {
  PlatformModel m;
  m.name = "gcp-like";
  m.shape = CloudPlatform::Google;
  m.container_cap = 30;  // reuses containers instead of scaling past the burst
  m.cold_start = DurationDist::constant(400000);
  m.warm_start_us = 4000;
  m.per_transition_us = 20000;
  m.storage_latency_us = 30000;
  m.storage_bandwidth_bps = 80000000;
  m.payload_channel_threshold = 524288;
  m.suspension_share = {{128, 0.45}, {256, 0.35}, {512, 0.25},
                        {1024, 0.15}, {2048, 0.08}};
  m.max_parallelism = 20;
  return m;
}

inline PlatformModel azure_like_model() {
  PlatformModel m;
  m.name = "azure-like";
  m.shape = CloudPlatform::Azure;
  m.container_cap = 10;  // small constant pool, heavy reuse
  m.cold_start = DurationDist::constant(200000);
  m.warm_start_us = 2000;
  m.per_transition_us = 1500000;  // dynamic orchestration dominates
  m.storage_latency_us = 400000;
  m.storage_bandwidth_bps = 10000000;
  m.payload_channel_threshold = 16384;
  m.suspension_share = {{128, 0.08}, {256, 0.06}, {512, 0.05},
                        {1024, 0.04}, {2048, 0.03}};
  m.max_parallelism = 0;
  m.replay_per_event_us = 20000;
  return m;
}

inline Payload model_to_payload(const PlatformModel& m) {
  Payload doc = Payload::object();
  doc["name"] = m.name;
  doc["shape"] = platform_name(m.shape);
  if (m.container_cap == 0) doc["container_cap"] = "unlimited";
  else doc["container_cap"] = m.container_cap;
  Payload cold = Payload::object();
  cold["kind"] =
      m.cold_start.kind == DurationDist::Kind::Constant ? "constant"
                                                        : "uniform";
  cold["us"] = m.cold_start.a_us;
  if (m.cold_start.kind == DurationDist::Kind::Uniform) {
    cold["lo_us"] = m.cold_start.a_us;
    cold["hi_us"] = m.cold_start.b_us;
  }
  doc["cold_start"] = std::move(cold);
  doc["warm_start_us"] = m.warm_start_us;
  doc["per_transition_us"] = m.per_transition_us;
  doc["storage_latency_us"] = m.storage_latency_us;
  doc["storage_bandwidth_bps"] = m.storage_bandwidth_bps;
  doc["payload_channel_threshold"] = m.payload_channel_threshold;
  Payload shares = Payload::object();
  for (const auto& [mb, s] : m.suspension_share)
    shares[std::to_string(mb)] = s;
  doc["suspension_share"] = std::move(shares);
  if (m.max_parallelism == 0) doc["max_parallelism"] = "unlimited";
  else doc["max_parallelism"] = m.max_parallelism;
  doc["replay_per_event_us"] = m.replay_per_event_us;
  if (!m.pricing.is_null()) doc["pricing"] = m.pricing;
  return doc;
}

inline PlatformModel model_from_payload(const Payload& doc) {
  PlatformModel m;
  auto get = [&](const char* key) -> const Payload& {
    if (!doc.contains(key))
      throw ModelError(std::string("model: missing field '") + key + "'");
    return doc[key];
  };
  m.name = get("name").get<std::string>();
  const std::string shape = get("shape").get<std::string>();
  if (shape == "aws") m.shape = CloudPlatform::Aws;
  else if (shape == "google") m.shape = CloudPlatform::Google;
  else if (shape == "azure") m.shape = CloudPlatform::Azure;
  else throw ModelError("model: unknown shape '" + shape + "'");

  const Payload& cap = get("container_cap");
  if (cap.is_string() && cap == "unlimited") m.container_cap = 0;
  else {
    m.container_cap = cap.get<long long>();
    if (m.container_cap < 1)
      throw ModelError("model: container_cap must be >= 1 or \"unlimited\"");
  }
  const Payload& cold = get("cold_start");
  const std::string kind = cold["kind"].get<std::string>();
  if (kind == "constant")
    m.cold_start = DurationDist::constant(cold["us"].get<long long>());
  else if (kind == "uniform")
    m.cold_start = DurationDist::uniform(cold["lo_us"].get<long long>(),
                                         cold["hi_us"].get<long long>());
  else
    throw ModelError("model: unknown cold_start kind '" + kind + "'");

  m.warm_start_us = get("warm_start_us").get<long long>();
  m.per_transition_us = get("per_transition_us").get<long long>();
  m.storage_latency_us = get("storage_latency_us").get<long long>();
  m.storage_bandwidth_bps = get("storage_bandwidth_bps").get<long long>();
  m.payload_channel_threshold =
      get("payload_channel_threshold").get<long long>();
  if (m.warm_start_us < 0 || m.per_transition_us < 0 ||
      m.storage_latency_us < 0 || m.cold_start.a_us < 0)
    throw ModelError("model: durations must be >= 0");
  for (auto it = get("suspension_share").begin();
       it != doc["suspension_share"].end(); ++it) {
    const double s = it.value().get<double>();
    if (s < 0.0 || s >= 1.0)
      throw ModelError("model: suspension_share must lie in [0,1)");
    m.suspension_share[std::stoll(it.key())] = s;
  }
  const Payload& mp = get("max_parallelism");
  if (mp.is_string() && mp == "unlimited") m.max_parallelism = 0;
  else m.max_parallelism = mp.get<long long>();
  if (doc.contains("replay_per_event_us"))
    m.replay_per_event_us = doc["replay_per_event_us"].get<long long>();
  if (doc.contains("pricing")) m.pricing = doc["pricing"];
  return m;
}

inline PlatformModel load_model_text(const std::string& text) {
  return model_from_payload(parse_structured_text(text));
}

/// Builtin model by name, or empty optional when unknown.
inline std::optional<PlatformModel> builtin_model(const std::string& name) {
  if (name == "aws-like") return aws_like_model();
  if (name == "gcp-like") return gcp_like_model();
  if (name == "azure-like") return azure_like_model();
  return std::nullopt;
}

}  // namespace flowbench
