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

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowbench/definition.hpp"
#include "flowbench/rng.hpp"
#include "flowbench/simulator.hpp"

namespace flowbench {

class EmptyTrace : public std::runtime_error {
 public:
  EmptyTrace() : std::runtime_error("trace has no function events") {}
};
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& m) : std::runtime_error(m) {}
};
class TooFewSamples : public std::runtime_error {
 public:
  TooFewSamples() : std::runtime_error("need at least 6 samples") {}
};

// ---------------------------------------------------------------------------
// Phase grouping
//
// Functions of one map instance share one phase. Iterations of repeat/loop
// phases are separate phases (they are precedence-ordered). Parallel
// branches form one phase each ("branch-as-phase"), so phase maxima of
// overlapping branches add up; see docs/analysis.md for the worked example.

inline std::map<std::string, std::string> branch_phase_grouping(
    const WorkflowDefinition& defn) {
  std::map<std::string, std::string> group;
  for (const Phase& p : defn.phases)
    for (std::size_t bi = 0; bi < p.branches.size(); ++bi)
      for (const std::string& member : p.branches[bi])
        group[member] = p.name + "/" + std::to_string(bi + 1);
  return group;
}

inline std::string strip_iteration(const std::string& phase) {
  auto pos = phase.rfind('#');
  if (pos == std::string::npos) return phase;
  for (std::size_t i = pos + 1; i < phase.size(); ++i)
    if (phase[i] < '0' || phase[i] > '9') return phase;
  return phase.substr(0, pos);
}

inline std::string phase_group_of(
    const std::string& phase_display,
    const std::map<std::string, std::string>& member_group) {
  auto it = member_group.find(strip_iteration(phase_display));
  if (it != member_group.end()) return it->second;
  return phase_display;
}

// ---------------------------------------------------------------------------
// Critical path and overhead

/// Runtime of one phase: earliest function start to latest function end.
struct PhaseRuntime {
  std::string phase;
  long long start_us = 0;
  long long end_us = 0;
  long long duration_us = 0;
};

struct Decomposition {
  long long t_c_us = 0;    // sum over phases of the max function duration
  long long t_o_us = 0;    // total minus critical path
  long long total_us = 0;  // last end minus first start
};

inline std::vector<PhaseRuntime> phase_runtimes(
    const ExecutionTrace& trace,
    const std::map<std::string, std::string>& member_group = {}) {
  std::vector<PhaseRuntime> out;
  std::map<std::string, std::size_t> index;
  for (const FunctionEvent& e : trace.events) {
    const std::string group = phase_group_of(e.phase, member_group);
    auto [it, inserted] = index.emplace(group, out.size());
    if (inserted) {
      out.push_back({group, e.start_us, e.end_us, 0});
    } else {
      PhaseRuntime& pr = out[it->second];
      pr.start_us = std::min(pr.start_us, e.start_us);
      pr.end_us = std::max(pr.end_us, e.end_us);
    }
  }
  for (PhaseRuntime& pr : out) pr.duration_us = pr.end_us - pr.start_us;
  return out;
}

inline Decomposition critical_path(
    const ExecutionTrace& trace,
    const std::map<std::string, std::string>& member_group = {}) {
  if (trace.events.empty()) throw EmptyTrace();
  std::map<std::string, long long> max_duration;
  for (const FunctionEvent& e : trace.events) {
    const std::string group = phase_group_of(e.phase, member_group);
    long long& m = max_duration[group];
    m = std::max(m, e.end_us - e.start_us);
  }
  Decomposition d;
  for (const auto& [group, m] : max_duration) d.t_c_us += m;
  d.total_us = trace.total_runtime_us;
  d.t_o_us = d.total_us - d.t_c_us;
  return d;
}

// ---------------------------------------------------------------------------
// Noise normalization
//
// T'_C = T_C * (1 - S_M), computed exactly from the binary value of S_M and
// rounded half-even to whole microseconds.

inline long long normalize_critical_path(long long t_c_us, double s_m) {
  if (!(s_m >= 0.0) || s_m >= 1.0)
    throw DomainError("suspension share must lie in [0,1)");
  if (t_c_us < 0) throw DomainError("critical path must be >= 0");
  if (s_m == 0.0 || t_c_us == 0) return t_c_us;

  int exp = 0;
  const double frac = std::frexp(s_m, &exp);  // s_m = frac * 2^exp
  const auto mantissa =
      static_cast<unsigned long long>(std::ldexp(frac, 53));  // exact
  const int shift = 53 - exp;  // s_m = mantissa / 2^shift, shift >= 53
  if (shift > 120) return t_c_us;  // s_m < 2^-67: product below half an us

  const unsigned __int128 product =
      static_cast<unsigned __int128>(t_c_us) * mantissa;
  const unsigned __int128 whole = product >> shift;
  const unsigned __int128 rem = product - (whole << shift);
  const unsigned __int128 half = static_cast<unsigned __int128>(1)
                                 << (shift - 1);
  const long long subtracted = static_cast<long long>(whole);
  if (rem == 0 || rem < half) return t_c_us - subtracted;
  if (rem > half) return t_c_us - subtracted - 1;
  const long long lo = t_c_us - subtracted - 1;  // value is lo + 0.5
  return (lo % 2 == 0) ? lo : lo + 1;
}

// ---------------------------------------------------------------------------
// Scaling profile

/// Distinct containers with an in-flight execution (including its start
/// latency) over virtual time; a step function changing at event bounds.
struct ScalingProfile {
  std::vector<std::pair<long long, long long>> points;  // (time, active)
  long long max_active = 0;
  long long busy_area_us = 0;  // integral of the step function

  long long at(long long t_us) const {
    long long value = 0;
    for (const auto& [t, v] : points) {
      if (t > t_us) break;
      value = v;
    }
    return value;
  }
};

inline ScalingProfile scaling_profile(
    const std::vector<ExecutionTrace>& traces) {
  std::vector<std::pair<long long, int>> deltas;
  for (const ExecutionTrace& tr : traces)
    for (const FunctionEvent& e : tr.events) {
      deltas.emplace_back(e.acquired_us, +1);
      deltas.emplace_back(e.end_us, -1);
    }
  std::sort(deltas.begin(), deltas.end());
  ScalingProfile profile;
  long long active = 0;
  long long last_time = 0;
  bool open = false;
  for (std::size_t i = 0; i < deltas.size();) {
    const long long t = deltas[i].first;
    if (open) profile.busy_area_us += active * (t - last_time);
    long long change = 0;
    while (i < deltas.size() && deltas[i].first == t) {
      change += deltas[i].second;
      ++i;
    }
    active += change;
    profile.points.emplace_back(t, active);
    profile.max_active = std::max(profile.max_active, active);
    last_time = t;
    open = true;
  }
  return profile;
}

// ---------------------------------------------------------------------------
// Cold starts

struct ColdStartStats {
  long long cold_events = 0;
  long long total_events = 0;
  double fraction = 0.0;
};

inline ColdStartStats cold_start_stats(
    const std::vector<ExecutionTrace>& traces) {
  ColdStartStats stats;
  for (const ExecutionTrace& tr : traces)
    for (const FunctionEvent& e : tr.events) {
      stats.total_events++;
      if (e.cold) stats.cold_events++;
    }
  if (stats.total_events > 0)
    stats.fraction = static_cast<double>(stats.cold_events) /
                     static_cast<double>(stats.total_events);
  return stats;
}

// ---------------------------------------------------------------------------
// Non-parametric median confidence interval

struct MedianCi {
  double low = 0.0;
  double high = 0.0;
  double achieved_coverage = 0.0;  // exact order-statistic coverage
  int rank_low = 0;                // 1-based symmetric ranks
  int rank_high = 0;
};

/// Distribution-free interval from order statistics: the tightest symmetric
/// ranks (k, n+1-k) whose binomial(n, 1/2) coverage reaches the requested
/// confidence. Exact 95% is unattainable with discrete ranks, so the
/// achieved coverage is reported alongside.
inline MedianCi median_ci(std::vector<double> samples,
                          double confidence = 0.95) {
  const int n = static_cast<int>(samples.size());
  if (n < 6) throw TooFewSamples();
  std::sort(samples.begin(), samples.end());

  // binomial(n, 1/2) pmf by recurrence
  std::vector<long double> pmf(static_cast<std::size_t>(n) + 1);
  long double p = std::pow(0.5L, n);
  for (int i = 0; i <= n; ++i) {
    pmf[static_cast<std::size_t>(i)] = p;
    p = p * static_cast<long double>(n - i) / static_cast<long double>(i + 1);
  }
  auto coverage = [&](int k) {
    long double tail = 0.0L;
    for (int i = 0; i <= k - 1; ++i) tail += pmf[static_cast<std::size_t>(i)];
    return static_cast<double>(1.0L - 2.0L * tail);
  };

  int best = 1;
  for (int k = n / 2; k >= 1; --k) {
    if (coverage(k) >= confidence) {
      best = k;
      break;
    }
  }
  MedianCi ci;
  ci.rank_low = best;
  ci.rank_high = n + 1 - best;
  ci.low = samples[static_cast<std::size_t>(best - 1)];
  ci.high = samples[static_cast<std::size_t>(n - best)];
  ci.achieved_coverage = coverage(best);
  return ci;
}

// ---------------------------------------------------------------------------
// Selfish detour

struct DetourConfig {
  long long loop_cycles = 100;          // expected cost of one iteration
  long long suspension_cycles = 10000;  // injected suspension length
  long long threshold_cycles = 200;     // detour detection threshold
  long long target_events = 5000;       // N
  long long max_iterations = 20000000;
};

struct DetourResult {
  double estimate = 0.0;
  long long events = 0;
  long long elapsed_cycles = 0;
};

/// Tight-loop suspension probe: iterations that overshoot the threshold are
/// detour events; the estimate is the summed excess over elapsed time.
/// Recovers the share injected by the platform model within sampling error.
inline DetourResult estimate_suspension_share(double injected_share,
                                              const DetourConfig& cfg,
                                              Rng& rng) {
  DetourResult result;
  if (injected_share < 0.0 || injected_share >= 1.0)
    throw DomainError("suspension share must lie in [0,1)");
  const double p =
      injected_share <= 0.0
          ? 0.0
          : injected_share * static_cast<double>(cfg.loop_cycles) /
                (static_cast<double>(cfg.suspension_cycles) *
                 (1.0 - injected_share));
  long long excess = 0;
  for (long long i = 0;
       i < cfg.max_iterations && result.events < cfg.target_events; ++i) {
    long long cost = cfg.loop_cycles;
    if (p > 0.0 && rng.next_double() < p) cost += cfg.suspension_cycles;
    result.elapsed_cycles += cost;
    if (cost > cfg.threshold_cycles) {
      result.events++;
      excess += cost - cfg.loop_cycles;
    }
  }
  if (result.elapsed_cycles > 0)
    result.estimate = static_cast<double>(excess) /
                      static_cast<double>(result.elapsed_cycles);
  return result;
}

}  // namespace flowbench
