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
#include <random>
#include <string>

#include "flowbench/definition.hpp"
#include "flowbench/payload.hpp"

namespace testsupport {

inline std::string repo_dir() {
#ifdef FLOWBENCH_REPO_DIR
  return FLOWBENCH_REPO_DIR;
#else
  return ".";
#endif
}

// Random but always-valid and always-runnable workflow definitions: a
// linear spine of stages; switches always jump forward to the next stage;
// map/loop arrays come from the fixed input field "items".
inline flowbench::WorkflowDefinition random_definition(std::uint64_t seed) {
  using namespace flowbench;
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(
                                     hi - lo + 1));
  };

  WorkflowDefinition defn;
  defn.name = "random_" + std::to_string(seed);
  const int stages = pick(1, 5);
  defn.root = "s0";

  std::vector<Phase> members;  // parallel branch members, appended at the end
  for (int i = 0; i < stages; ++i) {
    Phase p;
    p.name = "s" + std::to_string(i);
    const bool last = i + 1 == stages;
    int kind = pick(0, last ? 3 : 5);  // no trailing switch (cases need targets)
    if (kind == 5 && last) kind = 0;
    switch (kind) {
      case 0:
        p.kind = PhaseKind::Task;
        p.funcs = {"f" + std::to_string(pick(0, 3))};
        break;
      case 1: {
        p.kind = PhaseKind::Map;
        int chain = pick(1, 2);
        for (int c = 0; c < chain; ++c)
          p.funcs.push_back("f" + std::to_string(pick(0, 3)));
        p.array_path = "items";
        if (pick(0, 1)) p.common_parameters = "x";
        break;
      }
      case 2:
        p.kind = PhaseKind::Loop;
        p.funcs = {"f" + std::to_string(pick(0, 3))};
        p.array_path = "items";
        break;
      case 3:
        p.kind = PhaseKind::Repeat;
        p.funcs = {"f" + std::to_string(pick(0, 3))};
        p.count = pick(1, 3);
        break;
      case 4: {
        p.kind = PhaseKind::Parallel;
        const int branches = pick(2, 3);
        for (int b = 0; b < branches; ++b) {
          std::vector<std::string> branch;
          const int len = pick(1, 2);
          for (int m = 0; m < len; ++m) {
            Phase mp;
            mp.name = p.name + "_b" + std::to_string(b) + "_" +
                      std::to_string(m);
            mp.kind = PhaseKind::Task;
            mp.funcs = {"f" + std::to_string(pick(0, 3))};
            if (m + 1 < len)
              mp.next = p.name + "_b" + std::to_string(b) + "_" +
                        std::to_string(m + 1);
            branch.push_back(mp.name);
            members.push_back(std::move(mp));
          }
          p.branches.push_back(std::move(branch));
        }
        break;
      }
      case 5: {
        p.kind = PhaseKind::Switch;
        const char* ops[] = {"<", "<=", "==", "!=", ">=", ">"};
        const int cases = pick(1, 3);
        for (int c = 0; c < cases; ++c) {
          SwitchCase sc;
          sc.guard.variable = "x";
          sc.guard.comparator = ops[pick(0, 5)];
          sc.guard.literal = Payload(pick(0, 20));
          sc.next = "s" + std::to_string(i + 1);
          p.cases.push_back(std::move(sc));
        }
        p.default_next = "s" + std::to_string(i + 1);
        break;
      }
    }
    if (!last && p.kind != PhaseKind::Switch)
      p.next = "s" + std::to_string(i + 1);
    defn.phases.push_back(std::move(p));
  }
  for (Phase& m : members) defn.phases.push_back(std::move(m));
  return defn;
}

inline flowbench::Payload random_input(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  flowbench::Payload input = flowbench::Payload::object();
  input["x"] = static_cast<int>(rng() % 21);
  flowbench::Payload items = flowbench::Payload::array();
  const int n = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i) items.push_back(static_cast<int>(rng() % 100));
  input["items"] = std::move(items);
  return input;
}

}  // namespace testsupport
