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

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowbench/definition.hpp"
#include "flowbench/net.hpp"

namespace flowbench {

enum class CloudPlatform { Aws, Google, Azure };

inline const char* platform_name(CloudPlatform p) {
  switch (p) {
    case CloudPlatform::Aws: return "aws";
    case CloudPlatform::Google: return "google";
    case CloudPlatform::Azure: return "azure";
  }
  return "?";
}

class Untranscribable : public std::runtime_error {
 public:
  Untranscribable(const std::string& construct, const std::string& why)
      : std::runtime_error("cannot transcribe " + construct + ": " + why),
        construct_(construct) {}
  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

struct CensusNote {
  std::string code;
  std::string message;
};

/// Concrete widths (and optionally an injected failure) defining one
/// execution for transition counting.
struct ExecutionProfile {
  std::map<std::string, long long> fanouts;
  std::optional<std::string> failing_phase;  // takes its on_failure route
};

// ---------------------------------------------------------------------------
// Step accounting
//
// The per-execution transition rule is calibrated per platform:
//   AWS     2 + one transition per state entered: Task 1, Map/Loop 1 + W*L,
//           Choice 1, Parallel 1 + branch states.
//   Google  2 + one per executed step: Task call+assign (2); Map zip-init,
//           zip-loop, map, collect (4) plus per element one zip append and a
//           lane sub-workflow of unpack, call+assign per function, return
//           (2L+3 total); Loop 1 + 2*W*L; switch 1; Parallel 1 + inline
//           branch steps.
//   Azure   orchestrator awakenings: one per phase stage + the initial one;
//           billing for Azure uses orchestrator duration instead.

namespace censusdetail {

inline long long width_for(const Phase& p, const ExecutionProfile& profile) {
  if (p.kind == PhaseKind::Map || p.kind == PhaseKind::Loop) {
    auto it = profile.fanouts.find(p.name);
    if (it == profile.fanouts.end()) throw FanoutMissing(p.name);
    return it->second;
  }
  if (p.kind == PhaseKind::Repeat) return p.count;
  return 1;
}

inline long long phase_steps(const Phase& p, CloudPlatform platform,
                             const ExecutionProfile& profile);

// Executed phases along the canonical path: next edges from the root,
// branches of every parallel, the failure route when injected. A switch
// continues through its default (or first case) for counting purposes.
inline void walk(const WorkflowDefinition& defn, const std::string& name,
                 const ExecutionProfile& profile,
                 const std::function<void(const Phase&)>& visit,
                 int depth = 0) {
  if (depth > static_cast<int>(defn.phases.size()) + 4) return;  // cycles
  const Phase* p = defn.find(name);
  if (!p) return;
  visit(*p);
  if (p->kind == PhaseKind::Parallel) {
    for (const auto& branch : p->branches)
      for (const auto& member : branch) {
        const Phase* m = defn.find(member);
        if (m) visit(*m);
      }
  }
  if (profile.failing_phase && *profile.failing_phase == p->name &&
      p->on_failure) {
    walk(defn, *p->on_failure, profile, visit, depth + 1);
    return;
  }
  if (p->next) {
    walk(defn, *p->next, profile, visit, depth + 1);
  } else if (p->kind == PhaseKind::Switch) {
    if (p->default_next)
      walk(defn, *p->default_next, profile, visit, depth + 1);
    else if (!p->cases.empty())
      walk(defn, p->cases.front().next, profile, visit, depth + 1);
  }
}

inline long long phase_steps(const Phase& p, CloudPlatform platform,
                             const ExecutionProfile& profile) {
  const long long w = width_for(p, profile);
  const long long chain = static_cast<long long>(p.funcs.size());
  switch (platform) {
    case CloudPlatform::Aws:
      switch (p.kind) {
        case PhaseKind::Task: return 1;
        case PhaseKind::Repeat: return p.count;
        case PhaseKind::Map:
        case PhaseKind::Loop: return 1 + w * chain;
        case PhaseKind::Switch: return 1;
        case PhaseKind::Parallel: return 1;  // members counted separately
      }
      break;
    case CloudPlatform::Google:
      switch (p.kind) {
        case PhaseKind::Task: return 2;
        case PhaseKind::Repeat: return 2 * p.count;
        case PhaseKind::Map: return 4 + w * (2 * chain + 3);
        case PhaseKind::Loop: return 1 + 2 * w * chain;
        case PhaseKind::Switch: return 1;
        case PhaseKind::Parallel: return 1;
      }
      break;
    case CloudPlatform::Azure:
      switch (p.kind) {
        case PhaseKind::Task: return 1;
        case PhaseKind::Repeat: return p.count;
        case PhaseKind::Map: return 1;
        case PhaseKind::Loop: return w;
        case PhaseKind::Switch: return 1;
        case PhaseKind::Parallel: return 0;  // members wake the orchestrator
      }
      break;
  }
  return 0;
}

}  // namespace censusdetail

struct StateCensus {
  CloudPlatform platform = CloudPlatform::Aws;
  long long state_count = 0;  // static size of the rendered program
  std::vector<CensusNote> notes;

  // evaluation context
  WorkflowDefinition source;

  long long transitions_per_execution(const ExecutionProfile& profile) const {
    long long total = 0;
    censusdetail::walk(source, source.root, profile, [&](const Phase& p) {
      total += censusdetail::phase_steps(p, platform, profile);
    });
    if (platform == CloudPlatform::Azure) return total + 1;
    return 2 + total;
  }

  // Google bills internal steps (assign/parse) and external HTTP calls at
  // different rates; calls to workflow-invoked functions are external.
  std::pair<long long, long long> google_internal_external(
      const ExecutionProfile& profile) const {
    long long external = 0;
    censusdetail::walk(source, source.root, profile, [&](const Phase& p) {
      const long long w = censusdetail::width_for(p, profile);
      const long long chain = static_cast<long long>(p.funcs.size());
      if (p.kind == PhaseKind::Task) external += 1;
      else if (p.kind == PhaseKind::Repeat) external += p.count;
      else if (p.kind == PhaseKind::Map || p.kind == PhaseKind::Loop)
        external += w * chain;
    });
    const long long total = transitions_per_execution(profile);
    return {total - external, external};
  }
};

struct PlatformProgram {
  CloudPlatform platform = CloudPlatform::Aws;
  // Rendered artifact files, in emission order: AWS ships one state-machine
  // document; Google both encodings; Azure an orchestrator payload plus an
  // activity manifest.
  std::vector<std::pair<std::string, std::string>> files;
  StateCensus census;

  const std::string& document() const { return files.front().second; }
};

// ---------------------------------------------------------------------------
// AWS state machines

namespace awsdetail {

inline std::string lambda_arn(const std::string& func) {
  return "arn:aws:lambda:us-east-1:000000000000:function:" + func;
}

inline Payload comparison(const Guard& g) {
  Payload c = Payload::object();
  c["Variable"] = "$.payload." + g.variable;
  const bool str = g.literal.is_string();
  std::string op;
  if (g.comparator == "<") op = "NumericLessThan";
  else if (g.comparator == "<=") op = "NumericLessThanEquals";
  else if (g.comparator == ">=") op = "NumericGreaterThanEquals";
  else if (g.comparator == ">") op = "NumericGreaterThan";
  else op = str ? "StringEquals" : "NumericEquals";
  if (g.comparator == "!=") {
    Payload inner = Payload::object();
    inner["Variable"] = c["Variable"];
    inner[str ? "StringEquals" : "NumericEquals"] = g.literal;
    Payload wrapped = Payload::object();
    wrapped["Not"] = inner;
    return wrapped;
  }
  c[op] = g.literal;
  return c;
}

inline Payload task_state(const std::string& func) {
  Payload s = Payload::object();
  s["Type"] = "Task";
  s["Resource"] = lambda_arn(func);
  Payload params = Payload::object();
  params["payload.$"] = "$";
  s["Parameters"] = std::move(params);
  return s;
}

}  // namespace awsdetail

/// AWS Step Functions state machine. Repeats unroll into task chains; loops
/// reuse the map state with MaxConcurrency 1 (and carry a machine-readable
/// note about the payload caveat of that workaround).
inline PlatformProgram to_aws(const WorkflowDefinition& defn) {
  using awsdetail::task_state;
  PlatformProgram program;
  program.platform = CloudPlatform::Aws;
  program.census.platform = CloudPlatform::Aws;
  program.census.source = defn;

  Payload states = Payload::object();
  long long state_count = 0;

  // Phase -> name of its first state.
  std::map<std::string, std::string> entry;
  std::set<std::string> members;
  for (const Phase& p : defn.phases)
    for (const auto& b : p.branches)
      for (const auto& m : b) members.insert(m);
  for (const Phase& p : defn.phases)
    entry[p.name] =
        p.kind == PhaseKind::Repeat ? p.name + "#1" : p.name;

  // Builds the state object(s) for one phase into `target`.
  std::function<void(const Phase&, Payload&, long long&,
                     const std::optional<std::string>&)>
      emit = [&](const Phase& p, Payload& target, long long& count,
                 const std::optional<std::string>& next_state) {
        auto seal = [&](Payload& s) {
          if (next_state) s["Next"] = *next_state;
          else s["End"] = true;
        };
        switch (p.kind) {
          case PhaseKind::Task: {
            Payload s = task_state(p.funcs.front());
            if (p.on_failure) {
              Payload handler = Payload::object();
              handler["ErrorEquals"] = Payload::array({"States.ALL"});
              handler["Next"] = entry.at(*p.on_failure);
              handler["ResultPath"] = "$.error";
              s["Catch"] = Payload::array({handler});
            }
            seal(s);
            target[p.name] = std::move(s);
            ++count;
            break;
          }
          case PhaseKind::Repeat: {
            for (long long i = 1; i <= p.count; ++i) {
              Payload s = task_state(p.funcs.front());
              if (i < p.count) s["Next"] = p.name + "#" + std::to_string(i + 1);
              else seal(s);
              target[p.name + "#" + std::to_string(i)] = std::move(s);
              ++count;
            }
            break;
          }
          case PhaseKind::Map:
          case PhaseKind::Loop: {
            Payload s = Payload::object();
            s["Type"] = "Map";
            s["ItemsPath"] = "$.payload." + p.array_path;
            s["MaxConcurrency"] = p.kind == PhaseKind::Loop ? 1 : 0;
            Payload params = Payload::object();
            params["item.$"] = "$$.Map.Item.Value";
            params["index.$"] = "$$.Map.Item.Index";
            if (p.common_parameters)
              params["common.$"] = "$.payload." + *p.common_parameters;
            s["Parameters"] = std::move(params);
            Payload iter = Payload::object();
            iter["StartAt"] = p.name + ".1";
            Payload istates = Payload::object();
            for (std::size_t i = 0; i < p.funcs.size(); ++i) {
              Payload is = task_state(p.funcs[i]);
              if (i + 1 < p.funcs.size())
                is["Next"] = p.name + "." + std::to_string(i + 2);
              else
                is["End"] = true;
              istates[p.name + "." + std::to_string(i + 1)] = std::move(is);
              ++count;
            }
            iter["States"] = std::move(istates);
            s["Iterator"] = std::move(iter);
            s["ResultPath"] = "$.payload.results";
            seal(s);
            target[p.name] = std::move(s);
            ++count;
            if (p.kind == PhaseKind::Loop) {
              program.census.notes.push_back(
                  {"loop-sequential-map",
                   "loop '" + p.name +
                       "' runs as a map with MaxConcurrency 1; iteration i+1 "
                       "cannot read iteration i's return payload except via "
                       "object storage"});
            }
            break;
          }
          case PhaseKind::Switch: {
            Payload s = Payload::object();
            s["Type"] = "Choice";
            Payload choices = Payload::array();
            for (const SwitchCase& c : p.cases) {
              if (c.next.empty())
                throw Untranscribable(
                    "switch case in '" + p.name + "'",
                    "a choice cannot end the workflow; give the case a "
                    "target");
              Payload cond = awsdetail::comparison(c.guard);
              cond["Next"] = entry.at(c.next);
              choices.push_back(std::move(cond));
            }
            s["Choices"] = std::move(choices);
            if (p.default_next) s["Default"] = entry.at(*p.default_next);
            target[p.name] = std::move(s);
            ++count;
            break;
          }
          case PhaseKind::Parallel: {
            Payload s = Payload::object();
            s["Type"] = "Parallel";
            Payload branches = Payload::array();
            for (const auto& branch : p.branches) {
              Payload b = Payload::object();
              b["StartAt"] = entry.at(branch.front());
              Payload bstates = Payload::object();
              for (std::size_t i = 0; i < branch.size(); ++i) {
                const Phase* m = defn.find(branch[i]);
                std::optional<std::string> mnext;
                if (i + 1 < branch.size()) mnext = entry.at(branch[i + 1]);
                emit(*m, bstates, count, mnext);
              }
              b["States"] = std::move(bstates);
              branches.push_back(std::move(b));
            }
            s["Branches"] = std::move(branches);
            s["ResultPath"] = "$.payload.results";
            seal(s);
            target[p.name] = std::move(s);
            ++count;
            break;
          }
        }
      };

  for (const Phase& p : defn.phases) {
    if (members.count(p.name)) continue;
    std::optional<std::string> next_state;
    if (p.next) next_state = entry.at(*p.next);
    emit(p, states, state_count, next_state);
  }

  Payload doc = Payload::object();
  doc["Comment"] = defn.name;
  doc["StartAt"] = entry.at(defn.root);
  doc["States"] = std::move(states);

  program.census.state_count = state_count;
  program.files.emplace_back("statemachine.json", doc.dump(2) + "\n");
  return program;
}

// ---------------------------------------------------------------------------
// Google Cloud Workflows

namespace googledetail {

inline std::string trigger_url(const std::string& func) {
  return "https://us-east1-project.cloudfunctions.net/" + func;
}

inline std::string condition_expr(const Guard& g) {
  std::string lit = g.literal.dump();  // JSON literal doubles as expression
  return "${payload." + g.variable + " " + g.comparator + " " + lit + "}";
}

inline Payload step(const std::string& name, Payload body) {
  Payload s = Payload::object();
  s[name] = std::move(body);
  return s;
}

inline Payload call_step(const std::string& func, const std::string& arg_expr,
                         const std::string& result_var) {
  Payload body = Payload::object();
  body["call"] = "http.post";
  Payload args = Payload::object();
  args["url"] = trigger_url(func);
  Payload post = Payload::object();
  post["payload"] = "${" + arg_expr + "}";
  args["body"] = std::move(post);
  body["args"] = std::move(args);
  body["result"] = result_var;
  return body;
}

}  // namespace googledetail

/// Google Cloud Workflows program. Tasks become a POST call plus a
/// response-parse step; each map becomes a parallel iteration over a
/// generated lane sub-workflow fed with the input array zipped against the
/// common parameters.
inline PlatformProgram to_google(const WorkflowDefinition& defn) {
  using googledetail::call_step;
  using googledetail::step;
  PlatformProgram program;
  program.platform = CloudPlatform::Google;
  program.census.platform = CloudPlatform::Google;
  program.census.source = defn;

  std::set<std::string> members;
  for (const Phase& p : defn.phases)
    for (const auto& b : p.branches)
      for (const auto& m : b) members.insert(m);

  std::map<std::string, std::string> entry;
  for (const Phase& p : defn.phases) {
    switch (p.kind) {
      case PhaseKind::Task: entry[p.name] = p.name + "_call"; break;
      case PhaseKind::Repeat: entry[p.name] = p.name + "_1_call"; break;
      case PhaseKind::Map: entry[p.name] = p.name + "_zip_init"; break;
      case PhaseKind::Loop: entry[p.name] = p.name + "_loop"; break;
      case PhaseKind::Switch: entry[p.name] = p.name + "_switch"; break;
      case PhaseKind::Parallel: entry[p.name] = p.name + "_parallel"; break;
    }
  }

  long long state_count = 0;
  Payload subworkflows = Payload::object();

  // Emits the steps of one phase; the last step carries `next` unless the
  // phase ends the workflow.
  std::function<void(const Phase&, Payload&,
                     const std::optional<std::string>&)>
      emit = [&](const Phase& p, Payload& steps,
                 const std::optional<std::string>& next_step) {
        auto seal = [&](Payload& body) {
          if (next_step) body["next"] = *next_step;
        };
        switch (p.kind) {
          case PhaseKind::Task:
          case PhaseKind::Repeat: {
            const long long reps =
                p.kind == PhaseKind::Repeat ? p.count : 1;
            for (long long i = 1; i <= reps; ++i) {
              const std::string base =
                  p.kind == PhaseKind::Repeat
                      ? p.name + "_" + std::to_string(i)
                      : p.name;
              Payload call =
                  call_step(p.funcs.front(), "payload", base + "_resp");
              Payload assign_body = Payload::object();
              Payload assignment = Payload::object();
              assignment["payload"] = "${" + base + "_resp.body}";
              assign_body["assign"] = Payload::array({assignment});
              const bool last = i == reps;
              if (p.on_failure) {
                // try/except around the call; on error jump to the handler
                Payload tr = Payload::object();
                Payload try_block = Payload::object();
                try_block["steps"] =
                    Payload::array({step(base + "_call", std::move(call))});
                tr["try"] = std::move(try_block);
                Payload except = Payload::object();
                except["as"] = "e";
                Payload jump = Payload::object();
                Payload err_assign = Payload::object();
                err_assign["payload"] = "${e}";
                jump["assign"] = Payload::array({err_assign});
                jump["next"] = entry.at(*p.on_failure);
                except["steps"] =
                    Payload::array({step(base + "_catch", std::move(jump))});
                tr["except"] = std::move(except);
                steps.push_back(step(base + "_try", std::move(tr)));
                ++state_count;
              } else {
                steps.push_back(step(base + "_call", std::move(call)));
                ++state_count;
              }
              if (last) seal(assign_body);
              else assign_body["next"] = p.name + "_" +
                                         std::to_string(i + 1) + "_call";
              steps.push_back(step(base + "_assign", std::move(assign_body)));
              ++state_count;
            }
            break;
          }
          case PhaseKind::Map: {
            // zip the array with the shared parameters, then fan out over a
            // lane sub-workflow (the platform maps only over workflows)
            Payload init = Payload::object();
            Payload zipped = Payload::object();
            zipped["zipped"] = Payload::array();
            init["assign"] = Payload::array({zipped});
            steps.push_back(step(p.name + "_zip_init", std::move(init)));

            Payload loop = Payload::object();
            Payload forloop = Payload::object();
            forloop["value"] = "v";
            forloop["index"] = "i";
            forloop["in"] = "${payload." + p.array_path + "}";
            Payload append = Payload::object();
            Payload elem = Payload::object();
            elem["item"] = "${v}";
            elem["index"] = "${i}";
            if (p.common_parameters)
              elem["common"] = "${payload." + *p.common_parameters + "}";
            Payload app_assign = Payload::object();
            app_assign["zipped"] = "${list.concat(zipped, " + elem.dump() +
                                   ")}";
            append["assign"] = Payload::array({app_assign});
            forloop["steps"] =
                Payload::array({step(p.name + "_zip_append", std::move(append))});
            loop["for"] = std::move(forloop);
            steps.push_back(step(p.name + "_zip_loop", std::move(loop)));

            Payload mapcall = Payload::object();
            mapcall["call"] = "experimental.executions.map";
            Payload margs = Payload::object();
            margs["workflow_id"] = p.name + "_lane";
            margs["arguments"] = "${zipped}";
            mapcall["args"] = std::move(margs);
            mapcall["result"] = p.name + "_mapped";
            steps.push_back(step(p.name + "_map", std::move(mapcall)));

            Payload collect = Payload::object();
            Payload cassign = Payload::object();
            Payload presults = Payload::object();
            presults["results"] = "${" + p.name + "_mapped}";
            cassign["payload"] = std::move(presults);
            collect["assign"] = Payload::array({cassign});
            seal(collect);
            steps.push_back(step(p.name + "_collect", std::move(collect)));
            state_count += 4;

            // lane sub-workflow: unpack, call+parse per function, return
            Payload lane = Payload::object();
            lane["params"] = Payload::array({"elem"});
            Payload lsteps = Payload::array();
            Payload unpack = Payload::object();
            Payload lassign = Payload::object();
            lassign["lane_payload"] = "${elem}";
            unpack["assign"] = Payload::array({lassign});
            lsteps.push_back(step(p.name + "_unpack", std::move(unpack)));
            ++state_count;
            for (std::size_t i = 0; i < p.funcs.size(); ++i) {
              const std::string base =
                  p.name + "_f" + std::to_string(i + 1);
              lsteps.push_back(step(
                  base + "_call",
                  call_step(p.funcs[i], "lane_payload", base + "_resp")));
              Payload parse = Payload::object();
              Payload passign = Payload::object();
              passign["lane_payload"] = "${" + base + "_resp.body}";
              parse["assign"] = Payload::array({passign});
              lsteps.push_back(step(base + "_assign", std::move(parse)));
              state_count += 2;
            }
            Payload ret = Payload::object();
            ret["return"] = "${lane_payload}";
            lsteps.push_back(step(p.name + "_return", std::move(ret)));
            ++state_count;
            lane["steps"] = std::move(lsteps);
            subworkflows[p.name + "_lane"] = std::move(lane);
            break;
          }
          case PhaseKind::Loop: {
            Payload loop = Payload::object();
            Payload forloop = Payload::object();
            forloop["value"] = "item";
            forloop["index"] = "i";
            forloop["in"] = "${payload." + p.array_path + "}";
            Payload lsteps = Payload::array();
            for (std::size_t i = 0; i < p.funcs.size(); ++i) {
              const std::string base =
                  p.name + "_f" + std::to_string(i + 1);
              lsteps.push_back(step(
                  base + "_call",
                  call_step(p.funcs[i], "item", base + "_resp")));
              Payload parse = Payload::object();
              Payload passign = Payload::object();
              passign["item"] = "${" + base + "_resp.body}";
              parse["assign"] = Payload::array({passign});
              lsteps.push_back(step(base + "_assign", std::move(parse)));
              state_count += 2;
            }
            forloop["steps"] = std::move(lsteps);
            loop["for"] = std::move(forloop);
            seal(loop);
            steps.push_back(step(p.name + "_loop", std::move(loop)));
            ++state_count;
            break;
          }
          case PhaseKind::Switch: {
            Payload sw = Payload::object();
            Payload conds = Payload::array();
            for (const SwitchCase& c : p.cases) {
              if (c.next.empty())
                throw Untranscribable("switch case in '" + p.name + "'",
                                      "a case cannot end the workflow; give "
                                      "the case a target");
              Payload cond = Payload::object();
              cond["condition"] = googledetail::condition_expr(c.guard);
              cond["next"] = entry.at(c.next);
              conds.push_back(std::move(cond));
            }
            sw["switch"] = std::move(conds);
            if (p.default_next) sw["next"] = entry.at(*p.default_next);
            steps.push_back(step(p.name + "_switch", std::move(sw)));
            ++state_count;
            break;
          }
          case PhaseKind::Parallel: {
            Payload par = Payload::object();
            Payload branches = Payload::array();
            for (std::size_t bi = 0; bi < p.branches.size(); ++bi) {
              const auto& branch = p.branches[bi];
              Payload bsteps = Payload::array();
              for (std::size_t i = 0; i < branch.size(); ++i) {
                const Phase* m = defn.find(branch[i]);
                std::optional<std::string> mnext;
                if (i + 1 < branch.size()) mnext = entry.at(branch[i + 1]);
                emit(*m, bsteps, mnext);
              }
              Payload b = Payload::object();
              Payload binner = Payload::object();
              binner["steps"] = std::move(bsteps);
              b["branch" + std::to_string(bi + 1)] = std::move(binner);
              branches.push_back(std::move(b));
            }
            Payload inner = Payload::object();
            inner["branches"] = std::move(branches);
            par["parallel"] = std::move(inner);
            seal(par);
            steps.push_back(step(p.name + "_parallel", std::move(par)));
            ++state_count;
            break;
          }
        }
      };

  Payload main_steps = Payload::array();
  for (const Phase& p : defn.phases) {
    if (members.count(p.name)) continue;
    std::optional<std::string> next_step;
    if (p.next) next_step = entry.at(*p.next);
    emit(p, main_steps, next_step);
  }

  Payload doc = Payload::object();
  Payload main = Payload::object();
  main["params"] = Payload::array({"payload"});
  main["steps"] = std::move(main_steps);
  doc["main"] = std::move(main);
  for (auto it = subworkflows.begin(); it != subworkflows.end(); ++it)
    doc[it.key()] = it.value();

  program.census.state_count = state_count;
  program.files.emplace_back("workflow.json", doc.dump(2) + "\n");
  program.files.emplace_back("workflow.yaml", emit_yaml_text(doc));
  return program;
}

// ---------------------------------------------------------------------------
// Azure Durable Functions

/// Azure orchestrator payload: the canonical serialized definition plus an
/// activity manifest. A generic orchestrator decodes the definition and
/// spawns activity executions for it.
inline PlatformProgram to_azure(const WorkflowDefinition& defn) {
  PlatformProgram program;
  program.platform = CloudPlatform::Azure;
  program.census.platform = CloudPlatform::Azure;
  program.census.source = defn;
  program.census.state_count = static_cast<long long>(defn.phases.size());

  Payload payload = Payload::object();
  payload["definition"] = definition_to_payload(defn);
  program.files.emplace_back("orchestrator_payload.json",
                             payload.dump(2) + "\n");

  // Distinct functions, in first-use order.
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const Phase& p : defn.phases)
    for (const auto& f : p.funcs)
      if (seen.insert(f).second) order.push_back(f);
  Payload manifest = Payload::object();
  Payload activities = Payload::array();
  for (const auto& f : order) {
    Payload a = Payload::object();
    a["name"] = f;
    a["binding"] = f;
    activities.push_back(std::move(a));
  }
  manifest["activities"] = std::move(activities);
  program.files.emplace_back("activities.json", manifest.dump(2) + "\n");
  return program;
}

inline PlatformProgram transcribe(const WorkflowDefinition& defn,
                                  CloudPlatform platform) {
  switch (platform) {
    case CloudPlatform::Aws: return to_aws(defn);
    case CloudPlatform::Google: return to_google(defn);
    case CloudPlatform::Azure: return to_azure(defn);
  }
  throw Untranscribable("platform", "unknown platform");
}

/// Platforms ranked by transitions per execution, cheapest first.
inline std::vector<std::pair<CloudPlatform, long long>> census_compare(
    const WorkflowDefinition& defn, const ExecutionProfile& profile) {
  std::vector<std::pair<CloudPlatform, long long>> ranking;
  for (CloudPlatform p : {CloudPlatform::Aws, CloudPlatform::Google,
                          CloudPlatform::Azure}) {
    PlatformProgram program = transcribe(defn, p);
    ranking.emplace_back(p, program.census.transitions_per_execution(profile));
  }
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const auto& a, const auto& b) {
                     return a.second < b.second;
                   });
  return ranking;
}

// ---------------------------------------------------------------------------
// Self-parse checks (document well-formedness for the platform grammar)

inline std::vector<std::string> lint_aws(const std::string& document) {
  std::vector<std::string> problems;
  Payload doc;
  try {
    doc = parse_json_text(document);
  } catch (const std::exception& e) {
    problems.push_back(e.what());
    return problems;
  }
  std::function<void(const Payload&, const std::string&)> check_states =
      [&](const Payload& states, const std::string& where) {
        for (auto it = states.begin(); it != states.end(); ++it) {
          const Payload& s = it.value();
          if (!s.contains("Type")) {
            problems.push_back(where + it.key() + " lacks Type");
            continue;
          }
          auto check_target = [&](const std::string& t) {
            if (!states.contains(t))
              problems.push_back(where + it.key() + " -> missing state " + t);
          };
          if (s.contains("Next")) check_target(s["Next"]);
          if (s.contains("Default")) check_target(s["Default"]);
          if (s.contains("Choices"))
            for (const Payload& c : s["Choices"])
              if (c.contains("Next")) check_target(c["Next"]);
          if (s.contains("Catch"))
            for (const Payload& c : s["Catch"]) check_target(c["Next"]);
          if (s.contains("Iterator")) {
            const Payload& iter = s["Iterator"];
            if (!iter.contains("StartAt") ||
                !iter["States"].contains(iter["StartAt"].get<std::string>()))
              problems.push_back(where + it.key() + " iterator StartAt broken");
            check_states(iter["States"], where + it.key() + "/");
          }
          if (s.contains("Branches"))
            for (const Payload& b : s["Branches"]) {
              if (!b.contains("StartAt") ||
                  !b["States"].contains(b["StartAt"].get<std::string>()))
                problems.push_back(where + it.key() + " branch StartAt broken");
              check_states(b["States"], where + it.key() + "/");
            }
          const bool terminal = s.contains("End") && s["End"].get<bool>();
          if (!terminal && !s.contains("Next") && s["Type"] != "Choice")
            problems.push_back(where + it.key() + " neither ends nor chains");
        }
      };
  if (!doc.contains("StartAt") || !doc.contains("States"))
    problems.push_back("missing StartAt/States");
  else if (!doc["States"].contains(doc["StartAt"].get<std::string>()))
    problems.push_back("StartAt names a missing state");
  else
    check_states(doc["States"], "");
  return problems;
}

inline std::vector<std::string> lint_google(const std::string& document) {
  std::vector<std::string> problems;
  Payload doc;
  try {
    doc = parse_structured_text(document);
  } catch (const std::exception& e) {
    problems.push_back(e.what());
    return problems;
  }
  if (!doc.contains("main")) {
    problems.push_back("missing main workflow");
    return problems;
  }
  std::function<std::set<std::string>(const Payload&)> names =
      [&](const Payload& steps) {
        std::set<std::string> all;
        for (const Payload& s : steps) {
          for (auto it = s.begin(); it != s.end(); ++it) {
            all.insert(it.key());
            const Payload& body = it.value();
            if (body.contains("for") && body["for"].contains("steps"))
              for (const auto& n : names(body["for"]["steps"])) all.insert(n);
            if (body.contains("try") && body["try"].contains("steps"))
              for (const auto& n : names(body["try"]["steps"])) all.insert(n);
            if (body.contains("except") && body["except"].contains("steps"))
              for (const auto& n : names(body["except"]["steps"]))
                all.insert(n);
            if (body.contains("parallel"))
              for (const Payload& b : body["parallel"]["branches"])
                for (auto bit = b.begin(); bit != b.end(); ++bit)
                  for (const auto& n : names(bit.value()["steps"]))
                    all.insert(n);
          }
        }
        return all;
      };
  std::set<std::string> all = names(doc["main"]["steps"]);
  std::function<void(const Payload&)> check_next = [&](const Payload& steps) {
    for (const Payload& s : steps) {
      for (auto it = s.begin(); it != s.end(); ++it) {
        const Payload& body = it.value();
        if (body.contains("next") && !all.count(body["next"].get<std::string>()))
          problems.push_back(it.key() + " -> missing step " +
                             body["next"].get<std::string>());
        if (body.contains("switch"))
          for (const Payload& c : body["switch"])
            if (c.contains("next") &&
                !all.count(c["next"].get<std::string>()))
              problems.push_back(it.key() + " -> missing step " +
                                 c["next"].get<std::string>());
        if (body.contains("for") && body["for"].contains("steps"))
          check_next(body["for"]["steps"]);
        if (body.contains("try") && body["try"].contains("steps"))
          check_next(body["try"]["steps"]);
        if (body.contains("except") && body["except"].contains("steps"))
          check_next(body["except"]["steps"]);
        if (body.contains("parallel"))
          for (const Payload& b : body["parallel"]["branches"])
            for (auto bit = b.begin(); bit != b.end(); ++bit)
              check_next(bit.value()["steps"]);
      }
    }
  };
  check_next(doc["main"]["steps"]);
  return problems;
}

}  // namespace flowbench
