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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowbench/encoding.hpp"
#include "flowbench/payload.hpp"

namespace flowbench {

enum class PhaseKind { Task, Map, Loop, Repeat, Switch, Parallel };

inline const char* phase_kind_name(PhaseKind k) {
  switch (k) {
    case PhaseKind::Task: return "task";
    case PhaseKind::Map: return "map";
    case PhaseKind::Loop: return "loop";
    case PhaseKind::Repeat: return "repeat";
    case PhaseKind::Switch: return "switch";
    case PhaseKind::Parallel: return "parallel";
  }
  return "?";
}

/// How a data element travels between functions.
enum class Channel { ObjectStorage, InvocationPayload, Transparent, Reference };

inline const char* channel_name(Channel c) {
  switch (c) {
    case Channel::ObjectStorage: return "object-storage";
    case Channel::InvocationPayload: return "invocation-payload";
    case Channel::Transparent: return "transparent";
    case Channel::Reference: return "reference";
  }
  return "?";
}

/// Single comparison over a payload path, e.g. data.length < 10.
struct Guard {
  std::string variable;
  std::string comparator;  // one of < <= == != >= >
  Payload literal;         // number or string

  bool operator==(const Guard&) const = default;
};

struct SwitchCase {
  Guard guard;
  std::string next;

  bool operator==(const SwitchCase&) const = default;
};

struct Phase {
  std::string name;
  PhaseKind kind = PhaseKind::Task;
  std::optional<std::string> next;  // unset => workflow terminates here

  // task/repeat: funcs has one element; map/loop: per-element chain.
  std::vector<std::string> funcs;
  std::string array_path;  // map/loop
  std::optional<std::string> common_parameters;
  long long count = 0;  // repeat
  std::vector<SwitchCase> cases;
  std::optional<std::string> default_next;
  std::vector<std::vector<std::string>> branches;
  std::optional<std::string> on_failure;  // start of a compensation chain

  bool operator==(const Phase&) const = default;
};

/// Declared data appetite of one serverless function. Data elements are
/// annotated once, on the definition.
struct FunctionSpec {
  std::string name;
  std::set<std::string> reads;
  std::set<std::string> writes;
  std::set<std::string> destroys;
  std::string binding;  // kernel or stub model resolved at run time

  bool operator==(const FunctionSpec&) const = default;
};

struct WorkflowDefinition {
  std::string name;
  std::string root;
  std::vector<Phase> phases;  // document order

  // In-memory companions, attached programmatically (benchmark corpus);
  // not part of the document format.
  std::map<std::string, FunctionSpec> functions;
  std::map<std::string, Channel> data_elements;

  const Phase* find(const std::string& phase_name) const {
    for (const Phase& p : phases)
      if (p.name == phase_name) return &p;
    return nullptr;
  }

  bool operator==(const WorkflowDefinition& o) const {
    return name == o.name && root == o.root && phases == o.phases;
  }
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline const std::set<std::string>& comparators() {
  static const std::set<std::string> ops = {"<", "<=", "==", "!=", ">=", ">"};
  return ops;
}

inline std::string require_string(const Payload& obj, const std::string& key,
                                  const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw SchemaError(where + ": missing required field '" + key + "'");
  if (!it->is_string())
    throw SchemaError(where + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

inline void check_known_fields(const Payload& obj,
                               const std::set<std::string>& known,
                               const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (known.count(it.key())) continue;
    if (it.key() == "and" || it.key() == "or") {
      throw SchemaError(where +
                        ": compound guards are not supported; use a single "
                        "comparison per case");
    }
    throw SchemaError(where + ": unknown field '" + it.key() + "'");
  }
}

inline Phase parse_phase(const std::string& name, const Payload& obj) {
  const std::string where = "phase '" + name + "'";
  if (!obj.is_object()) throw SchemaError(where + ": must be an object");

  Phase phase;
  phase.name = name;
  const std::string type = require_string(obj, "type", where);
  if (type == "task") phase.kind = PhaseKind::Task;
  else if (type == "map") phase.kind = PhaseKind::Map;
  else if (type == "loop") phase.kind = PhaseKind::Loop;
  else if (type == "repeat") phase.kind = PhaseKind::Repeat;
  else if (type == "switch") phase.kind = PhaseKind::Switch;
  else if (type == "parallel") phase.kind = PhaseKind::Parallel;
  else throw SchemaError(where + ": unknown kind '" + type + "'");

  check_known_fields(obj,
                     {"type", "next", "func", "array", "common_parameters",
                      "count", "cases", "default", "branches", "on_failure"},
                     where);

  if (auto it = obj.find("next"); it != obj.end()) {
    if (!it->is_string())
      throw SchemaError(where + ": field 'next' must be a string");
    phase.next = it->get<std::string>();
  }
  if (auto it = obj.find("on_failure"); it != obj.end()) {
    if (!it->is_string())
      throw SchemaError(where + ": field 'on_failure' must be a string");
    phase.on_failure = it->get<std::string>();
  }

  auto read_funcs = [&](bool allow_chain) {
    auto it = obj.find("func");
    if (it == obj.end())
      throw SchemaError(where + ": missing required field 'func'");
    if (it->is_string()) {
      phase.funcs.push_back(it->get<std::string>());
      return;
    }
    if (allow_chain && it->is_array()) {
      for (const Payload& f : *it) {
        if (!f.is_string())
          throw SchemaError(where + ": 'func' chain entries must be strings");
        phase.funcs.push_back(f.get<std::string>());
      }
      if (phase.funcs.empty())
        throw SchemaError(where + ": 'func' chain must not be empty");
      return;
    }
    throw SchemaError(where + ": field 'func' must be a " +
                      std::string(allow_chain ? "string or list of strings"
                                              : "string"));
  };

  switch (phase.kind) {
    case PhaseKind::Task:
      read_funcs(false);
      break;
    case PhaseKind::Map:
    case PhaseKind::Loop: {
      read_funcs(true);
      phase.array_path = require_string(obj, "array", where);
      if (auto it = obj.find("common_parameters"); it != obj.end()) {
        if (!it->is_string())
          throw SchemaError(where +
                            ": field 'common_parameters' must be a string");
        phase.common_parameters = it->get<std::string>();
      }
      break;
    }
    case PhaseKind::Repeat: {
      read_funcs(false);
      auto it = obj.find("count");
      if (it == obj.end())
        throw SchemaError(where + ": missing required field 'count'");
      if (!it->is_number_integer() && !it->is_number_unsigned())
        throw SchemaError(where + ": field 'count' must be an integer");
      phase.count = it->get<long long>();
      break;
    }
    case PhaseKind::Switch: {
      auto it = obj.find("cases");
      if (it == obj.end())
        throw SchemaError(where + ": missing required field 'cases'");
      if (!it->is_array())
        throw SchemaError(where + ": field 'cases' must be a list");
      for (const Payload& c : *it) {
        const std::string cwhere = where + " case";
        if (!c.is_object()) throw SchemaError(cwhere + ": must be an object");
        check_known_fields(c, {"var", "op", "value", "next"}, cwhere);
        SwitchCase sc;
        sc.guard.variable = require_string(c, "var", cwhere);
        sc.guard.comparator = require_string(c, "op", cwhere);
        if (!comparators().count(sc.guard.comparator))
          throw SchemaError(cwhere + ": unknown comparator '" +
                            sc.guard.comparator + "'");
        auto vit = c.find("value");
        if (vit == c.end())
          throw SchemaError(cwhere + ": missing required field 'value'");
        if (!vit->is_number() && !vit->is_string())
          throw SchemaError(cwhere +
                            ": field 'value' must be a number or string");
        sc.guard.literal = *vit;
        if (auto nit = c.find("next"); nit != c.end()) {
          if (!nit->is_string())
            throw SchemaError(cwhere + ": field 'next' must be a string");
          sc.next = nit->get<std::string>();
        }
        phase.cases.push_back(std::move(sc));
      }
      if (auto dit = obj.find("default"); dit != obj.end()) {
        if (!dit->is_string())
          throw SchemaError(where + ": field 'default' must be a string");
        phase.default_next = dit->get<std::string>();
      }
      break;
    }
    case PhaseKind::Parallel: {
      auto it = obj.find("branches");
      if (it == obj.end())
        throw SchemaError(where + ": missing required field 'branches'");
      if (!it->is_array())
        throw SchemaError(where + ": field 'branches' must be a list");
      for (const Payload& b : *it) {
        if (!b.is_array())
          throw SchemaError(where +
                            ": each branch must be a list of phase names");
        std::vector<std::string> branch;
        for (const Payload& n : b) {
          if (!n.is_string())
            throw SchemaError(where + ": branch entries must be phase names");
          branch.push_back(n.get<std::string>());
        }
        phase.branches.push_back(std::move(branch));
      }
      break;
    }
  }
  return phase;
}

}  // namespace detail

/// Parses a workflow definition document (canonical structured text or the
/// indentation-based variant). Phases preserve document order. Throws
/// SyntaxError or SchemaError.
inline WorkflowDefinition parse_definition(const std::string& document) {
  Payload doc = parse_structured_text(document);
  if (!doc.is_object())
    throw SchemaError("definition: top level must be an object");
  detail::check_known_fields(doc, {"name", "root", "phases"}, "definition");

  WorkflowDefinition defn;
  defn.name = detail::require_string(doc, "name", "definition");
  defn.root = detail::require_string(doc, "root", "definition");

  auto it = doc.find("phases");
  if (it == doc.end())
    throw SchemaError("definition: missing required field 'phases'");
  if (!it->is_object())
    throw SchemaError("definition: field 'phases' must be an object");
  for (auto pit = it->begin(); pit != it->end(); ++pit) {
    defn.phases.push_back(detail::parse_phase(pit.key(), pit.value()));
  }
  return defn;
}

/// Renders the canonical structured-text form. parse ∘ serialize ∘ parse is
/// the identity on definition values.
inline Payload definition_to_payload(const WorkflowDefinition& defn) {
  Payload doc = Payload::object();
  doc["name"] = defn.name;
  doc["root"] = defn.root;
  Payload phases = Payload::object();
  for (const Phase& p : defn.phases) {
    Payload obj = Payload::object();
    obj["type"] = phase_kind_name(p.kind);
    switch (p.kind) {
      case PhaseKind::Task:
        obj["func"] = p.funcs.front();
        break;
      case PhaseKind::Map:
      case PhaseKind::Loop:
        if (p.funcs.size() == 1) obj["func"] = p.funcs.front();
        else obj["func"] = p.funcs;
        obj["array"] = p.array_path;
        if (p.common_parameters) obj["common_parameters"] = *p.common_parameters;
        break;
      case PhaseKind::Repeat:
        obj["func"] = p.funcs.front();
        obj["count"] = p.count;
        break;
      case PhaseKind::Switch: {
        Payload cases = Payload::array();
        for (const SwitchCase& c : p.cases) {
          Payload co = Payload::object();
          co["var"] = c.guard.variable;
          co["op"] = c.guard.comparator;
          co["value"] = c.guard.literal;
          co["next"] = c.next;
          cases.push_back(std::move(co));
        }
        obj["cases"] = std::move(cases);
        if (p.default_next) obj["default"] = *p.default_next;
        break;
      }
      case PhaseKind::Parallel:
        obj["branches"] = p.branches;
        break;
    }
    if (p.on_failure) obj["on_failure"] = *p.on_failure;
    if (p.next) obj["next"] = *p.next;
    phases[p.name] = std::move(obj);
  }
  doc["phases"] = std::move(phases);
  return doc;
}

inline std::string serialize_definition(const WorkflowDefinition& defn) {
  return definition_to_payload(defn).dump(2) + "\n";
}

/// Same definition in the indentation-based encoding.
inline std::string serialize_definition_indented(
    const WorkflowDefinition& defn) {
  return emit_yaml_text(definition_to_payload(defn));
}

// ---------------------------------------------------------------------------
// Validation

enum class Severity { Error, Warning };

struct ValidationEntry {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  std::string phase;  // empty when definition-level
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;

  bool ok() const {
    return std::none_of(entries.begin(), entries.end(), [](const auto& e) {
      return e.severity == Severity::Error;
    });
  }
  std::size_t error_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const auto& e) {
          return e.severity == Severity::Error;
        }));
  }
  void error(std::string code, std::string message, std::string phase = "") {
    entries.push_back({Severity::Error, std::move(code), std::move(message),
                       std::move(phase)});
  }
  void warning(std::string code, std::string message, std::string phase = "") {
    entries.push_back({Severity::Warning, std::move(code), std::move(message),
                       std::move(phase)});
  }
};

inline constexpr int kAwsMaxParallelism = 40;
inline constexpr int kGoogleMaxParallelism = 20;

/// Checks every definition invariant and emits platform warnings when a
/// known fan-out exceeds a platform's maximum parallelism. `fanouts` may
/// supply concrete map widths (map width is otherwise data-dependent).
inline ValidationReport validate(
    const WorkflowDefinition& defn,
    const std::map<std::string, long long>& fanouts = {}) {
  ValidationReport report;

  std::set<std::string> names;
  for (const Phase& p : defn.phases) {
    if (!names.insert(p.name).second)
      report.error("DuplicateName", "phase name is not unique", p.name);
  }

  if (!defn.find(defn.root)) {
    report.error("DanglingReference",
                 "root names missing phase '" + defn.root + "'");
  }

  // Phase membership in parallel branches must be unique and internally
  // consistent (the branch list is the chain order).
  std::map<std::string, std::string> branch_owner;
  for (const Phase& p : defn.phases) {
    if (p.kind != PhaseKind::Parallel) continue;
    if (p.branches.empty())
      report.error("NoBranches", "parallel phase has no branches", p.name);
    std::set<std::string> members_here;
    for (const auto& branch : p.branches) {
      if (branch.empty()) {
        report.error("EmptyBranch", "parallel branch is empty", p.name);
        continue;
      }
      for (std::size_t i = 0; i < branch.size(); ++i) {
        const std::string& member = branch[i];
        const Phase* mp = defn.find(member);
        if (!mp) {
          report.error("DanglingReference",
                       "branch references missing phase '" + member + "'",
                       p.name);
          continue;
        }
        if (!members_here.insert(member).second)
          report.error("BranchOverlap",
                       "phase '" + member + "' appears in two branches",
                       p.name);
        if (mp->kind == PhaseKind::Switch)
          report.error("IllegalBranchMember",
                       "switch phases cannot be parallel branch members",
                       p.name);
        if (mp->on_failure)
          report.error("IllegalBranchMember",
                       "branch member phases cannot declare on_failure",
                       p.name);
        auto [it, inserted] = branch_owner.emplace(member, p.name);
        if (!inserted && it->second != p.name)
          report.error("BranchOverlap",
                       "phase '" + member + "' belongs to two parallels",
                       p.name);
        const bool last = i + 1 == branch.size();
        if (last) {
          if (mp->next)
            report.error("BranchChainConflict",
                         "last branch phase '" + member +
                             "' must not set 'next' (the parallel joins)",
                         p.name);
        } else if (mp->next && *mp->next != branch[i + 1]) {
          report.error("BranchChainConflict",
                       "phase '" + member + "' sets next='" + *mp->next +
                           "' but the branch continues with '" +
                           branch[i + 1] + "'",
                       p.name);
        }
      }
    }
  }

  auto check_target = [&](const std::optional<std::string>& target,
                          const Phase& p, const char* field) {
    if (!target) return;
    if (*target == p.name)
      report.error("SelfLoop", std::string(field) + " points to itself",
                   p.name);
    else if (!defn.find(*target))
      report.error("DanglingReference",
                   std::string(field) + " points to missing phase '" +
                       *target + "'",
                   p.name);
    else if (branch_owner.count(*target) &&
             (!branch_owner.count(p.name) ||
              branch_owner.at(p.name) != branch_owner.at(*target)))
      report.error("IllegalBranchEntry",
                   std::string(field) + " enters parallel branch phase '" +
                       *target + "' from outside its parallel",
                   p.name);
  };

  for (const Phase& p : defn.phases) {
    check_target(p.next, p, "next");
    check_target(p.on_failure, p, "on_failure");

    switch (p.kind) {
      case PhaseKind::Map:
      case PhaseKind::Loop:
        if (p.array_path.empty())
          report.error("EmptyArrayPath", "array path must not be empty",
                       p.name);
        break;
      case PhaseKind::Repeat:
        if (p.count < 1)
          report.error("BadCount", "repeat count must be >= 1", p.name);
        break;
      case PhaseKind::Switch: {
        if (p.cases.empty())
          report.error("NoCases", "switch has no cases", p.name);
        for (const SwitchCase& c : p.cases) {
          if (c.next.empty()) {
            report.error("TargetlessCase",
                         "switch case has no target; a case cannot end the "
                         "workflow",
                         p.name);
          } else {
            check_target(c.next, p, "case next");
          }
          if (c.guard.literal.is_string() && c.guard.comparator != "==" &&
              c.guard.comparator != "!=") {
            report.error("InvalidGuard",
                         "string literals only pair with == and !=", p.name);
          }
        }
        check_target(p.default_next, p, "default");
        break;
      }
      default:
        break;
    }
  }

  // Reachability from root across next, case, default, on_failure, and
  // branch edges. Unreachable declared phases are errors.
  std::set<std::string> reached;
  std::vector<std::string> frontier;
  if (defn.find(defn.root)) frontier.push_back(defn.root);
  auto visit = [&](const std::string& n) {
    if (defn.find(n) && reached.insert(n).second) frontier.push_back(n);
  };
  while (!frontier.empty()) {
    std::string current = frontier.back();
    frontier.pop_back();
    reached.insert(current);
    const Phase* p = defn.find(current);
    if (!p) continue;
    if (p->next) visit(*p->next);
    if (p->on_failure) visit(*p->on_failure);
    if (p->default_next) visit(*p->default_next);
    for (const SwitchCase& c : p->cases)
      if (!c.next.empty()) visit(c.next);
    for (const auto& branch : p->branches)
      for (const std::string& member : branch) visit(member);
  }
  for (const Phase& p : defn.phases) {
    if (!reached.count(p.name))
      report.error("Unreachable", "phase is not reachable from root", p.name);
  }

  // Platform fan-out warnings. Parallel width is static; map width comes
  // from the caller when known.
  for (const Phase& p : defn.phases) {
    long long width = 0;
    if (p.kind == PhaseKind::Parallel) {
      width = static_cast<long long>(p.branches.size());
    } else if (p.kind == PhaseKind::Map) {
      auto it = fanouts.find(p.name);
      if (it != fanouts.end()) width = it->second;
    }
    if (width > kAwsMaxParallelism)
      report.warning("ParallelismExceedsPlatform",
                     "fan-out " + std::to_string(width) +
                         " exceeds AWS max parallelism " +
                         std::to_string(kAwsMaxParallelism),
                     p.name);
    if (width > kGoogleMaxParallelism)
      report.warning("ParallelismExceedsPlatform",
                     "fan-out " + std::to_string(width) +
                         " exceeds Google max parallelism " +
                         std::to_string(kGoogleMaxParallelism),
                     p.name);
  }

  // Declared data elements: annotations are per element, and every id a
  // function touches must be declared.
  for (const auto& [fname, spec] : defn.functions) {
    auto check_ids = [&](const std::set<std::string>& ids) {
      for (const std::string& id : ids) {
        if (!defn.data_elements.count(id))
          report.error("UnknownDataElement",
                       "function '" + fname + "' references undeclared data "
                       "element '" + id + "'");
      }
    };
    check_ids(spec.reads);
    check_ids(spec.writes);
    check_ids(spec.destroys);
  }

  return report;
}

/// Phases with unset `next` (and not inside a parallel branch) are the
/// workflow's terminals.
inline std::vector<std::string> terminal_phases(
    const WorkflowDefinition& defn) {
  std::set<std::string> members;
  for (const Phase& p : defn.phases)
    for (const auto& b : p.branches)
      for (const auto& m : b) members.insert(m);
  std::vector<std::string> out;
  for (const Phase& p : defn.phases)
    if (!p.next && !members.count(p.name) && p.kind != PhaseKind::Switch)
      out.push_back(p.name);
  return out;
}

}  // namespace flowbench
