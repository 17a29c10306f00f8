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

#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowbench/definition.hpp"
#include "flowbench/payload.hpp"

namespace flowbench {

class NetError : public std::runtime_error {
 public:
  explicit NetError(const std::string& m) : std::runtime_error(m) {}
};
class UnknownTransition : public NetError {
 public:
  explicit UnknownTransition(const std::string& id)
      : NetError("unknown transition '" + id + "'") {}
};
class FanoutMissing : public NetError {
 public:
  explicit FanoutMissing(const std::string& phase)
      : NetError("no fan-out supplied for phase '" + phase + "'") {}
};
class Deadlock : public NetError {
 public:
  explicit Deadlock(const std::string& m) : NetError(m) {}
};
class GuardUnresolvable : public NetError {
 public:
  explicit GuardUnresolvable(const std::string& var)
      : NetError("guard variable '" + var + "' absent from data state") {}
};

enum class TransitionKind { Coordinator, ServerlessFunction };

struct Transition {
  std::string id;
  TransitionKind kind = TransitionKind::ServerlessFunction;
  std::string phase;     // owning phase (iteration phases spelled name#i)
  std::string function;  // functions only
  // Case order for switch routing; lower fires first. -1 for everything
  // that is not a switch alternative.
  int switch_priority = -1;

  bool is_coordinator() const { return kind == TransitionKind::Coordinator; }
};

/// Multiset of tokens by place.
using Marking = std::map<std::string, long long>;

/// Workflow net with data: places, coordinator/function transitions, arcs,
/// data elements with read/write/destroy labels, and guards.
struct WorkflowNet {
  std::string name;
  std::vector<std::string> places;  // includes "start" and "end"
  std::vector<Transition> transitions;
  std::vector<std::pair<std::string, std::string>> arcs;  // (from, to)
  std::map<std::string, Channel> data;
  std::map<std::string, std::set<std::string>> reads;
  std::map<std::string, std::set<std::string>> writes;
  std::map<std::string, std::set<std::string>> destroys;
  std::map<std::string, Guard> guards;

  std::map<std::string, std::vector<std::string>> in_arcs;   // node -> sources
  std::map<std::string, std::vector<std::string>> out_arcs;  // node -> sinks

  const Transition* find_transition(const std::string& id) const {
    for (const Transition& t : transitions)
      if (t.id == id) return &t;
    return nullptr;
  }

  bool has_place(const std::string& id) const {
    for (const auto& p : places)
      if (p == id) return true;
    return false;
  }

  void add_place(const std::string& id) { places.push_back(id); }

  void add_arc(const std::string& from, const std::string& to) {
    arcs.emplace_back(from, to);
    out_arcs[from].push_back(to);
    in_arcs[to].push_back(from);
  }
};

inline std::set<std::string> preset(const WorkflowNet& net,
                                    const std::string& transition) {
  if (!net.find_transition(transition)) throw UnknownTransition(transition);
  auto it = net.in_arcs.find(transition);
  if (it == net.in_arcs.end()) return {};
  return {it->second.begin(), it->second.end()};
}

inline std::set<std::string> postset(const WorkflowNet& net,
                                     const std::string& transition) {
  if (!net.find_transition(transition)) throw UnknownTransition(transition);
  auto it = net.out_arcs.find(transition);
  if (it == net.out_arcs.end()) return {};
  return {it->second.begin(), it->second.end()};
}

// ---------------------------------------------------------------------------
// Construction

namespace netdetail {

// A phase subnet is described by its boundary transitions. Switch phases
// instead expose their routing place (all case alternatives conflict on it).
struct Boundary {
  std::vector<std::string> entries;  // entry transitions
  std::vector<std::string> exits;    // exit transitions
  std::string entry_place;           // switches only
  bool place_entry = false;
};

struct Builder {
  const WorkflowDefinition& defn;
  const std::map<std::string, long long>& fanouts;
  WorkflowNet net;
  std::map<std::string, Boundary> boundary;          // phase -> boundary
  std::map<std::string, std::vector<std::string>> entry_places;
  std::map<std::string, int> incoming_edges;
  int coordinator_seq = 0;

  explicit Builder(const WorkflowDefinition& d,
                   const std::map<std::string, long long>& f)
      : defn(d), fanouts(f) {}

  long long width_of(const Phase& p) const {
    auto it = fanouts.find(p.name);
    if (it == fanouts.end()) throw FanoutMissing(p.name);
    if (it->second < 0) throw FanoutMissing(p.name);
    return it->second;
  }

  void attach_labels(const std::string& tid, const std::string& func) {
    auto it = defn.functions.find(func);
    if (it == defn.functions.end()) return;
    if (!it->second.reads.empty()) net.reads[tid] = it->second.reads;
    if (!it->second.writes.empty()) net.writes[tid] = it->second.writes;
    if (!it->second.destroys.empty()) net.destroys[tid] = it->second.destroys;
  }

  std::string add_function(const std::string& id, const std::string& phase,
                           const std::string& func) {
    Transition t;
    t.id = id;
    t.kind = TransitionKind::ServerlessFunction;
    t.phase = phase;
    t.function = func;
    net.transitions.push_back(t);
    attach_labels(id, func);
    return id;
  }

  std::string add_coordinator(const std::string& id, const std::string& phase,
                              int priority = -1) {
    Transition t;
    t.id = id;
    t.kind = TransitionKind::Coordinator;
    t.phase = phase;
    t.switch_priority = priority;
    net.transitions.push_back(t);
    return id;
  }

  // Sequential chain of function transitions; returns {first, last}.
  std::pair<std::string, std::string> chain(
      const std::string& id_prefix, const std::string& phase_prefix,
      const std::vector<std::string>& funcs, bool iteration_phases) {
    std::string first, prev;
    for (std::size_t i = 0; i < funcs.size(); ++i) {
      std::string id = id_prefix;
      if (funcs.size() > 1) id += "." + std::to_string(i + 1);
      std::string phase = phase_prefix;
      if (iteration_phases) phase += "#" + std::to_string(i + 1);
      add_function(id, phase, funcs[i]);
      if (i == 0) {
        first = id;
      } else {
        std::string p = "p:" + id;
        net.add_place(p);
        net.add_arc(prev, p);
        net.add_arc(p, id);
      }
      prev = id;
    }
    return {first, prev};
  }

  Boundary build_phase(const Phase& p) {
    Boundary b;
    switch (p.kind) {
      case PhaseKind::Task: {
        add_function(p.name, p.name, p.funcs.front());
        b.entries = {p.name};
        b.exits = {p.name};
        break;
      }
      case PhaseKind::Repeat: {
        std::string prev;
        for (long long i = 1; i <= p.count; ++i) {
          std::string id = p.name + "#" + std::to_string(i);
          add_function(id, id, p.funcs.front());
          if (i == 1) {
            b.entries = {id};
          } else {
            std::string place = "p:" + id;
            net.add_place(place);
            net.add_arc(prev, place);
            net.add_arc(place, id);
          }
          prev = id;
        }
        b.exits = {prev};
        break;
      }
      case PhaseKind::Loop: {
        const long long w = width_of(p);
        if (w == 0) {
          std::string id = "c:" + p.name + ":pass";
          add_coordinator(id, p.name);
          b.entries = {id};
          b.exits = {id};
          break;
        }
        std::string prev;
        for (long long i = 1; i <= w; ++i) {
          std::string iter_phase = p.name + "#" + std::to_string(i);
          auto [first, last] =
              chain(iter_phase, iter_phase, p.funcs, false);
          if (i == 1) {
            b.entries = {first};
          } else {
            std::string place = "p:" + iter_phase;
            net.add_place(place);
            net.add_arc(prev, place);
            net.add_arc(place, first);
          }
          prev = last;
        }
        b.exits = {prev};
        break;
      }
      case PhaseKind::Map: {
        const long long w = width_of(p);
        if (w == 0) {
          std::string id = "c:" + p.name + ":pass";
          add_coordinator(id, p.name);
          b.entries = {id};
          b.exits = {id};
          break;
        }
        for (long long lane = 1; lane <= w; ++lane) {
          auto [first, last] = chain(p.name + ":" + std::to_string(lane),
                                     p.name, p.funcs, false);
          b.entries.push_back(first);
          b.exits.push_back(last);
        }
        break;
      }
      case PhaseKind::Parallel: {
        // Branch heads keep their own entry places; the enclosing wiring
        // treats their union as this phase's entry.
        for (std::size_t bi = 0; bi < p.branches.size(); ++bi) {
          const auto& branch = p.branches[bi];
          std::vector<std::string> prev_exits;
          for (std::size_t mi = 0; mi < branch.size(); ++mi) {
            const Phase* member = defn.find(branch[mi]);
            Boundary mb = build_phase(*member);
            make_entry_places(member->name, mb);
            if (mi > 0) connect(prev_exits, member->name, /*sole_edge=*/true);
            prev_exits = mb.exits;
          }
          for (const auto& x : prev_exits) b.exits.push_back(x);
        }
        break;
      }
      case PhaseKind::Switch: {
        b.place_entry = true;
        b.entry_place = "p:" + p.name;
        net.add_place(b.entry_place);
        int priority = 0;
        for (std::size_t i = 0; i < p.cases.size(); ++i) {
          std::string id = "c:" + p.name + ":case" + std::to_string(i + 1);
          add_coordinator(id, p.name, priority++);
          net.guards[id] = p.cases[i].guard;
          net.add_arc(b.entry_place, id);
          b.exits.push_back(id);
        }
        if (p.default_next) {
          std::string id = "c:" + p.name + ":default";
          add_coordinator(id, p.name, priority);
          net.add_arc(b.entry_place, id);
          b.exits.push_back(id);
        }
        break;
      }
    }
    return b;
  }

  // Creates the canonical entry places (q -> entry transition) of a phase.
  // Every incoming edge delivers tokens into these places.
  void make_entry_places(const std::string& phase, const Boundary& b) {
    boundary[phase] = b;
    if (b.place_entry) {
      entry_places[phase] = {b.entry_place};
      return;
    }
    std::vector<std::string> qs;
    for (std::size_t j = 0; j < b.entries.size(); ++j) {
      std::string q = "q:" + phase;
      if (b.entries.size() > 1) q += ":" + std::to_string(j + 1);
      net.add_place(q);
      net.add_arc(q, b.entries[j]);
      qs.push_back(q);
    }
    entry_places[phase] = qs;
  }

  // Connects source exit transitions to a target phase's entry places,
  // eliding the coordinator whenever control flow is preserved without it:
  // a single exit transition splits by itself, and a single entry
  // transition joins by itself (when no other edge converges there).
  void connect(const std::vector<std::string>& exits,
               const std::string& target, bool sole_edge) {
    const auto& targets = entry_places.at(target);
    if (exits.size() == 1) {
      for (const auto& q : targets) net.add_arc(exits.front(), q);
      return;
    }
    if (targets.size() == 1 && sole_edge &&
        net.out_arcs.at(targets.front()).size() == 1) {
      const std::string& q = targets.front();
      const std::string entry = net.out_arcs.at(q).front();
      for (std::size_t i = 0; i < exits.size(); ++i) {
        if (i == 0) {
          net.add_arc(exits[i], q);
        } else {
          std::string extra = q + ":j" + std::to_string(i + 1);
          net.add_place(extra);
          net.add_arc(exits[i], extra);
          net.add_arc(extra, entry);
        }
      }
      return;
    }
    std::string cid = "c:" + std::to_string(++coordinator_seq) + ":" + target;
    add_coordinator(cid, target);
    join_into(exits, cid);
    for (const auto& q : targets) net.add_arc(cid, q);
  }

  // exits -> (one place each) -> transition
  void join_into(const std::vector<std::string>& exits,
                 const std::string& transition) {
    for (std::size_t i = 0; i < exits.size(); ++i) {
      std::string r = "p:" + transition + ":" + std::to_string(i + 1);
      net.add_place(r);
      net.add_arc(exits[i], r);
      net.add_arc(r, transition);
    }
  }

  // Exclusive post-phase choice between the normal continuation and the
  // failure handler, resolved by the reserved __error.<phase> element.
  void connect_with_failure_route(const Phase& p,
                                  const std::vector<std::string>& exits) {
    std::string choice = "p:" + p.name + ":out";
    net.add_place(choice);
    if (exits.size() == 1) {
      net.add_arc(exits.front(), choice);
    } else {
      std::string cid = "c:" + p.name + ":join";
      add_coordinator(cid, p.name);
      join_into(exits, cid);
      net.add_arc(cid, choice);
    }
    auto guarded = [&](const char* tag, int raised) {
      std::string cid = "c:" + p.name + ":" + tag;
      add_coordinator(cid, p.name);
      Guard g;
      g.variable = "__error." + p.name;
      g.comparator = "==";
      g.literal = Payload(raised);
      net.guards[cid] = g;
      net.add_arc(choice, cid);
      return cid;
    };
    std::string ok = guarded("ok", 0);
    if (p.next) {
      for (const auto& q : entry_places.at(*p.next)) net.add_arc(ok, q);
    } else {
      net.add_arc(ok, "end");
    }
    std::string fail = guarded("fail", 1);
    for (const auto& q : entry_places.at(*p.on_failure))
      net.add_arc(fail, q);
  }

  void connect_to_end(const std::vector<std::string>& exits,
                      const std::string& phase) {
    if (exits.size() == 1) {
      net.add_arc(exits.front(), "end");
      return;
    }
    std::string cid = "c:" + phase + ":end";
    add_coordinator(cid, phase);
    join_into(exits, cid);
    net.add_arc(cid, "end");
  }
};

}  // namespace netdetail

/// Instantiates the workflow net for concrete map/loop widths. Coordinators
/// are inserted between phases only where a function transition cannot take
/// over the AND-join/split itself; the run is always opened by c0.
inline WorkflowNet build_net(const WorkflowDefinition& defn,
                             const std::map<std::string, long long>& fanouts) {
  netdetail::Builder builder(defn, fanouts);
  WorkflowNet& net = builder.net;
  net.name = defn.name;
  net.data = defn.data_elements;
  net.add_place("start");
  net.add_place("end");

  // Membership: phases inside parallel branches are built by their parallel.
  std::set<std::string> members;
  for (const Phase& p : defn.phases)
    for (const auto& b : p.branches)
      for (const auto& m : b) members.insert(m);

  // Count incoming edges per target (next, switch cases, default, failure).
  for (const Phase& p : defn.phases) {
    if (members.count(p.name)) continue;
    if (p.next) builder.incoming_edges[*p.next]++;
    if (p.on_failure) builder.incoming_edges[*p.on_failure]++;
    if (p.default_next) builder.incoming_edges[*p.default_next]++;
    for (const auto& c : p.cases) builder.incoming_edges[c.next]++;
  }

  // Build all top-level phase subnets and their entry places.
  for (const Phase& p : defn.phases) {
    if (members.count(p.name)) continue;
    netdetail::Boundary b = builder.build_phase(p);
    if (p.kind == PhaseKind::Parallel) {
      // Branch heads already own entry places; the parallel's entry places
      // are their union, in branch order.
      builder.boundary[p.name] = b;
      std::vector<std::string> qs;
      for (const auto& branch : p.branches)
        for (const auto& q : builder.entry_places.at(branch.front()))
          qs.push_back(q);
      builder.entry_places[p.name] = qs;
    } else {
      builder.make_entry_places(p.name, b);
    }
  }

  // Initial coordinator.
  builder.add_coordinator("c0", defn.root);
  net.add_arc("start", "c0");
  for (const auto& q : builder.entry_places.at(defn.root))
    net.add_arc("c0", q);

  // Wire edges.
  for (const Phase& p : defn.phases) {
    if (members.count(p.name)) continue;
    const auto& exits = builder.boundary.at(p.name).exits;
    if (p.kind == PhaseKind::Switch) {
      for (std::size_t i = 0; i < p.cases.size(); ++i) {
        builder.connect({exits[i]}, p.cases[i].next,
                        builder.incoming_edges[p.cases[i].next] == 1);
      }
      if (p.default_next) {
        builder.connect({exits.back()}, *p.default_next,
                        builder.incoming_edges[*p.default_next] == 1);
      }
      continue;
    }
    if (p.on_failure) {
      builder.connect_with_failure_route(p, exits);
      continue;
    }
    if (p.next) {
      builder.connect(exits, *p.next, builder.incoming_edges[*p.next] == 1);
    } else {
      builder.connect_to_end(exits, p.name);
    }
  }

  // Data elements read but never written are credited to the workflow input,
  // modeled as writes of the initial coordinator.
  std::set<std::string> written;
  for (const auto& [t, ds] : net.writes) written.insert(ds.begin(), ds.end());
  for (const auto& [t, ds] : net.reads)
    for (const auto& d : ds)
      if (!written.count(d)) net.writes["c0"].insert(d);

  return net;
}

// ---------------------------------------------------------------------------
// Structural checks

struct StructuralReport {
  bool unique_source = false;
  bool unique_sink = false;
  bool connected = false;
  std::vector<std::string> sources;
  std::vector<std::string> sinks;
  std::vector<std::string> disconnected;  // nodes off every source->sink path
  std::vector<std::string> read_after_destroy;

  bool ok() const {
    return unique_source && unique_sink && connected &&
           read_after_destroy.empty();
  }
};

/// Workflow-net properties: one source, one sink, every node on a path from
/// source to sink; plus the data-safety check that no path reads a destroyed
/// element before it is rewritten.
inline StructuralReport check_workflow_net(const WorkflowNet& net) {
  StructuralReport report;
  for (const auto& p : net.places) {
    const bool no_in = !net.in_arcs.count(p) || net.in_arcs.at(p).empty();
    const bool no_out = !net.out_arcs.count(p) || net.out_arcs.at(p).empty();
    if (no_in) report.sources.push_back(p);
    if (no_out) report.sinks.push_back(p);
  }
  report.unique_source =
      report.sources.size() == 1 && report.sources.front() == "start";
  report.unique_sink =
      report.sinks.size() == 1 && report.sinks.front() == "end";

  auto reach = [&](const std::string& from,
                   const std::map<std::string, std::vector<std::string>>& adj) {
    std::set<std::string> seen{from};
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
      std::string n = stack.back();
      stack.pop_back();
      auto it = adj.find(n);
      if (it == adj.end()) continue;
      for (const auto& m : it->second)
        if (seen.insert(m).second) stack.push_back(m);
    }
    return seen;
  };
  std::set<std::string> forward = reach("start", net.out_arcs);
  std::set<std::string> backward = reach("end", net.in_arcs);
  report.connected = true;
  auto check_node = [&](const std::string& n) {
    if (!forward.count(n) || !backward.count(n)) {
      report.connected = false;
      report.disconnected.push_back(n);
    }
  };
  for (const auto& p : net.places) check_node(p);
  for (const auto& t : net.transitions) check_node(t.id);

  // No read-after-destroy on any path.
  for (const auto& [tid, ds] : net.destroys) {
    for (const auto& d : ds) {
      std::set<std::string> seen;
      std::vector<std::string> stack;
      auto push_succ = [&](const std::string& node) {
        auto it = net.out_arcs.find(node);
        if (it == net.out_arcs.end()) return;
        for (const auto& m : it->second)
          if (seen.insert(m).second) stack.push_back(m);
      };
      push_succ(tid);
      while (!stack.empty()) {
        std::string n = stack.back();
        stack.pop_back();
        const Transition* t = net.find_transition(n);
        if (t) {
          auto w = net.writes.find(n);
          if (w != net.writes.end() && w->second.count(d)) continue;  // healed
          auto r = net.reads.find(n);
          if (r != net.reads.end() && r->second.count(d)) {
            report.read_after_destroy.push_back(tid + " destroys '" + d +
                                                "' read by " + n);
            continue;
          }
        }
        push_succ(n);
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Token game

struct FiringPolicy {
  // Phases whose reserved __error element is raised (failure injection).
  std::set<std::string> failed_phases;
};

struct FiringSequence {
  std::vector<std::string> fired;
  Marking final_marking;
  bool complete = false;  // exactly one token, on "end"
};

inline bool eval_guard(const Guard& g, const Payload& value) {
  if (g.literal.is_string()) {
    if (!value.is_string()) return false;
    const auto& a = value.get_ref<const std::string&>();
    const auto& b = g.literal.get_ref<const std::string&>();
    return g.comparator == "==" ? a == b : a != b;
  }
  if (!value.is_number()) return false;
  const double a = value.get<double>();
  const double b = g.literal.get<double>();
  if (g.comparator == "<") return a < b;
  if (g.comparator == "<=") return a <= b;
  if (g.comparator == "==") return a == b;
  if (g.comparator == "!=") return a != b;
  if (g.comparator == ">=") return a >= b;
  return a > b;
}

/// Deterministic token game: per step, the enabled transitions fire in
/// (switch priority, id) order with re-checks, so case order and the
/// default alternative behave like an ordered switch. A run is complete
/// iff it ends with exactly one token on "end".
inline FiringSequence token_game(const WorkflowNet& net, const Payload& input,
                                 const FiringPolicy& policy = {}) {
  FiringSequence seq;
  Marking marking;
  marking["start"] = 1;

  auto guard_value = [&](const Guard& g) -> Payload {
    if (g.variable.rfind("__error.", 0) == 0) {
      const std::string phase = g.variable.substr(8);
      return Payload(policy.failed_phases.count(phase) ? 1 : 0);
    }
    auto v = payload_get(input, g.variable);
    if (!v) throw GuardUnresolvable(g.variable);
    return *v;
  };

  auto token_enabled = [&](const Transition& t) {
    auto it = net.in_arcs.find(t.id);
    if (it == net.in_arcs.end() || it->second.empty()) return false;
    for (const auto& p : it->second) {
      auto m = marking.find(p);
      if (m == marking.end() || m->second < 1) return false;
    }
    return true;
  };
  auto guard_open = [&](const Transition& t) {
    auto g = net.guards.find(t.id);
    if (g == net.guards.end()) return true;
    return eval_guard(g->second, guard_value(g->second));
  };

  // Stable firing order: switch alternatives by case order first, then ids.
  std::vector<const Transition*> order;
  for (const Transition& t : net.transitions) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) {
    const int pa = a->switch_priority < 0 ? std::numeric_limits<int>::max()
                                          : a->switch_priority;
    const int pb = b->switch_priority < 0 ? std::numeric_limits<int>::max()
                                          : b->switch_priority;
    if (pa != pb) return pa < pb;
    return a->id < b->id;
  });

  const std::size_t step_limit =
      64 + 64 * net.transitions.size() * (net.places.size() + 1);
  std::size_t steps = 0;
  while (true) {
    bool fired_any = false;
    for (const Transition* t : order) {
      if (!token_enabled(*t)) continue;
      if (!guard_open(*t)) continue;
      for (const auto& p : net.in_arcs.at(t->id)) marking[p] -= 1;
      for (const auto& p : net.out_arcs.at(t->id)) marking[p] += 1;
      seq.fired.push_back(t->id);
      fired_any = true;
      if (++steps > step_limit)
        throw Deadlock("step limit exceeded (cyclic definition?)");
    }
    if (!fired_any) break;
  }

  for (auto it = marking.begin(); it != marking.end();) {
    if (it->second == 0) it = marking.erase(it);
    else ++it;
  }
  seq.final_marking = marking;
  seq.complete = marking.size() == 1 && marking.count("end") &&
                 marking.at("end") == 1;
  if (!seq.complete) {
    std::ostringstream oss;
    oss << "no enabled transition and end not reached; marked places:";
    for (const auto& [p, n] : marking) oss << " " << p << "=" << n;
    throw Deadlock(oss.str());
  }
  return seq;
}

/// Checks that an observed transition order is a firing sequence of the net
/// ending with one token on "end". Guards are not re-evaluated; token flow
/// decides validity.
inline bool replay_firing_sequence(const WorkflowNet& net,
                                   const std::vector<std::string>& order,
                                   std::string* diagnostic = nullptr) {
  Marking marking;
  marking["start"] = 1;
  for (const auto& id : order) {
    const Transition* t = net.find_transition(id);
    if (!t) {
      if (diagnostic) *diagnostic = "unknown transition " + id;
      return false;
    }
    auto in = net.in_arcs.find(id);
    if (in == net.in_arcs.end()) {
      if (diagnostic) *diagnostic = id + " has no preset";
      return false;
    }
    for (const auto& p : in->second) {
      if (marking[p] < 1) {
        if (diagnostic) *diagnostic = id + " not enabled (place " + p + ")";
        return false;
      }
    }
    for (const auto& p : in->second) marking[p] -= 1;
    for (const auto& p : net.out_arcs.at(id)) marking[p] += 1;
  }
  for (const auto& [p, n] : marking) {
    if (n == 0) continue;
    if (p != "end" || n != 1) {
      if (diagnostic)
        *diagnostic = "final marking not {end:1}: " + p + "=" +
                      std::to_string(n);
      return false;
    }
  }
  if (!marking.count("end") || marking.at("end") != 1) {
    if (diagnostic) *diagnostic = "end not marked";
    return false;
  }
  return true;
}

/// Line-oriented export for external visualization (one node/arc per line).
inline std::string export_net(const WorkflowNet& net) {
  std::ostringstream out;
  out << "net " << net.name << "\n";
  for (const auto& p : net.places) {
    out << "place " << p;
    if (p == "start") out << " start";
    if (p == "end") out << " end";
    out << "\n";
  }
  for (const auto& t : net.transitions) {
    out << "transition " << t.id << " "
        << (t.is_coordinator() ? "coordinator" : "function");
    if (!t.phase.empty()) out << " phase=" << t.phase;
    if (!t.function.empty()) out << " func=" << t.function;
    auto g = net.guards.find(t.id);
    if (g != net.guards.end())
      out << " guard=" << g->second.variable << g->second.comparator
          << g->second.literal.dump();
    out << "\n";
  }
  for (const auto& [from, to] : net.arcs) out << "arc " << from << " " << to
                                              << "\n";
  for (const auto& [d, ch] : net.data)
    out << "data " << d << " channel=" << channel_name(ch) << "\n";
  for (const auto& [t, ds] : net.reads)
    for (const auto& d : ds) out << "read " << t << " " << d << "\n";
  for (const auto& [t, ds] : net.writes)
    for (const auto& d : ds) out << "write " << t << " " << d << "\n";
  for (const auto& [t, ds] : net.destroys)
    for (const auto& d : ds) out << "destroy " << t << " " << d << "\n";
  return out.str();
}

/// Widths for every map/loop phase resolved from a concrete input payload,
/// plus counts for repeats (their width is static).
inline std::map<std::string, long long> resolve_fanouts(
    const WorkflowDefinition& defn, const Payload& input) {
  std::map<std::string, long long> fanouts;
  for (const Phase& p : defn.phases) {
    if (p.kind == PhaseKind::Map || p.kind == PhaseKind::Loop) {
      auto v = payload_get(input, p.array_path);
      if (v && v->is_array())
        fanouts[p.name] = static_cast<long long>(v->size());
    } else if (p.kind == PhaseKind::Repeat) {
      fanouts[p.name] = p.count;
    }
  }
  return fanouts;
}

}  // namespace flowbench
