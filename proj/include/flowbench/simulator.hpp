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

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "flowbench/definition.hpp"
#include "flowbench/models.hpp"
#include "flowbench/payload.hpp"
#include "flowbench/rng.hpp"
#include "flowbench/stores.hpp"
#include "flowbench/transcribe.hpp"

namespace flowbench {

class SimError : public std::runtime_error {
 public:
  explicit SimError(const std::string& m) : std::runtime_error(m) {}
};

/// Serialized size of a payload on the wire. Objects may carry synthetic
/// "__blob" byte counts standing in for bulk data that is modeled but not
/// materialized; they add to the wire size wherever they appear.
inline std::uint64_t wire_size(const Payload& p) {
  std::uint64_t extra = 0;
  std::function<void(const Payload&)> walk = [&](const Payload& node) {
    if (node.is_object()) {
      for (auto it = node.begin(); it != node.end(); ++it) {
        if (it.key() == "__blob" && it.value().is_number())
          extra += it.value().get<std::uint64_t>();
        else
          walk(it.value());
      }
    } else if (node.is_array()) {
      for (const Payload& c : node) walk(c);
    }
  };
  walk(p);
  return payload_byte_size(p) + extra;
}

// ---------------------------------------------------------------------------
// Kernel contract

struct StorageOp {
  enum class Kind { Read, Write };
  Kind kind = Kind::Read;
  std::string key;
  std::uint64_t bytes = 0;  // writes: size written; reads: resolved from store
};

struct KernelResult {
  Payload output;
  long long compute_us = 0;
  std::vector<StorageOp> storage_ops;
  std::optional<std::string> failure;
};

struct KernelContext {
  const Payload& input;
  std::string invocation;
  std::string phase;
  long long slot = 0;
  KeyValueStore* kv = nullptr;
  ObjectStore* objects = nullptr;
  Rng rng;
  double suspension_share = 0.0;  // from the model, for noise-probing kernels
};

using Kernel = std::function<KernelResult(KernelContext&)>;
using KernelMap = std::map<std::string, Kernel>;

// ---------------------------------------------------------------------------
// Trace

struct FunctionEvent {
  std::string invocation;
  long long event_id = 0;
  std::string function;
  std::string phase;
  long long slot = 0;
  std::string transition;  // id in the instantiated workflow net
  long long acquired_us = 0;
  long long start_us = 0;
  long long end_us = 0;
  std::string container;
  bool cold = false;
  bool failed = false;
  std::uint64_t payload_in = 0;
  std::uint64_t payload_out = 0;
  std::uint64_t storage_read_bytes = 0;
  std::uint64_t storage_write_bytes = 0;
  long long storage_ops = 0;
};

struct CoordinatorEvent {
  std::string invocation;
  long long event_id = 0;
  std::string phase;  // stage being scheduled
  long long start_us = 0;
  long long end_us = 0;
  long long steps = 0;  // census steps charged at this boundary
};

struct ExecutionTrace {
  std::string invocation;
  std::string definition;
  std::string model;
  long long memory_mb = 256;
  std::vector<FunctionEvent> events;
  std::vector<CoordinatorEvent> coordinators;
  long long total_runtime_us = 0;
  bool failed = false;
  std::string error;
  Payload output;
};

struct SimOptions {
  long long memory_mb = 256;
  std::map<std::string, std::uint64_t> initial_objects;
};

// ---------------------------------------------------------------------------
// Container pool

class ContainerPool {
 public:
  ContainerPool(long long cap, std::uint64_t seed) : cap_(cap), seed_(seed) {}

  struct Grant {
    std::string container;
    bool cold = false;
    long long latency_us = 0;
  };

  std::optional<Grant> try_acquire(const std::string& function,
                                   const PlatformModel& model) {
    auto idle = idle_.find(function);
    if (idle != idle_.end() && !idle->second.empty()) {
      const long long id = *idle->second.begin();
      idle->second.erase(idle->second.begin());
      ++active_;
      return Grant{container_name(id), false, model.warm_start_us};
    }
    if (cap_ == 0 || active_ < cap_) {
      const long long id = next_id_++;
      function_of_[id] = function;
      ++active_;
      Rng rng(mix_seed(seed_, "cold-start", static_cast<std::uint64_t>(id)));
      return Grant{container_name(id), true, model.cold_start.draw(rng)};
    }
    return std::nullopt;
  }

  void release(const std::string& container) {
    const long long id = std::stoll(container.substr(2));
    idle_[function_of_.at(id)].insert(id);
    --active_;
  }

  long long active() const { return active_; }
  long long ever_created() const { return next_id_ - 1; }

  static std::string container_name(long long id) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "c-%06lld", id);
    return buf;
  }

 private:
  long long cap_;  // 0 = unlimited
  std::uint64_t seed_;
  long long active_ = 0;
  long long next_id_ = 1;
  std::map<std::string, std::set<long long>> idle_;
  std::map<long long, std::string> function_of_;
};

// ---------------------------------------------------------------------------
// Engine

namespace simdetail {

struct Lane {
  int inv = 0;
  int flow = 0;
  long long slot = 0;
  std::size_t chain_pos = 0;
  std::vector<std::string> chain;
  Payload input;
  std::string phase_display;
  std::string transition_base;  // transition id before the chain suffix
  long long event_id = 0;
  long long ready_us = 0;
  std::string container;
  long long end_us = 0;
  Payload output;
  bool failed = false;
  std::string fail_msg;
};

struct Stage {
  const Phase* phase = nullptr;
  std::string display;
  long long lanes_total = 0;
  long long lanes_done = 0;
  long long last_end = 0;
  std::vector<Payload> outputs;
  bool failed = false;
  std::string fail_msg;
};

struct Flow {
  int id = 0;
  int inv = 0;
  const Phase* current = nullptr;
  // branch flows walk a member list instead of next pointers
  std::vector<std::string> branch_members;
  std::size_t branch_pos = 0;
  int parent = -1;
  std::size_t branch_index = 0;
  bool compensating = false;
  // repeat/loop iteration state
  long long iter = 0;
  Payload loop_items = Payload::array();
  Payload collected = Payload::array();
  // parallel join state
  long long pending_children = 0;
  std::vector<Payload> child_outputs;
  long long join_time = 0;
  Payload payload;
  Stage stage;
};

struct Invocation {
  int index = 0;
  std::string id;
  ExecutionTrace trace;
  std::vector<Flow> flows;
  long long next_event_id = 0;
  long long completed_events = 0;  // feeds the azure replay growth
  bool dead = false;
  bool done = false;
};

}  // namespace simdetail

/// Deterministic discrete-event platform: one container pool and one pair of
/// stores shared by every invocation that runs through the same Simulation.
class Simulation {
 public:
  Simulation(PlatformModel model, KernelMap kernels, std::uint64_t seed,
             SimOptions options = {})
      : model_(std::move(model)),
        kernels_(std::move(kernels)),
        seed_(seed),
        options_(std::move(options)),
        pool_(model_.container_cap, seed) {
    for (const auto& [key, bytes] : options_.initial_objects)
      objects_.put(key, bytes);
  }

  KeyValueStore& kv() { return kv_; }
  ObjectStore& objects() { return objects_; }
  ContainerPool& pool() { return pool_; }
  const PlatformModel& model() const { return model_; }

  /// Executes `burst_size` invocations that all start at virtual time zero
  /// and share the container pool.
  std::vector<ExecutionTrace> run_burst(const WorkflowDefinition& defn,
                                        const std::vector<Payload>& inputs) {
    if (inputs.empty()) throw SimError("burst needs at least one input");
    check_kernels(defn);
    defn_ = &defn;
    invocations_.clear();
    while (!queue_.empty()) queue_.pop();
    waiting_.clear();
    seq_ = 0;

    for (std::size_t i = 0; i < inputs.size(); ++i) {
      simdetail::Invocation inv;
      inv.index = static_cast<int>(i);
      char buf[16];
      std::snprintf(buf, sizeof buf, "inv-%04zu", i);
      inv.id = buf;
      inv.trace.invocation = inv.id;
      inv.trace.definition = defn.name;
      inv.trace.model = model_.name;
      inv.trace.memory_mb = options_.memory_mb;
      invocations_.push_back(std::move(inv));
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      simdetail::Flow flow;
      flow.id = 0;
      flow.inv = static_cast<int>(i);
      flow.current = defn.find(defn.root);
      flow.payload = inputs[i];
      invocations_[i].flows.push_back(std::move(flow));
      launch_stage(static_cast<int>(i), 0, inputs[i], 0);
    }

    while (!queue_.empty()) {
      QueuedAction action = queue_.top();
      queue_.pop();
      current_time_ = action.t;
      dispatch(action);
    }

    std::vector<ExecutionTrace> traces;
    for (auto& inv : invocations_) {
      finalize(inv);
      traces.push_back(inv.trace);
    }
    return traces;
  }

  ExecutionTrace run(const WorkflowDefinition& defn, const Payload& input) {
    return run_burst(defn, {input}).front();
  }

 private:
  struct QueuedAction {
    long long t = 0;
    long long seq = 0;
    int kind = 0;  // 0 = stage launch, 1 = lane ready, 2 = lane end
    int inv = 0;
    int flow = 0;
    std::shared_ptr<simdetail::Lane> lane;

    bool operator>(const QueuedAction& o) const {
      if (t != o.t) return t > o.t;
      return seq > o.seq;
    }
  };

  void check_kernels(const WorkflowDefinition& defn) const {
    for (const Phase& p : defn.phases)
      for (const auto& f : p.funcs)
        if (!kernels_.count(f))
          throw SimError("no kernel bound for function '" + f + "'");
  }

  void push(QueuedAction action) {
    action.seq = seq_++;
    queue_.push(std::move(action));
  }

  long long stage_steps(const Phase& p, long long width,
                        long long iter) const {
    const long long chain = static_cast<long long>(p.funcs.size());
    switch (model_.shape) {
      case CloudPlatform::Aws:
        switch (p.kind) {
          case PhaseKind::Task: return 1;
          case PhaseKind::Repeat: return 1;  // one unrolled task per stage
          case PhaseKind::Map: return 1 + width * chain;
          case PhaseKind::Loop: return (iter == 0 ? 1 : 0) + chain;
          case PhaseKind::Switch: return 1;
          case PhaseKind::Parallel: return 1;
        }
        break;
      case CloudPlatform::Google:
        switch (p.kind) {
          case PhaseKind::Task: return 2;
          case PhaseKind::Repeat: return 2;
          case PhaseKind::Map: return 4 + width * (2 * chain + 3);
          case PhaseKind::Loop: return (iter == 0 ? 1 : 0) + 2 * chain;
          case PhaseKind::Switch: return 1;
          case PhaseKind::Parallel: return 1;
        }
        break;
      case CloudPlatform::Azure:
        return 1;
    }
    return 1;
  }

  long long coordinator_duration(const simdetail::Invocation& inv,
                                 long long steps,
                                 const Payload& incoming) const {
    long long d = 0;
    if (model_.shape == CloudPlatform::Azure) {
      d = model_.per_transition_us +
          model_.replay_per_event_us * inv.completed_events;
    } else {
      d = model_.per_transition_us * steps;
    }
    const std::uint64_t bytes = wire_size(incoming);
    if (model_.payload_channel_threshold > 0 &&
        bytes > static_cast<std::uint64_t>(model_.payload_channel_threshold)) {
      // return payload too large for the invocation channel: one storage
      // write plus one read on the consuming side
      d += 2 * model_.storage_latency(bytes);
    }
    return d;
  }

  // Emits the coordinator event for a stage of `flow` and schedules its
  // launch. `ready` is the barrier time of the previous stage.
  void launch_stage(int inv_idx, int flow_idx, const Payload& input,
                    long long ready) {
    auto& inv = invocations_[inv_idx];
    auto& flow = inv.flows[flow_idx];
    const Phase& p = *flow.current;

    long long width = 1;
    if (p.kind == PhaseKind::Map || p.kind == PhaseKind::Loop) {
      auto arr = payload_get(input, p.array_path);
      if (!arr || !arr->is_array()) {
        fail_invocation(inv, "phase '" + p.name + "': array path '" +
                                 p.array_path + "' not found in payload");
        return;
      }
      width = static_cast<long long>(arr->size());
      if (p.kind == PhaseKind::Loop) flow.loop_items = *arr;
    }

    std::string display = p.name;
    if (p.kind == PhaseKind::Repeat || p.kind == PhaseKind::Loop)
      display += "#" + std::to_string(flow.iter + 1);

    const long long steps = stage_steps(p, width, flow.iter);
    const long long duration = coordinator_duration(inv, steps, input);

    CoordinatorEvent ce;
    ce.invocation = inv.id;
    ce.event_id = inv.next_event_id++;
    ce.phase = display;
    ce.start_us = ready;
    ce.end_us = ready + duration;
    ce.steps = steps;
    inv.trace.coordinators.push_back(ce);

    QueuedAction action;
    action.t = ce.end_us;
    action.kind = 0;
    action.inv = inv_idx;
    action.flow = flow_idx;
    push(std::move(action));

    flow.payload = input;
    flow.stage = simdetail::Stage{};
    flow.stage.phase = &p;
    flow.stage.display = display;
  }

  void dispatch(const QueuedAction& action) {
    auto& inv = invocations_[action.inv];
    if (inv.dead) {
      if (action.kind == 2) finish_lane(action, /*advance=*/false);
      return;
    }
    switch (action.kind) {
      case 0: stage_launch(action); break;
      case 1: lane_ready(action); break;
      case 2: finish_lane(action, true); break;
    }
  }

  void stage_launch(const QueuedAction& action) {
    auto& inv = invocations_[action.inv];
    auto& flow = inv.flows[action.flow];
    const Phase& p = *flow.current;
    const long long t = current_time_;

    switch (p.kind) {
      case PhaseKind::Switch: {
        // conditional routing: pick the first matching case, else default
        const Phase* target = nullptr;
        for (const SwitchCase& c : p.cases) {
          auto v = payload_get(flow.payload, c.guard.variable);
          if (!v) {
            fail_invocation(inv, "switch '" + p.name + "': guard variable '" +
                                     c.guard.variable +
                                     "' absent from data state");
            return;
          }
          if (eval_guard(c.guard, *v)) {
            target = defn_->find(c.next);
            break;
          }
        }
        if (!target && p.default_next) target = defn_->find(*p.default_next);
        if (!target) {
          fail_invocation(inv, "switch '" + p.name +
                                   "': no case matched and no default set");
          return;
        }
        flow.current = target;
        launch_stage(action.inv, action.flow, flow.payload, t);
        return;
      }
      case PhaseKind::Parallel: {
        flow.pending_children = static_cast<long long>(p.branches.size());
        flow.child_outputs.assign(p.branches.size(), Payload());
        flow.join_time = t;
        for (std::size_t bi = 0; bi < p.branches.size(); ++bi) {
          simdetail::Flow child;
          child.id = static_cast<int>(inv.flows.size());
          child.inv = action.inv;
          child.branch_members = p.branches[bi];
          child.branch_pos = 0;
          child.parent = action.flow;
          child.branch_index = bi;
          child.compensating = flow.compensating;
          child.current = defn_->find(p.branches[bi].front());
          child.payload = flow.payload;
          inv.flows.push_back(std::move(child));
          launch_stage(action.inv, static_cast<int>(inv.flows.size()) - 1,
                       flow.payload, t);
        }
        return;
      }
      case PhaseKind::Map: {
        auto arr = payload_get(flow.payload, p.array_path);
        const long long width = static_cast<long long>(arr->size());
        flow.stage.lanes_total = width;
        flow.stage.outputs.assign(static_cast<std::size_t>(width), Payload());
        flow.stage.last_end = t;
        if (width == 0) {
          Payload out = Payload::object();
          out["results"] = Payload::array();
          advance_flow(action.inv, action.flow, out, t);
          return;
        }
        for (long long slot = 0; slot < width; ++slot) {
          Payload lane_input = Payload::object();
          lane_input["item"] = (*arr)[static_cast<std::size_t>(slot)];
          lane_input["index"] = slot;
          if (p.common_parameters) {
            auto common = payload_get(flow.payload, *p.common_parameters);
            if (common) lane_input["common"] = *common;
          }
          spawn_lane(action.inv, action.flow, slot, p.funcs,
                     flow.stage.display,
                     p.name + ":" + std::to_string(slot + 1),
                     std::move(lane_input), t);
        }
        return;
      }
      case PhaseKind::Loop: {
        flow.stage.lanes_total = 1;
        flow.stage.outputs.assign(1, Payload());
        flow.stage.last_end = t;
        if (flow.loop_items.empty()) {
          Payload out = Payload::object();
          out["results"] = Payload::array();
          advance_flow(action.inv, action.flow, out, t);
          return;
        }
        Payload lane_input = Payload::object();
        lane_input["item"] =
            flow.loop_items[static_cast<std::size_t>(flow.iter)];
        lane_input["index"] = flow.iter;
        spawn_lane(action.inv, action.flow, 0, p.funcs, flow.stage.display,
                   p.name + "#" + std::to_string(flow.iter + 1),
                   std::move(lane_input), t);
        return;
      }
      case PhaseKind::Task:
      case PhaseKind::Repeat: {
        flow.stage.lanes_total = 1;
        flow.stage.outputs.assign(1, Payload());
        flow.stage.last_end = t;
        const std::string transition =
            p.kind == PhaseKind::Repeat
                ? p.name + "#" + std::to_string(flow.iter + 1)
                : p.name;
        spawn_lane(action.inv, action.flow, 0, p.funcs, flow.stage.display,
                   transition, flow.payload, t);
        return;
      }
    }
  }

  void spawn_lane(int inv_idx, int flow_idx, long long slot,
                  const std::vector<std::string>& chain,
                  const std::string& display, const std::string& transition,
                  Payload input, long long ready) {
    auto lane = std::make_shared<simdetail::Lane>();
    lane->inv = inv_idx;
    lane->flow = flow_idx;
    lane->slot = slot;
    lane->chain = chain;
    lane->chain_pos = 0;
    lane->input = std::move(input);
    lane->phase_display = display;
    lane->transition_base = transition;
    lane->ready_us = ready;
    lane->event_id = invocations_[inv_idx].next_event_id++;
    QueuedAction action;
    action.t = ready;
    action.kind = 1;
    action.inv = inv_idx;
    action.flow = flow_idx;
    action.lane = std::move(lane);
    push(std::move(action));
  }

  void lane_ready(const QueuedAction& action) {
    if (!try_grant(action.lane, current_time_)) {
      waiting_.emplace(WaitKey{action.lane->ready_us, action.inv,
                               action.lane->event_id},
                       action.lane);
    }
  }

  bool try_grant(const std::shared_ptr<simdetail::Lane>& lane,
                 long long now) {
    const std::string& function = lane->chain[lane->chain_pos];
    auto grant = pool_.try_acquire(function, model_);
    if (!grant) return false;
    auto& inv = invocations_[lane->inv];

    KernelContext ctx{
        lane->input,
        inv.id,
        lane->phase_display,
        lane->slot,
        &kv_,
        &objects_,
        Rng(mix_seed(seed_, "kernel",
                     static_cast<std::uint64_t>(lane->inv) * 131071 +
                         static_cast<std::uint64_t>(lane->event_id),
                     static_cast<std::uint64_t>(lane->chain_pos))),
        model_.suspension(options_.memory_mb)};
    KernelResult result;
    try {
      result = kernels_.at(function)(ctx);
    } catch (const MissingObject& e) {
      result.failure = e.what();
    } catch (const MissingItem& e) {
      result.failure = e.what();
    }

    long long storage_us = 0;
    std::uint64_t read_bytes = 0, write_bytes = 0;
    for (StorageOp& op : result.storage_ops) {
      if (op.kind == StorageOp::Kind::Read) {
        try {
          op.bytes = objects_.read(op.key);
        } catch (const MissingObject& e) {
          if (!result.failure) result.failure = e.what();
          continue;
        }
        read_bytes += op.bytes;
      } else {
        objects_.put(op.key, op.bytes);
        write_bytes += op.bytes;
      }
      storage_us += model_.storage_latency(op.bytes);
    }

    FunctionEvent ev;
    ev.invocation = inv.id;
    ev.event_id = lane->chain_pos == 0
                      ? lane->event_id
                      : inv.next_event_id++;
    ev.function = function;
    ev.phase = lane->phase_display;
    ev.slot = lane->slot;
    ev.transition = lane->transition_base;
    if (lane->chain.size() > 1)
      ev.transition += "." + std::to_string(lane->chain_pos + 1);
    ev.acquired_us = now;
    ev.start_us = now + grant->latency_us;
    ev.end_us = ev.start_us + result.compute_us + storage_us;
    ev.container = grant->container;
    ev.cold = grant->cold;
    ev.failed = result.failure.has_value();
    ev.payload_in = wire_size(lane->input);
    ev.payload_out = wire_size(result.output);
    ev.storage_read_bytes = read_bytes;
    ev.storage_write_bytes = write_bytes;
    ev.storage_ops = static_cast<long long>(result.storage_ops.size());
    inv.trace.events.push_back(ev);

    lane->container = grant->container;
    lane->end_us = ev.end_us;
    lane->output = std::move(result.output);
    lane->failed = ev.failed;
    if (result.failure) lane->fail_msg = *result.failure;

    QueuedAction end;
    end.t = ev.end_us;
    end.kind = 2;
    end.inv = lane->inv;
    end.flow = lane->flow;
    end.lane = lane;
    push(std::move(end));
    return true;
  }

  void finish_lane(const QueuedAction& action, bool advance) {
    auto lane = action.lane;
    pool_.release(lane->container);
    auto& inv = invocations_[lane->inv];
    inv.completed_events++;

    if (advance && !inv.dead) {
      if (!lane->failed && lane->chain_pos + 1 < lane->chain.size()) {
        lane->chain_pos++;
        lane->input = lane->output;
        lane->ready_us = lane->end_us;
        QueuedAction next;
        next.t = lane->end_us;
        next.kind = 1;
        next.inv = lane->inv;
        next.flow = lane->flow;
        next.lane = lane;
        push(std::move(next));
      } else {
        auto& flow = inv.flows[lane->flow];
        auto& stage = flow.stage;
        stage.outputs[static_cast<std::size_t>(lane->slot)] = lane->output;
        stage.lanes_done++;
        stage.last_end = std::max(stage.last_end, lane->end_us);
        if (lane->failed && !stage.failed) {
          stage.failed = true;
          stage.fail_msg = lane->fail_msg;
        }
        if (stage.lanes_done == stage.lanes_total)
          complete_stage(action.inv, action.flow);
      }
    }
    serve_waiting();
  }

  void complete_stage(int inv_idx, int flow_idx) {
    auto& inv = invocations_[inv_idx];
    auto& flow = inv.flows[flow_idx];
    auto& stage = flow.stage;
    const Phase& p = *stage.phase;
    const long long t = stage.last_end;

    if (stage.failed) {
      if (p.on_failure) {
        if (flow.parent >= 0) {
          fail_invocation(inv, "failure handler inside a parallel branch is "
                               "not supported");
          return;
        }
        const bool was_compensating = flow.compensating;
        flow.compensating = true;
        flow.current = defn_->find(*p.on_failure);
        flow.iter = 0;
        if (was_compensating) {
          fail_invocation(inv, "compensation failed in phase '" + p.name +
                                   "': " + stage.fail_msg);
          return;
        }
        Payload handler_input = flow.payload;
        if (handler_input.is_object()) {
          handler_input["error"] = stage.fail_msg;
          handler_input["failed_phase"] = p.name;
        }
        launch_stage(inv_idx, flow_idx, handler_input, t);
        return;
      }
      fail_invocation(inv, (flow.compensating ? "compensation failed: " : "") +
                               ("phase '" + p.name + "': " + stage.fail_msg));
      return;
    }

    // stage output
    Payload out;
    switch (p.kind) {
      case PhaseKind::Task:
        out = stage.outputs[0];
        break;
      case PhaseKind::Repeat:
        flow.iter++;
        if (flow.iter < p.count) {
          launch_stage(inv_idx, flow_idx, stage.outputs[0], t);
          return;
        }
        out = stage.outputs[0];
        break;
      case PhaseKind::Loop:
        flow.collected.push_back(stage.outputs[0]);
        flow.iter++;
        if (flow.iter < static_cast<long long>(flow.loop_items.size())) {
          launch_stage(inv_idx, flow_idx, flow.payload, t);
          return;
        }
        out = Payload::object();
        out["results"] = flow.collected;
        flow.collected = Payload::array();
        flow.iter = 0;
        break;
      case PhaseKind::Map: {
        out = Payload::object();
        Payload results = Payload::array();
        for (auto& o : stage.outputs) results.push_back(o);
        out["results"] = std::move(results);
        break;
      }
      default:
        out = flow.payload;
        break;
    }
    advance_flow(inv_idx, flow_idx, out, t);
  }

  void advance_flow(int inv_idx, int flow_idx, Payload output, long long t) {
    auto& inv = invocations_[inv_idx];
    auto& flow = inv.flows[flow_idx];
    const Phase& p = *flow.current;
    flow.iter = 0;

    if (flow.parent >= 0) {
      // branch flow: continue along the member list, then join
      if (flow.branch_pos + 1 < flow.branch_members.size()) {
        flow.branch_pos++;
        flow.current = defn_->find(flow.branch_members[flow.branch_pos]);
        launch_stage(inv_idx, flow_idx, output, t);
        return;
      }
      auto& parent = inv.flows[flow.parent];
      parent.child_outputs[flow.branch_index] = std::move(output);
      parent.join_time = std::max(parent.join_time, t);
      if (--parent.pending_children == 0) {
        Payload joined = Payload::object();
        Payload results = Payload::array();
        for (auto& o : parent.child_outputs) results.push_back(o);
        joined["results"] = std::move(results);
        advance_flow(inv_idx, flow.parent, std::move(joined),
                     parent.join_time);
      }
      return;
    }

    if (p.next) {
      flow.current = defn_->find(*p.next);
      launch_stage(inv_idx, flow_idx, std::move(output), t);
      return;
    }
    inv.done = true;
    inv.trace.output = std::move(output);
  }

  void fail_invocation(simdetail::Invocation& inv, const std::string& msg) {
    inv.dead = true;
    inv.trace.failed = true;
    inv.trace.error = msg;
  }

  void finalize(simdetail::Invocation& inv) {
    auto& tr = inv.trace;
    std::stable_sort(tr.events.begin(), tr.events.end(),
                     [](const FunctionEvent& a, const FunctionEvent& b) {
                       if (a.start_us != b.start_us)
                         return a.start_us < b.start_us;
                       return a.event_id < b.event_id;
                     });
    long long first = 0, last = 0;
    bool any = false;
    auto consider = [&](long long s, long long e) {
      if (!any) {
        first = s;
        last = e;
        any = true;
      } else {
        first = std::min(first, s);
        last = std::max(last, e);
      }
    };
    for (const auto& e : tr.events) consider(e.start_us, e.end_us);
    for (const auto& c : tr.coordinators) consider(c.start_us, c.end_us);
    tr.total_runtime_us = any ? last - first : 0;
    if (!inv.done && !inv.dead && !tr.failed) {
      tr.failed = true;
      tr.error = "execution did not reach a terminal phase";
    }
  }

  struct WaitKey {
    long long ready;
    int inv;
    long long event_id;
    bool operator<(const WaitKey& o) const {
      if (ready != o.ready) return ready < o.ready;
      if (inv != o.inv) return inv < o.inv;
      return event_id < o.event_id;
    }
  };

  void serve_waiting() {
    while (!waiting_.empty()) {
      auto it = waiting_.begin();
      if (!try_grant(it->second, current_time_)) break;
      waiting_.erase(it);
    }
  }

  PlatformModel model_;
  KernelMap kernels_;
  std::uint64_t seed_;
  SimOptions options_;
  ContainerPool pool_;
  KeyValueStore kv_;
  ObjectStore objects_;

  const WorkflowDefinition* defn_ = nullptr;
  std::vector<simdetail::Invocation> invocations_;
  std::priority_queue<QueuedAction, std::vector<QueuedAction>,
                      std::greater<QueuedAction>>
      queue_;
  std::map<WaitKey, std::shared_ptr<simdetail::Lane>> waiting_;
  long long seq_ = 0;
  long long current_time_ = 0;

 public:
  // single-shot conveniences matching the operation signatures
  static ExecutionTrace run_once(const WorkflowDefinition& defn,
                                 const Payload& input,
                                 const PlatformModel& model,
                                 const KernelMap& kernels, std::uint64_t seed,
                                 SimOptions options = {}) {
    Simulation sim(model, kernels, seed, std::move(options));
    return sim.run(defn, input);
  }

  static std::vector<ExecutionTrace> run_burst_once(
      const WorkflowDefinition& defn, const std::vector<Payload>& inputs,
      const PlatformModel& model, const KernelMap& kernels,
      std::uint64_t seed, SimOptions options = {}) {
    Simulation sim(model, kernels, seed, std::move(options));
    return sim.run_burst(defn, inputs);
  }
};

}  // namespace flowbench
