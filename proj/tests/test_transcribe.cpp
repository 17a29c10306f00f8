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

#include "flowbench/transcribe.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <fstream>

#include "test_support.hpp"

using namespace flowbench;

namespace {

// Word-count pipeline shape: split -> map(N) -> shuffle -> reduce(M).
WorkflowDefinition wordcount_shape() {
  return parse_definition(R"({
    "name": "wordcount", "root": "split",
    "phases": {
      "split": {"type": "task", "func": "split", "next": "map"},
      "map": {"type": "map", "func": "count_words", "array": "batches",
              "common_parameters": "run", "next": "shuffle"},
      "shuffle": {"type": "task", "func": "shuffle", "next": "reduce"},
      "reduce": {"type": "map", "func": "count_word", "array": "words"}
    }
  })");
}

WorkflowDefinition pipeline_with_compensation() {
  return parse_definition(R"({
    "name": "booking", "root": "reserve_hotel",
    "phases": {
      "reserve_hotel": {"type": "task", "func": "reserve_hotel",
                        "next": "reserve_car", "on_failure": "cancel_none"},
      "reserve_car": {"type": "task", "func": "reserve_car",
                      "next": "reserve_flight", "on_failure": "cancel_hotel_only"},
      "reserve_flight": {"type": "task", "func": "reserve_flight",
                         "next": "confirm", "on_failure": "cancel_car"},
      "confirm": {"type": "task", "func": "confirm",
                  "on_failure": "cancel_flight"},
      "cancel_flight": {"type": "task", "func": "cancel_flight",
                        "next": "cancel_car"},
      "cancel_car": {"type": "task", "func": "cancel_car",
                     "next": "cancel_hotel"},
      "cancel_hotel": {"type": "task", "func": "cancel_hotel"},
      "cancel_hotel_only": {"type": "task", "func": "cancel_hotel"},
      "cancel_none": {"type": "task", "func": "noop"}
    }
  })");
}

// Simple 7-task pipeline (the booking happy path plus its compensations as
// plain phases), used where the exact published counts are pinned.
WorkflowDefinition seven_task_pipeline() {
  return parse_definition(R"({
    "name": "booking7", "root": "t1",
    "phases": {
      "t1": {"type": "task", "func": "f1", "next": "t2"},
      "t2": {"type": "task", "func": "f2", "next": "t3"},
      "t3": {"type": "task", "func": "f3", "next": "t4"},
      "t4": {"type": "task", "func": "f4", "on_failure": "t5"},
      "t5": {"type": "task", "func": "f5", "next": "t6"},
      "t6": {"type": "task", "func": "f6", "next": "t7"},
      "t7": {"type": "task", "func": "f7"}
    }
  })");
}

WorkflowDefinition single_task() {
  return parse_definition(
      R"({"name":"one","root":"t","phases":{"t":{"type":"task","func":"f"}}})");
}

}  // namespace

TEST_CASE("word-count shape reproduces the published transition counts") {
  WorkflowDefinition defn = wordcount_shape();
  ExecutionProfile profile;
  profile.fanouts = {{"map", 3}, {"reduce", 5}};

  PlatformProgram aws = to_aws(defn);
  CHECK(aws.census.transitions_per_execution(profile) == 14);

  PlatformProgram gcp = to_google(defn);
  CHECK(gcp.census.transitions_per_execution(profile) == 54);

  auto [internal, external] = gcp.census.google_internal_external(profile);
  CHECK(internal + external == 54);
  CHECK(external == 10);  // one HTTP call per function execution
}

TEST_CASE("single task programs") {
  WorkflowDefinition defn = single_task();
  SECTION("aws census has one state") {
    PlatformProgram aws = to_aws(defn);
    CHECK(aws.census.state_count == 1);
    CHECK(aws.census.transitions_per_execution({}) == 3);
    CHECK(lint_aws(aws.document()).empty());
  }
  SECTION("google emits a call step plus an assign step") {
    PlatformProgram gcp = to_google(defn);
    CHECK(gcp.census.state_count == 2);
    CHECK(gcp.census.transitions_per_execution({}) == 4);
    CHECK(lint_google(gcp.document()).empty());
  }
}

TEST_CASE("repeat unrolls to chained task states on aws") {
  WorkflowDefinition defn = parse_definition(
      R"({"name":"r","root":"rep","phases":
          {"rep":{"type":"repeat","func":"process","count":10}}})");
  PlatformProgram aws = to_aws(defn);
  Payload doc = parse_json_text(aws.document());
  CHECK(doc["States"].size() == 10);
  CHECK(doc["StartAt"] == "rep#1");
  CHECK(doc["States"]["rep#1"]["Next"] == "rep#2");
  CHECK(doc["States"]["rep#10"]["End"] == true);
  for (auto it = doc["States"].begin(); it != doc["States"].end(); ++it)
    CHECK(it.value()["Type"] == "Task");
  CHECK(lint_aws(aws.document()).empty());
}

TEST_CASE("loop runs as a sequential map on aws and carries the caveat") {
  WorkflowDefinition defn = parse_definition(
      R"({"name":"l","root":"walk","phases":
          {"walk":{"type":"loop","func":"visit","array":"stops"}}})");
  PlatformProgram aws = to_aws(defn);
  Payload doc = parse_json_text(aws.document());
  CHECK(doc["States"]["walk"]["Type"] == "Map");
  CHECK(doc["States"]["walk"]["MaxConcurrency"] == 1);
  REQUIRE_FALSE(aws.census.notes.empty());
  CHECK(aws.census.notes[0].code == "loop-sequential-map");
  CHECK(aws.census.notes[0].message.find("object storage") !=
        std::string::npos);
}

TEST_CASE("map fans out unbounded on aws (the platform caps at 40)") {
  WorkflowDefinition defn = wordcount_shape();
  Payload doc = parse_json_text(to_aws(defn).document());
  CHECK(doc["States"]["map"]["MaxConcurrency"] == 0);
  CHECK(doc["States"]["map"]["ItemsPath"] == "$.payload.batches");
  CHECK(doc["States"]["map"]["Parameters"]["common.$"] == "$.payload.run");
}

TEST_CASE("google map zips the input array with the common parameters") {
  WorkflowDefinition defn = parse_definition(R"({
    "name": "par4", "root": "fan",
    "phases": {
      "fan": {"type": "map", "func": "process", "array": "inputs",
              "common_parameters": "run"}
    }
  })");
  PlatformProgram gcp = to_google(defn);
  Payload doc = parse_structured_text(gcp.document());

  // even a single-function map goes through a generated sub-workflow
  REQUIRE(doc.contains("fan_lane"));
  const Payload& main_steps = doc["main"]["steps"];
  std::vector<std::string> names;
  for (const Payload& s : main_steps)
    names.push_back(s.begin().key());
  CHECK(names == std::vector<std::string>{"fan_zip_init", "fan_zip_loop",
                                          "fan_map", "fan_collect"});
  // the zip loop builds {item, index, common} tuples for lane inputs 0..N-1
  std::string dump = gcp.document();
  CHECK(dump.find("list.concat") != std::string::npos);
  CHECK(dump.find("${v}") != std::string::npos);
  CHECK(dump.find("${i}") != std::string::npos);
  CHECK(lint_google(gcp.document()).empty());

  // per-execution transitions for a width-4 map: 2 + 4 + 4*(2+3) = 26
  ExecutionProfile profile;
  profile.fanouts = {{"fan", 4}};
  CHECK(gcp.census.transitions_per_execution(profile) == 26);

  SECTION("the indentation-based rendering parses back to the same tree") {
    REQUIRE(gcp.files.size() == 2);
    Payload yaml = parse_yaml_text(gcp.files[1].second);
    CHECK(yaml == doc);
  }
}

TEST_CASE("azure payload round-trips through the definition parser") {
  WorkflowDefinition defn = wordcount_shape();
  PlatformProgram az = to_azure(defn);
  Payload payload = parse_json_text(az.document());
  WorkflowDefinition back =
      parse_definition(payload["definition"].dump());
  CHECK(back == defn);
  CHECK(az.census.state_count == 4);
}

TEST_CASE("azure activity manifest lists each function once") {
  SECTION("a mapped function appears once, width resolved at runtime") {
    WorkflowDefinition defn = parse_definition(R"({
      "name": "m", "root": "fan",
      "phases": {"fan": {"type": "map", "func": "process", "array": "xs"}}
    })");
    PlatformProgram az = to_azure(defn);
    Payload manifest = parse_json_text(az.files[1].second);
    REQUIRE(manifest["activities"].size() == 1);
    CHECK(manifest["activities"][0]["name"] == "process");
  }
  SECTION("seven distinct functions give seven activities") {
    PlatformProgram az = to_azure(seven_task_pipeline());
    Payload manifest = parse_json_text(az.files[1].second);
    CHECK(manifest["activities"].size() == 7);
  }
}

TEST_CASE("pipeline with injected failure matches the published counts") {
  WorkflowDefinition defn = seven_task_pipeline();
  ExecutionProfile failing;
  failing.failing_phase = "t4";
  PlatformProgram aws = to_aws(defn);
  PlatformProgram gcp = to_google(defn);
  CHECK(aws.census.transitions_per_execution(failing) == 9);
  CHECK(gcp.census.transitions_per_execution(failing) == 16);

  ExecutionProfile happy;
  CHECK(aws.census.transitions_per_execution(happy) == 6);
  CHECK(gcp.census.transitions_per_execution(happy) == 10);
}

TEST_CASE("on_failure becomes Catch on aws and try/except on google") {
  WorkflowDefinition defn = pipeline_with_compensation();
  Payload aws = parse_json_text(to_aws(defn).document());
  const Payload& confirm = aws["States"]["confirm"];
  REQUIRE(confirm.contains("Catch"));
  CHECK(confirm["Catch"][0]["Next"] == "cancel_flight");
  CHECK(confirm["Catch"][0]["ErrorEquals"][0] == "States.ALL");

  PlatformProgram gcp = to_google(defn);
  CHECK(gcp.document().find("\"try\"") != std::string::npos);
  CHECK(gcp.document().find("\"except\"") != std::string::npos);
  CHECK(lint_google(gcp.document()).empty());
  CHECK(lint_aws(to_aws(defn).document()).empty());
}

TEST_CASE("switch becomes a Choice state with proper comparators") {
  WorkflowDefinition defn = parse_definition(R"({
    "name": "sw", "root": "decide",
    "phases": {
      "decide": {"type": "switch",
                 "cases": [
                   {"var": "data.length", "op": "<", "value": 10, "next": "a"},
                   {"var": "tag", "op": "!=", "value": "skip", "next": "b"}],
                 "default": "b"},
      "a": {"type": "task", "func": "fa"},
      "b": {"type": "task", "func": "fb"}
    }
  })");
  Payload aws = parse_json_text(to_aws(defn).document());
  const Payload& choice = aws["States"]["decide"];
  CHECK(choice["Type"] == "Choice");
  CHECK(choice["Choices"][0]["NumericLessThan"] == 10);
  CHECK(choice["Choices"][0]["Variable"] == "$.payload.data.length");
  CHECK(choice["Choices"][1]["Not"]["StringEquals"] == "skip");
  CHECK(choice["Default"] == "b");

  std::string gcp = to_google(defn).document();
  CHECK(gcp.find("${payload.data.length < 10}") != std::string::npos);

  SECTION("a target-less case cannot be transcribed") {
    WorkflowDefinition bad = parse_definition(R"({
      "name": "sw", "root": "decide",
      "phases": {
        "decide": {"type": "switch",
                   "cases": [{"var": "x", "op": "<", "value": 1}]},
        "a": {"type": "task", "func": "fa"}
      }
    })");
    CHECK_THROWS_AS(to_aws(bad), Untranscribable);
    CHECK_THROWS_AS(to_google(bad), Untranscribable);
  }
}

TEST_CASE("census ranking puts aws below google on the shaped pipelines") {
  for (auto make : {wordcount_shape, seven_task_pipeline, single_task}) {
    WorkflowDefinition defn = make();
    ExecutionProfile profile;
    profile.fanouts = {{"map", 3}, {"reduce", 5}};
    long long aws = 0, google = 0;
    for (auto& [platform, transitions] : census_compare(defn, profile)) {
      if (platform == CloudPlatform::Aws) aws = transitions;
      if (platform == CloudPlatform::Google) google = transitions;
    }
    CHECK(aws < google);
  }
}

TEST_CASE("census is monotone in every fan-out") {
  WorkflowDefinition defn = wordcount_shape();
  PlatformProgram aws = to_aws(defn);
  PlatformProgram gcp = to_google(defn);
  std::mt19937_64 rng(99);
  for (int i = 0; i < 50; ++i) {
    long long n = 1 + static_cast<long long>(rng() % 12);
    long long m = 1 + static_cast<long long>(rng() % 12);
    ExecutionProfile a;
    a.fanouts = {{"map", n}, {"reduce", m}};
    ExecutionProfile b;
    b.fanouts = {{"map", 2 * n}, {"reduce", m}};
    ExecutionProfile c;
    c.fanouts = {{"map", n}, {"reduce", 2 * m}};
    for (PlatformProgram* prog : {&aws, &gcp}) {
      const long long base = prog->census.transitions_per_execution(a);
      CHECK(prog->census.transitions_per_execution(b) >= base);
      CHECK(prog->census.transitions_per_execution(c) >= base);
    }
  }
}

TEST_CASE("golden documents stay pinned") {
  const std::string dir = testsupport::repo_dir() + "/tests/golden/";
  auto read = [&](const std::string& name) {
    std::ifstream in(dir + name);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
  };
  WorkflowDefinition defn = wordcount_shape();
  CHECK(to_aws(defn).document() == read("wordcount_aws.json"));
  PlatformProgram gcp = to_google(defn);
  CHECK(gcp.files[0].second == read("wordcount_google.json"));
  CHECK(gcp.files[1].second == read("wordcount_google.yaml"));
}
