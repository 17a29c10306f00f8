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

#include "flowbench/definition.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace flowbench;

TEST_CASE("map phase with common parameters parses as in the listing") {
  const std::string doc = R"({
    "name": "customer_emails",
    "root": "fetch",
    "phases": {
      "fetch": {"type": "task", "func": "fetch_customers",
                "next": "process_names"},
      "process_names": {"type": "map", "func": "short",
                        "array": "customers",
                        "common_parameters": "company",
                        "next": "list_emails"},
      "list_emails": {"type": "task", "func": "list_emails"}
    }
  })";
  WorkflowDefinition defn = parse_definition(doc);
  REQUIRE(defn.phases.size() == 3);
  const Phase* map = defn.find("process_names");
  REQUIRE(map != nullptr);
  CHECK(map->kind == PhaseKind::Map);
  CHECK(map->array_path == "customers");
  CHECK(map->common_parameters == "company");
  CHECK(map->next == "list_emails");
  CHECK(validate(defn).ok());
}

TEST_CASE("single task without next terminates the workflow") {
  WorkflowDefinition defn = parse_definition(
      R"({"name":"one","root":"only","phases":{"only":{"type":"task","func":"f"}}})");
  REQUIRE(defn.phases.size() == 1);
  CHECK_FALSE(defn.phases[0].next.has_value());
  CHECK(terminal_phases(defn) == std::vector<std::string>{"only"});
  CHECK(validate(defn).ok());
}

TEST_CASE("repeat phase carries its count") {
  WorkflowDefinition defn = parse_definition(
      R"({"name":"r","root":"loop10","phases":
          {"loop10":{"type":"repeat","func":"process","count":10}}})");
  const Phase& p = defn.phases.at(0);
  CHECK(p.kind == PhaseKind::Repeat);
  CHECK(p.count == 10);
  CHECK(p.funcs == std::vector<std::string>{"process"});
}

TEST_CASE("phases preserve document order") {
  WorkflowDefinition defn = parse_definition(
      R"({"name":"o","root":"z","phases":{
        "z":{"type":"task","func":"f","next":"a"},
        "a":{"type":"task","func":"g","next":"m"},
        "m":{"type":"task","func":"h"}}})");
  REQUIRE(defn.phases.size() == 3);
  CHECK(defn.phases[0].name == "z");
  CHECK(defn.phases[1].name == "a");
  CHECK(defn.phases[2].name == "m");
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_definition("{\n  \"name\": \"x\",\n  ]\n}");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() >= 1);
  }
}

TEST_CASE("schema errors") {
  SECTION("unknown kind") {
    CHECK_THROWS_AS(parse_definition(R"({"name":"x","root":"p","phases":
        {"p":{"type":"quantum","func":"f"}}})"),
                    SchemaError);
  }
  SECTION("missing required field") {
    CHECK_THROWS_AS(parse_definition(R"({"name":"x","root":"p","phases":
        {"p":{"type":"map","func":"f"}}})"),
                    SchemaError);
  }
  SECTION("wrong field type") {
    CHECK_THROWS_AS(parse_definition(R"({"name":"x","root":"p","phases":
        {"p":{"type":"repeat","func":"f","count":"ten"}}})"),
                    SchemaError);
  }
  SECTION("duplicate default on a switch") {
    const std::string doc = R"({"name":"x","root":"s","phases":{
      "s":{"type":"switch",
           "cases":[{"var":"v","op":"<","value":1,"next":"a"}],
           "default":"a","default":"b"},
      "a":{"type":"task","func":"f"},
      "b":{"type":"task","func":"g"}}})";
    CHECK_THROWS_WITH(parse_definition(doc),
                      Catch::Matchers::ContainsSubstring("duplicate key"));
  }
  SECTION("compound guard gets a dedicated diagnostic") {
    const std::string doc = R"({"name":"x","root":"s","phases":{
      "s":{"type":"switch","cases":[
        {"var":"v","op":"<","value":1,"next":"a",
         "and":{"var":"w","op":">","value":0}}]},
      "a":{"type":"task","func":"f"}}})";
    CHECK_THROWS_WITH(parse_definition(doc),
                      Catch::Matchers::ContainsSubstring("compound guards"));
  }
}

TEST_CASE("indentation-based encoding parses to the same definition") {
  const std::string yaml = R"(name: customer_emails
root: process_names
phases:
  process_names:
    type: map
    func: short
    array: customers
    next: list_emails
  list_emails:
    type: task
    func: list_emails
)";
  WorkflowDefinition from_yaml = parse_definition(yaml);
  WorkflowDefinition from_json = parse_definition(
      serialize_definition(from_yaml));
  CHECK(from_yaml == from_json);
}

TEST_CASE("round trip through both encodings is the identity") {
  WorkflowDefinition defn = testsupport::random_definition(1234);
  for (int i = 0; i < 40; ++i) {
    defn = testsupport::random_definition(7000 + i);
    WorkflowDefinition again = parse_definition(serialize_definition(defn));
    REQUIRE(again == defn);
    WorkflowDefinition via_yaml =
        parse_definition(serialize_definition_indented(defn));
    REQUIRE(via_yaml == defn);
  }
}

TEST_CASE("validate flags dangling references") {
  WorkflowDefinition defn = parse_definition(
      R"({"name":"x","root":"p","phases":
          {"p":{"type":"task","func":"f","next":"foo"}}})");
  ValidationReport report = validate(defn);
  REQUIRE_FALSE(report.ok());
  CHECK(report.entries[0].code == "DanglingReference");
}

TEST_CASE("validate flags self loops and unreachable phases") {
  WorkflowDefinition defn = parse_definition(
      R"({"name":"x","root":"p","phases":{
        "p":{"type":"task","func":"f","next":"p"},
        "island":{"type":"task","func":"g"}}})");
  ValidationReport report = validate(defn);
  bool self_loop = false, unreachable = false;
  for (const auto& e : report.entries) {
    self_loop |= e.code == "SelfLoop";
    unreachable |= e.code == "Unreachable" && e.phase == "island";
  }
  CHECK(self_loop);
  CHECK(unreachable);
}

TEST_CASE("fan-out warnings respect platform maxima") {
  WorkflowDefinition defn = parse_definition(
      R"({"name":"x","root":"m","phases":
          {"m":{"type":"map","func":"f","array":"xs"}}})");
  SECTION("41 exceeds AWS 40 and Google 20") {
    ValidationReport report = validate(defn, {{"m", 41}});
    REQUIRE(report.ok());  // warnings only
    REQUIRE(report.entries.size() == 2);
    CHECK(report.entries[0].message ==
          "fan-out 41 exceeds AWS max parallelism 40");
    CHECK(report.entries[1].message ==
          "fan-out 41 exceeds Google max parallelism 20");
  }
  SECTION("21 exceeds only Google") {
    ValidationReport report = validate(defn, {{"m", 21}});
    REQUIRE(report.entries.size() == 1);
    CHECK(report.entries[0].message ==
          "fan-out 21 exceeds Google max parallelism 20");
  }
  SECTION("unknown width warns on nothing") {
    CHECK(validate(defn).entries.empty());
  }
}

TEST_CASE("switch validation") {
  SECTION("target-less case is rejected") {
    WorkflowDefinition defn = parse_definition(
        R"({"name":"x","root":"s","phases":{
          "s":{"type":"switch","cases":[{"var":"v","op":"<","value":1}]},
          "a":{"type":"task","func":"f"}}})");
    ValidationReport report = validate(defn);
    bool found = false;
    for (const auto& e : report.entries) found |= e.code == "TargetlessCase";
    CHECK(found);
  }
  SECTION("string literal with an ordering comparator is rejected") {
    WorkflowDefinition defn = parse_definition(
        R"({"name":"x","root":"s","phases":{
          "s":{"type":"switch",
               "cases":[{"var":"v","op":"<","value":"abc","next":"a"}],
               "default":"a"},
          "a":{"type":"task","func":"f"}}})");
    ValidationReport report = validate(defn);
    bool found = false;
    for (const auto& e : report.entries) found |= e.code == "InvalidGuard";
    CHECK(found);
  }
}

TEST_CASE("parallel branch rules") {
  SECTION("branches must be disjoint") {
    WorkflowDefinition defn = parse_definition(
        R"({"name":"x","root":"par","phases":{
          "par":{"type":"parallel","branches":[["a"],["a"]]},
          "a":{"type":"task","func":"f"}}})");
    ValidationReport report = validate(defn);
    bool found = false;
    for (const auto& e : report.entries) found |= e.code == "BranchOverlap";
    CHECK(found);
  }
  SECTION("branch chain order wins over stray next fields") {
    WorkflowDefinition defn = parse_definition(
        R"({"name":"x","root":"par","phases":{
          "par":{"type":"parallel","branches":[["a","b"]]},
          "a":{"type":"task","func":"f","next":"par"},
          "b":{"type":"task","func":"g"}}})");
    ValidationReport report = validate(defn);
    bool found = false;
    for (const auto& e : report.entries)
      found |= e.code == "BranchChainConflict";
    CHECK(found);
  }
  SECTION("outside references may not jump into a branch") {
    WorkflowDefinition defn = parse_definition(
        R"({"name":"x","root":"t","phases":{
          "t":{"type":"task","func":"f","next":"b"},
          "par":{"type":"parallel","branches":[["b"]]},
          "b":{"type":"task","func":"g"}}})");
    ValidationReport report = validate(defn);
    bool found = false;
    for (const auto& e : report.entries)
      found |= e.code == "IllegalBranchEntry";
    CHECK(found);
  }
}

TEST_CASE("terminal phases are exactly the phases with unset next") {
  for (int seed = 0; seed < 30; ++seed) {
    WorkflowDefinition defn = testsupport::random_definition(11000 + seed);
    std::set<std::string> members;
    for (const Phase& p : defn.phases)
      for (const auto& b : p.branches)
        for (const auto& m : b) members.insert(m);
    std::set<std::string> expected;
    for (const Phase& p : defn.phases)
      if (!p.next && !members.count(p.name) && p.kind != PhaseKind::Switch)
        expected.insert(p.name);
    auto terminals = terminal_phases(defn);
    std::set<std::string> actual(terminals.begin(), terminals.end());
    REQUIRE(actual == expected);
  }
}
