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

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "flowbench/payload.hpp"

namespace flowbench {

/// Malformed document text. Carries a 1-based source position.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::string message, int line, int column)
      : std::runtime_error("syntax error at line " + std::to_string(line) +
                           ", column " + std::to_string(column) + ": " +
                           std::move(message)),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Well-formed text that does not fit the definition schema.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& message)
      : std::runtime_error(message) {}
};

namespace detail {

inline std::pair<int, int> line_column_at(std::string_view text,
                                          std::size_t byte) {
  int line = 1;
  int column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

// SAX handler that builds an ordered payload and rejects duplicate keys,
// which the DOM parser would silently overwrite.
class StrictJsonBuilder : public nlohmann::json_sax<Payload> {
 public:
  explicit StrictJsonBuilder(std::string_view source) : source_(source) {}

  Payload take() { return std::move(root_); }

  bool null() override { return emplace(Payload(nullptr)); }
  bool boolean(bool v) override { return emplace(Payload(v)); }
  bool number_integer(number_integer_t v) override {
    return emplace(Payload(v));
  }
  bool number_unsigned(number_unsigned_t v) override {
    return emplace(Payload(v));
  }
  bool number_float(number_float_t v, const string_t&) override {
    return emplace(Payload(v));
  }
  bool string(string_t& v) override { return emplace(Payload(v)); }
  bool binary(binary_t&) override { return emplace(Payload(nullptr)); }

  bool start_object(std::size_t) override {
    push(Payload(Payload::value_t::object));
    seen_keys_.emplace_back();
    return true;
  }
  bool key(string_t& k) override {
    if (!seen_keys_.back().insert(k).second) {
      throw SchemaError("duplicate key '" + k + "' in object");
    }
    pending_key_ = k;
    has_key_ = true;
    return true;
  }
  bool end_object() override {
    seen_keys_.pop_back();
    return pop();
  }
  bool start_array(std::size_t) override {
    push(Payload(Payload::value_t::array));
    return true;
  }
  bool end_array() override { return pop(); }

  bool parse_error(std::size_t position, const std::string&,
                   const nlohmann::detail::exception& ex) override {
    auto [line, column] = line_column_at(source_, position ? position - 1 : 0);
    std::string what = ex.what();
    // Strip nlohmann's "[json.exception...]" prefix; keep the reason.
    auto at = what.find("] ");
    if (at != std::string::npos) what = what.substr(at + 2);
    throw SyntaxError(what, line, column);
  }

 private:
  bool emplace(Payload value) {
    if (stack_.empty()) {
      root_ = std::move(value);
      return true;
    }
    Payload& top = *stack_.back();
    if (top.is_array()) {
      top.push_back(std::move(value));
    } else {
      top[pending_key_] = std::move(value);
      has_key_ = false;
    }
    return true;
  }

  void push(Payload container) {
    if (stack_.empty()) {
      root_ = std::move(container);
      stack_.push_back(&root_);
      return;
    }
    Payload& top = *stack_.back();
    if (top.is_array()) {
      top.push_back(std::move(container));
      stack_.push_back(&top.back());
    } else {
      top[pending_key_] = std::move(container);
      stack_.push_back(&top[pending_key_]);
      has_key_ = false;
    }
  }

  bool pop() {
    stack_.pop_back();
    return true;
  }

  std::string_view source_;
  Payload root_;
  std::vector<Payload*> stack_;
  std::vector<std::unordered_set<std::string>> seen_keys_;
  std::string pending_key_;
  bool has_key_ = false;
};

inline Payload yaml_node_to_payload(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
      return Payload(nullptr);
    case YAML::NodeType::Scalar: {
      const std::string& s = node.Scalar();
      if (node.Tag() == "!") return Payload(s);  // quoted scalar stays string
      if (s == "null" || s == "~") return Payload(nullptr);
      if (s == "true") return Payload(true);
      if (s == "false") return Payload(false);
      long long ival = 0;
      auto [ip, iec] = std::from_chars(s.data(), s.data() + s.size(), ival);
      if (iec == std::errc() && ip == s.data() + s.size()) return Payload(ival);
      double dval = 0.0;
      auto [dp, dec] = std::from_chars(s.data(), s.data() + s.size(), dval);
      if (dec == std::errc() && dp == s.data() + s.size()) return Payload(dval);
      return Payload(s);
    }
    case YAML::NodeType::Sequence: {
      Payload arr = Payload::array();
      for (const auto& item : node) arr.push_back(yaml_node_to_payload(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      Payload obj = Payload::object();
      std::unordered_set<std::string> seen;
      for (const auto& kv : node) {
        std::string k = kv.first.as<std::string>();
        if (!seen.insert(k).second) {
          throw SchemaError("duplicate key '" + k + "' in object");
        }
        obj[k] = yaml_node_to_payload(kv.second);
      }
      return obj;
    }
    default:
      return Payload(nullptr);
  }
}

inline bool yaml_scalar_needs_quotes(const std::string& s) {
  if (s.empty()) return true;
  if (s == "true" || s == "false" || s == "null" || s == "~") return true;
  long long ival = 0;
  auto [ip, iec] = std::from_chars(s.data(), s.data() + s.size(), ival);
  if (iec == std::errc() && ip == s.data() + s.size()) return true;
  double dval = 0.0;
  auto [dp, dec] = std::from_chars(s.data(), s.data() + s.size(), dval);
  if (dec == std::errc() && dp == s.data() + s.size()) return true;
  for (char c : s) {
    if (c == ':' || c == '#' || c == '{' || c == '}' || c == '[' ||
        c == ']' || c == ',' || c == '&' || c == '*' || c == '!' ||
        c == '|' || c == '>' || c == '\'' || c == '"' || c == '%' ||
        c == '@' || c == '\n' || c == '\t')
      return true;
  }
  return s.front() == ' ' || s.back() == ' ' || s.front() == '-' ||
         s.front() == '?';
}

inline void emit_yaml_value(const Payload& v, std::string& out, int indent,
                            bool container_inline);

inline void emit_yaml_scalar(const Payload& v, std::string& out) {
  if (v.is_string()) {
    const std::string& s = v.get_ref<const std::string&>();
    if (yaml_scalar_needs_quotes(s)) {
      out += Payload(s).dump();  // JSON string escaping is valid YAML
    } else {
      out += s;
    }
    return;
  }
  out += v.dump();
}

inline void emit_yaml_value(const Payload& v, std::string& out, int indent,
                            bool container_inline) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (v.is_object()) {
    if (v.empty()) {
      out += " {}\n";
      return;
    }
    bool first = true;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (first && container_inline) {
        first = false;
      } else {
        out += pad;
      }
      first = false;
      emit_yaml_scalar(Payload(it.key()), out);
      out += ':';
      const Payload& child = it.value();
      if (child.is_object() || child.is_array()) {
        if (child.empty()) {
          emit_yaml_value(child, out, indent + 2, false);
        } else {
          out += '\n';
          emit_yaml_value(child, out, indent + 2, false);
        }
      } else {
        out += ' ';
        emit_yaml_scalar(child, out);
        out += '\n';
      }
    }
    return;
  }
  if (v.is_array()) {
    if (v.empty()) {
      out += " []\n";
      return;
    }
    bool first = true;
    for (const Payload& item : v) {
      if (first && container_inline) {
        first = false;
      } else {
        out += pad;
      }
      first = false;
      out += "- ";
      if (item.is_object() || item.is_array()) {
        if (item.empty()) {
          emit_yaml_value(item, out, indent + 2, false);
        } else {
          emit_yaml_value(item, out, indent + 2, true);
        }
      } else {
        emit_yaml_scalar(item, out);
        out += '\n';
      }
    }
    return;
  }
  out += pad;
  emit_yaml_scalar(v, out);
  out += '\n';
}

}  // namespace detail

/// Parses structured text into a payload tree. Throws SyntaxError on
/// malformed text and SchemaError on duplicate keys.
inline Payload parse_json_text(std::string_view text) {
  detail::StrictJsonBuilder builder(text);
  Payload::sax_parse(text, &builder);
  return builder.take();
}

/// Parses the indentation-based encoding into the same payload tree.
inline Payload parse_yaml_text(const std::string& text) {
  try {
    YAML::Node node = YAML::Load(text);
    return detail::yaml_node_to_payload(node);
  } catch (const YAML::ParserException& ex) {
    throw SyntaxError(ex.msg, ex.mark.line + 1, ex.mark.column + 1);
  }
}

/// Detects the encoding (canonical structured text vs indentation-based)
/// and parses accordingly.
inline Payload parse_structured_text(const std::string& text) {
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\r' || c == '\t') continue;
    if (c == '{') return parse_json_text(text);
    break;
  }
  return parse_yaml_text(text);
}

/// Renders a payload tree in the indentation-based encoding.
inline std::string emit_yaml_text(const Payload& v) {
  std::string out;
  detail::emit_yaml_value(v, out, 0, false);
  return out;
}

}  // namespace flowbench
