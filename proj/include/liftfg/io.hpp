#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "liftfg/model.hpp"

namespace liftfg {

struct FgFile {
  FactorGraph graph;
  Evidence evidence;
};

namespace detail {

using OrderedJson = nlohmann::ordered_json;

inline const OrderedJson& require(const OrderedJson& obj, const char* key,
                                  const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw std::runtime_error("fg format: " + context + ": missing key '" + key + "'");
  }
  return *it;
}

inline std::string require_string(const OrderedJson& v, const std::string& context) {
  if (!v.is_string()) throw std::runtime_error("fg format: " + context + ": expected a string");
  return v.get<std::string>();
}

}  // namespace detail

/// Parses the canonical factor-graph document. Non-reduced rationals are
/// accepted and canonicalised; everything else follows the written format
/// exactly.
inline FgFile read_fg(const std::string& text) {
  using detail::require;
  using detail::require_string;
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("fg format: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::runtime_error("fg format: top level must be an object");

  FgFile out;
  const auto& rvs = require(doc, "rvs", "top level");
  if (!rvs.is_array()) throw std::runtime_error("fg format: 'rvs' must be an array");
  for (const auto& jrv : rvs) {
    if (!jrv.is_object()) throw std::runtime_error("fg format: rv entries must be objects");
    RandomVariable rv;
    rv.name = require_string(require(jrv, "name", "rv"), "rv name");
    const auto& jrange = require(jrv, "range", "rv '" + rv.name + "'");
    if (!jrange.is_array()) {
      throw std::runtime_error("fg format: rv '" + rv.name + "': 'range' must be an array");
    }
    for (const auto& v : jrange) {
      rv.range.push_back(require_string(v, "rv '" + rv.name + "' range value"));
    }
    if (auto it = jrv.find("evidence"); it != jrv.end()) {
      out.evidence[rv.name] = require_string(*it, "rv '" + rv.name + "' evidence");
    }
    try {
      out.graph.add_rv(std::move(rv));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(std::string("fg format: ") + e.what());
    }
  }

  const auto& factors = require(doc, "factors", "top level");
  if (!factors.is_array()) throw std::runtime_error("fg format: 'factors' must be an array");
  for (const auto& jf : factors) {
    if (!jf.is_object()) throw std::runtime_error("fg format: factor entries must be objects");
    Factor f;
    f.name = require_string(require(jf, "name", "factor"), "factor name");
    const auto& jargs = require(jf, "args", "factor '" + f.name + "'");
    if (!jargs.is_array()) {
      throw std::runtime_error("fg format: factor '" + f.name + "': 'args' must be an array");
    }
    for (const auto& a : jargs) {
      f.args.push_back(require_string(a, "factor '" + f.name + "' argument"));
    }
    const auto& jtable = require(jf, "table", "factor '" + f.name + "'");
    if (!jtable.is_array()) {
      throw std::runtime_error("fg format: factor '" + f.name + "': 'table' must be an array");
    }
    for (const auto& cell : jtable) {
      const auto text_cell = require_string(cell, "factor '" + f.name + "' table entry");
      auto r = Rational::parse(text_cell);
      if (!r) {
        throw std::runtime_error("fg format: factor '" + f.name + "': bad rational '" +
                                 text_cell + "'");
      }
      f.table.push_back(*r);
    }
    try {
      out.graph.add_factor(std::move(f));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(std::string("fg format: ") + e.what());
    }
  }

  try {
    validate_evidence(out.graph, out.evidence);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("fg format: ") + e.what());
  }
  return out;
}

/// Canonical writer: keys in fixed order, rvs and factors in insertion order,
/// reduced rational table entries. write_fg(read_fg(x)) == x on canonical
/// input.
inline std::string write_fg(const FactorGraph& g, const Evidence& evidence = {}) {
  validate_evidence(g, evidence);
  nlohmann::ordered_json doc;
  doc["rvs"] = nlohmann::ordered_json::array();
  for (const auto& rv : g.rvs()) {
    nlohmann::ordered_json jrv;
    jrv["name"] = rv.name;
    jrv["range"] = rv.range;
    if (auto it = evidence.find(rv.name); it != evidence.end()) {
      jrv["evidence"] = it->second;
    }
    doc["rvs"].push_back(std::move(jrv));
  }
  doc["factors"] = nlohmann::ordered_json::array();
  for (const auto& f : g.factors()) {
    nlohmann::ordered_json jf;
    jf["name"] = f.name;
    jf["args"] = f.args;
    auto table = nlohmann::ordered_json::array();
    for (const auto& v : f.table) table.push_back(v.str());
    jf["table"] = std::move(table);
    doc["factors"].push_back(std::move(jf));
  }
  return doc.dump(2) + "\n";
}

inline FgFile load_fg(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_fg(ss.str());
}

inline void save_fg(const std::string& path, const FactorGraph& g, const Evidence& evidence = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << write_fg(g, evidence);
}

}  // namespace liftfg
