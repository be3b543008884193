#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "liftfg/pfg.hpp"

namespace liftfg {

namespace detail {

/// Grounding keys join multi-logvar constant tuples with ','. Grid-derived
/// constants never contain commas; single-logvar constants are used verbatim.
inline std::string grounding_key(const std::vector<std::string>& constants,
                                 std::size_t logvar_count) {
  if (logvar_count <= 1) return constants.empty() ? std::string() : constants.front();
  std::string key;
  for (std::size_t i = 0; i < constants.size(); ++i) {
    if (i) key += ',';
    key += constants[i];
  }
  return key;
}

inline std::vector<std::string> grounding_constants(const std::string& key,
                                                    std::size_t logvar_count) {
  if (logvar_count == 0) return {};
  if (logvar_count == 1) return {key};
  std::vector<std::string> constants;
  std::size_t start = 0;
  while (true) {
    auto comma = key.find(',', start);
    if (comma == std::string::npos) {
      constants.push_back(key.substr(start));
      break;
    }
    constants.push_back(key.substr(start, comma - start));
    start = comma + 1;
  }
  if (constants.size() != logvar_count) {
    throw std::runtime_error("pfg format: grounding key '" + key + "' does not match " +
                             std::to_string(logvar_count) + " logvars");
  }
  return constants;
}

}  // namespace detail

inline std::string write_pfg(const ParametricFactorGraph& pfg) {
  nlohmann::ordered_json doc;
  doc["logvars"] = nlohmann::ordered_json::array();
  for (const auto& lv : pfg.logvars) {
    nlohmann::ordered_json j;
    j["name"] = lv.name;
    j["domain"] = lv.domain;
    doc["logvars"].push_back(std::move(j));
  }
  doc["prvs"] = nlohmann::ordered_json::array();
  for (const auto& prv : pfg.prvs) {
    nlohmann::ordered_json j;
    j["name"] = prv.name;
    j["logvars"] = prv.logvars;
    j["range"] = prv.range;
    auto grounding = nlohmann::ordered_json::object();
    for (const auto& [constants, rv] : prv.grounding) {
      grounding[detail::grounding_key(constants, prv.logvars.size())] = rv;
    }
    j["grounding"] = std::move(grounding);
    doc["prvs"].push_back(std::move(j));
  }
  doc["parfactors"] = nlohmann::ordered_json::array();
  for (const auto& pf : pfg.parfactors) {
    nlohmann::ordered_json j;
    j["name"] = pf.name;
    auto args = nlohmann::ordered_json::array();
    for (const auto& arg : pf.args) {
      nlohmann::ordered_json ja;
      ja["prv"] = arg.prv;
      ja["binding"] = arg.binding;
      args.push_back(std::move(ja));
    }
    j["args"] = std::move(args);
    auto table = nlohmann::ordered_json::array();
    for (const auto& v : pf.table) table.push_back(v.str());
    j["table"] = std::move(table);
    auto instances = nlohmann::ordered_json::array();
    for (const auto& inst : pf.instances) {
      nlohmann::ordered_json ji;
      ji["bindings"] = nlohmann::ordered_json::object();
      for (const auto& [symbol, value] : inst.bindings) ji["bindings"][symbol] = value;
      ji["source"] = inst.source;
      ji["alpha"] = inst.alpha.str();
      ji["perm"] = inst.perm;
      instances.push_back(std::move(ji));
    }
    j["instances"] = std::move(instances);
    doc["parfactors"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

inline ParametricFactorGraph read_pfg(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("pfg format: invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("logvars") || !doc.contains("prvs") ||
      !doc.contains("parfactors")) {
    throw std::runtime_error("pfg format: expected logvars, prvs and parfactors");
  }
  ParametricFactorGraph pfg;
  for (const auto& j : doc["logvars"]) {
    LogVar lv;
    lv.name = j.at("name").get<std::string>();
    lv.domain = j.at("domain").get<std::vector<std::string>>();
    pfg.logvars.push_back(std::move(lv));
  }
  for (const auto& j : doc["prvs"]) {
    Prv prv;
    prv.name = j.at("name").get<std::string>();
    prv.logvars = j.at("logvars").get<std::vector<std::string>>();
    prv.range = j.at("range").get<std::vector<std::string>>();
    for (const auto& [key, value] : j.at("grounding").items()) {
      prv.grounding.push_back(
          {detail::grounding_constants(key, prv.logvars.size()), value.get<std::string>()});
    }
    std::sort(prv.grounding.begin(), prv.grounding.end());
    pfg.prvs.push_back(std::move(prv));
  }
  for (const auto& j : doc["parfactors"]) {
    Parfactor pf;
    pf.name = j.at("name").get<std::string>();
    for (const auto& ja : j.at("args")) {
      ParfactorArg arg;
      arg.prv = ja.at("prv").get<std::string>();
      arg.binding = ja.at("binding").get<std::vector<std::string>>();
      pf.args.push_back(std::move(arg));
    }
    for (const auto& cell : j.at("table")) {
      auto r = Rational::parse(cell.get<std::string>());
      if (!r || !r->is_positive()) {
        throw std::runtime_error("pfg format: parfactor '" + pf.name + "': bad potential");
      }
      pf.table.push_back(*r);
    }
    for (const auto& ji : j.at("instances")) {
      ParfactorInstance inst;
      for (const auto& [symbol, value] : ji.at("bindings").items()) {
        inst.bindings[symbol] = value.get<std::string>();
      }
      inst.source = ji.at("source").get<std::string>();
      auto alpha = Rational::parse(ji.at("alpha").get<std::string>());
      if (!alpha || !alpha->is_positive()) {
        throw std::runtime_error("pfg format: parfactor '" + pf.name + "': bad alpha");
      }
      inst.alpha = *alpha;
      inst.perm = ji.at("perm").get<std::vector<std::size_t>>();
      pf.instances.push_back(std::move(inst));
    }
    pfg.parfactors.push_back(std::move(pf));
  }
  return pfg;
}

inline ParametricFactorGraph load_pfg(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_pfg(ss.str());
}

inline void save_pfg(const std::string& path, const ParametricFactorGraph& pfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << write_pfg(pfg);
}

}  // namespace liftfg
