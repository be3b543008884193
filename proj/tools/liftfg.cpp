// liftfg: compress propositional factor graphs into parametric ones and
// answer queries on either representation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "liftfg/bench.hpp"
#include "liftfg/colour_passing.hpp"
#include "liftfg/generate.hpp"
#include "liftfg/inference.hpp"
#include "liftfg/io.hpp"
#include "liftfg/pfg.hpp"
#include "liftfg/pfg_io.hpp"

namespace {

using nlohmann::ordered_json;

struct FactorRef {
  std::string path;
  std::string factor;
};

FactorRef parse_factor_ref(const std::string& spec) {
  const auto hash = spec.rfind('#');
  if (hash == std::string::npos || hash == 0 || hash + 1 == spec.size()) {
    throw std::runtime_error("expected <file>#<factor>, got '" + spec + "'");
  }
  return {spec.substr(0, hash), spec.substr(hash + 1)};
}

liftfg::Evidence parse_evidence_list(const std::string& text) {
  liftfg::Evidence out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const auto item = text.substr(start, comma - start);
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw std::runtime_error("expected rv=value in evidence, got '" + item + "'");
    }
    out[item.substr(0, eq)] = item.substr(eq + 1);
    start = comma + 1;
  }
  return out;
}

liftfg::Evidence load_evidence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  ordered_json doc;
  in >> doc;
  if (!doc.is_object()) throw std::runtime_error("evidence file must be a JSON object");
  liftfg::Evidence out;
  for (const auto& [rv, value] : doc.items()) {
    if (!value.is_string()) throw std::runtime_error("evidence values must be strings");
    out[rv] = value.get<std::string>();
  }
  return out;
}

bool is_pfg_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  ordered_json doc;
  in >> doc;
  return doc.is_object() && doc.contains("parfactors");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    if (comma > start) out.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

int run_check(const std::string& phi1_spec, const std::string& phi2_spec,
              const std::string& epsilon_text) {
  const auto ref1 = parse_factor_ref(phi1_spec);
  const auto ref2 = parse_factor_ref(phi2_spec);
  const auto file1 = liftfg::load_fg(ref1.path);
  const auto file2 = ref2.path == ref1.path ? file1 : liftfg::load_fg(ref2.path);
  const auto phi1 = liftfg::resolve(file1.graph, ref1.factor);
  const auto phi2 = liftfg::resolve(file2.graph, ref2.factor);

  ordered_json out;
  if (!epsilon_text.empty()) {
    const auto epsilon = liftfg::Rational::parse(epsilon_text);
    if (!epsilon) throw std::runtime_error("bad epsilon '" + epsilon_text + "'");
    out["exchangeable"] = liftfg::approx_collinear(phi1.table, phi2.table, *epsilon);
    out["epsilon"] = epsilon->str();
  } else if (const auto w = liftfg::detect_exchangeable(phi1, phi2)) {
    out["exchangeable"] = true;
    out["alpha"] = w->alpha.str();
    out["permutation"] = w->perm;
  } else {
    out["exchangeable"] = false;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_compress(const std::string& in_path, const std::string& out_path,
                 const std::string& mode_text, const std::string& evidence_path) {
  const auto file = liftfg::load_fg(in_path);
  liftfg::Evidence evidence = file.evidence;
  if (!evidence_path.empty()) {
    for (const auto& [rv, value] : load_evidence_file(evidence_path)) evidence[rv] = value;
  }
  const auto mode = mode_text == "acp" ? liftfg::CpMode::Acp : liftfg::CpMode::AlphaAcp;
  const auto partition = liftfg::run_colour_passing(file.graph, evidence, mode);
  const auto pfg = liftfg::construct_pfg(file.graph, partition);
  liftfg::save_pfg(out_path, pfg);
  std::cout << "groups: rv=" << partition.rv_groups.size()
            << " factor=" << partition.factor_groups.size() << "\n";
  return 0;
}

int run_query(const std::string& model_path, const std::string& term_spec,
              const std::string& evidence_list, const std::string& engine_choice) {
  liftfg::Query query;
  const auto eq = term_spec.find('=');
  if (eq == std::string::npos) {
    query.term = term_spec;
  } else {
    query.term = term_spec.substr(0, eq);
    query.value = term_spec.substr(eq + 1);
  }
  if (!evidence_list.empty()) query.evidence = parse_evidence_list(evidence_list);

  const bool pfg_model = is_pfg_document(model_path);
  std::string engine = engine_choice;
  if (engine.empty()) engine = pfg_model ? "lve" : "ve";

  liftfg::Marginal marginal;
  if (engine == "lve") {
    if (!pfg_model) throw std::runtime_error("engine lve requires a pfg model");
    marginal = liftfg::lve_query(liftfg::load_pfg(model_path), query);
  } else if (engine == "ve") {
    if (pfg_model) {
      marginal = liftfg::ve_ground(liftfg::ground_pfg(liftfg::load_pfg(model_path)), query);
    } else {
      const auto file = liftfg::load_fg(model_path);
      // Evidence stored in the model applies unless overridden on the line.
      for (const auto& [rv, value] : file.evidence) query.evidence.emplace(rv, value);
      if (query.evidence.count(query.term) && !query.value) {
        throw std::runtime_error("query term '" + query.term + "' has evidence");
      }
      marginal = liftfg::ve_ground(file.graph, query);
    }
  } else {
    throw std::runtime_error("unknown engine '" + engine + "'");
  }

  ordered_json out;
  out["term"] = query.term;
  if (query.value) {
    out["value"] = *query.value;
    out["probability"] = marginal.at(*query.value).str();
  } else {
    auto dist = ordered_json::object();
    for (const auto& [value, p] : marginal.dist) dist[value] = p.str();
    out["marginal"] = std::move(dist);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_gen(unsigned d, double p, unsigned alpha_max, std::uint64_t seed,
            const std::string& out_path) {
  const auto g = liftfg::generate_fg({d, p, alpha_max, seed});
  liftfg::save_fg(out_path, g);
  std::cout << "rvs=" << g.rvs().size() << " factors=" << g.factors().size() << "\n";
  return 0;
}

int run_bench(const std::string& d_list, const std::string& p_list, unsigned alpha_max,
              unsigned queries, unsigned seeds, const std::string& csv_path,
              const std::string& svg_path) {
  std::vector<liftfg::GenConfig> configs;
  for (const auto& d_text : split_list(d_list)) {
    for (const auto& p_text : split_list(p_list)) {
      for (unsigned seed = 0; seed < seeds; ++seed) {
        configs.push_back({static_cast<unsigned>(std::stoul(d_text)), std::stod(p_text),
                           alpha_max, seed});
      }
    }
  }
  const auto records = liftfg::run_benchmark(configs, queries);
  for (const auto& r : records) {
    std::cout << "d=" << r.config.d << " p=" << r.config.p << " seed=" << r.config.seed
              << " groups_acp=" << r.factor_groups_acp
              << " groups_alpha=" << r.factor_groups_alpha
              << " online_acp_ms=" << r.online_acp_ms
              << " online_alpha_ms=" << r.online_alpha_ms << " verify=" << r.verification
              << "\n";
  }
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot open '" + csv_path + "' for writing");
    out << liftfg::to_csv(records);
  }
  if (!svg_path.empty()) {
    std::ofstream out(svg_path);
    if (!out) throw std::runtime_error("cannot open '" + svg_path + "' for writing");
    out << liftfg::to_svg(records);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"factor graph compression via scale-independent exchangeable factor detection"};
  app.require_subcommand(1);

  auto* check = app.add_subcommand("check", "test two factors for exchangeability");
  std::string phi1_spec, phi2_spec, epsilon_text;
  check->add_option("--phi1", phi1_spec, "first factor as <file>#<factor>")->required();
  check->add_option("--phi2", phi2_spec, "second factor as <file>#<factor>")->required();
  check->add_option("--epsilon", epsilon_text,
                    "rational tolerance p/q; switches to the interval check in the given "
                    "argument order");

  auto* compress = app.add_subcommand("compress", "construct a pfg from a factor graph");
  std::string in_path, out_path, mode_text = "alpha-acp", evidence_path;
  compress->add_option("--in", in_path, "input factor graph")->required();
  compress->add_option("--out", out_path, "output pfg")->required();
  compress->add_option("--mode", mode_text, "acp or alpha-acp")
      ->check(CLI::IsMember({"acp", "alpha-acp"}));
  compress->add_option("--evidence", evidence_path, "JSON object of rv to observed value");

  auto* query = app.add_subcommand("query", "answer a marginal query");
  std::string model_path, term_spec, evidence_list, engine_choice;
  query->add_option("--model", model_path, "factor graph or pfg file")->required();
  query->add_option("--term", term_spec, "rv, or rv=value for a single probability")->required();
  query->add_option("--evidence", evidence_list, "comma-separated rv=value pairs");
  query->add_option("--engine", engine_choice, "ve or lve (default: by model kind)")
      ->check(CLI::IsMember({"ve", "lve"}));

  auto* gen = app.add_subcommand("gen", "generate a benchmark factor graph");
  unsigned d = 8, alpha_max = 10, queries = 4, seeds = 10;
  double p = 0.1;
  std::uint64_t seed = 0;
  std::string gen_out;
  gen->add_option("--d", d, "size parameter")->required();
  gen->add_option("--p", p, "proportion of scaled factors");
  gen->add_option("--alpha-max", alpha_max, "scalars drawn from {1..alpha_max}");
  gen->add_option("--seed", seed, "rng seed");
  gen->add_option("--out", gen_out, "output file")->required();

  auto* bench = app.add_subcommand("bench", "compare acp and alpha-acp end to end");
  std::string d_list = "2,4,8", p_list = "0.1", csv_path, svg_path;
  bench->add_option("--d", d_list, "comma-separated size parameters");
  bench->add_option("--p", p_list, "comma-separated scale proportions");
  bench->add_option("--alpha-max", alpha_max, "scalars drawn from {1..alpha_max}");
  bench->add_option("--queries", queries, "queries per graph");
  bench->add_option("--seeds", seeds, "seeds 0..n-1 per cell");
  bench->add_option("--csv", csv_path, "write records as csv");
  bench->add_option("--svg", svg_path, "write a query-time plot");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*check) return run_check(phi1_spec, phi2_spec, epsilon_text);
    if (*compress) return run_compress(in_path, out_path, mode_text, evidence_path);
    if (*query) return run_query(model_path, term_spec, evidence_list, engine_choice);
    if (*gen) return run_gen(d, p, alpha_max, seed, gen_out);
    if (*bench) return run_bench(d_list, p_list, alpha_max, queries, seeds, csv_path, svg_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
