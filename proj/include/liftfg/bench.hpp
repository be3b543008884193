#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "liftfg/colour_passing.hpp"
#include "liftfg/generate.hpp"
#include "liftfg/inference.hpp"
#include "liftfg/pfg.hpp"

namespace liftfg {

struct BenchRecord {
  GenConfig config;
  std::size_t rv_count = 0;
  std::size_t factor_count = 0;
  std::size_t rv_groups_acp = 0;
  std::size_t factor_groups_acp = 0;
  std::size_t rv_groups_alpha = 0;
  std::size_t factor_groups_alpha = 0;
  double offline_acp_ms = 0.0;
  double offline_alpha_ms = 0.0;
  double online_acp_ms = 0.0;   // mean over queries of per-query medians
  double online_alpha_ms = 0.0;
  std::optional<Rational> beta;
  std::string verification;  // "ok", or a skip/failure note
};

/// Queries after which the extra offline cost amortises: delta_offline over
/// delta_gain, defined only for a positive gain.
inline std::optional<Rational> compute_beta(const Rational& delta_offline,
                                            const Rational& delta_gain) {
  if (!(delta_gain > Rational(0))) return std::nullopt;
  return delta_offline / delta_gain;
}

inline std::optional<Rational> compute_beta(const BenchRecord& record) {
  const Rational delta_offline =
      Rational::from_double(record.offline_alpha_ms) - Rational::from_double(record.offline_acp_ms);
  const Rational delta_gain =
      Rational::from_double(record.online_acp_ms) - Rational::from_double(record.online_alpha_ms);
  return compute_beta(delta_offline, delta_gain);
}

namespace detail {

inline double median_ms_of_5(const std::function<void()>& work) {
  std::vector<double> samples;
  for (int rep = 0; rep < 5; ++rep) {
    const auto start = std::chrono::steady_clock::now();
    work();
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  std::sort(samples.begin(), samples.end());
  return samples[2];
}

inline std::string format_p(double p) {
  std::ostringstream ss;
  ss << p;
  return ss.str();
}

}  // namespace detail

/// Query terms for one generated graph: the hub plus seeded-random distinct
/// degree-one rvs.
inline std::vector<std::string> benchmark_queries(const GeneratedFg& gen, unsigned count,
                                                  std::uint64_t seed) {
  std::vector<std::string> terms = {gen.hub};
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  auto pool = gen.degree_one_rvs;
  while (terms.size() < count && !pool.empty()) {
    const auto pick = detail::draw(rng, pool.size());
    terms.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return terms;
}

/// One benchmark cell: generate, compress under both modes (timed), answer
/// the same queries on both lifted models (timed), verify against the ground
/// oracle where the model is small enough.
inline BenchRecord run_benchmark_cell(const GenConfig& config, unsigned queries_per_graph) {
  BenchRecord record;
  record.config = config;
  const GeneratedFg gen = generate_fg_detailed(config);
  record.rv_count = gen.graph.rvs().size();
  record.factor_count = gen.graph.factors().size();

  ParametricFactorGraph pfg_acp, pfg_alpha;
  record.offline_acp_ms = detail::median_ms_of_5([&] {
    const auto partition = run_colour_passing(gen.graph, {}, CpMode::Acp);
    pfg_acp = construct_pfg(gen.graph, partition);
  });
  record.offline_alpha_ms = detail::median_ms_of_5([&] {
    const auto partition = run_colour_passing(gen.graph, {}, CpMode::AlphaAcp);
    pfg_alpha = construct_pfg(gen.graph, partition);
  });
  record.rv_groups_acp = pfg_acp.prvs.size();
  record.factor_groups_acp = pfg_acp.parfactors.size();
  record.rv_groups_alpha = pfg_alpha.prvs.size();
  record.factor_groups_alpha = pfg_alpha.parfactors.size();

  const auto terms = benchmark_queries(gen, queries_per_graph, config.seed);
  double total_acp = 0.0, total_alpha = 0.0;
  std::string verification = config.d <= 16 ? "ok" : "skipped: d > 16";
  for (const auto& term : terms) {
    Query q{term, std::nullopt, {}};
    Marginal m_acp, m_alpha;
    total_acp += detail::median_ms_of_5([&] { m_acp = lve_query(pfg_acp, q); });
    total_alpha += detail::median_ms_of_5([&] { m_alpha = lve_query(pfg_alpha, q); });
    if (config.d <= 16 && verification == "ok") {
      const Marginal oracle = ve_ground(gen.graph, q);
      if (!(m_acp == oracle) || !(m_alpha == oracle)) {
        verification = "marginal mismatch on '" + term + "'";
      }
    }
  }
  record.online_acp_ms = total_acp / static_cast<double>(terms.size());
  record.online_alpha_ms = total_alpha / static_cast<double>(terms.size());
  record.verification = verification;
  record.beta = compute_beta(record);
  return record;
}

inline std::vector<BenchRecord> run_benchmark(const std::vector<GenConfig>& configs,
                                              unsigned queries_per_graph) {
  if (queries_per_graph < 1) {
    throw std::invalid_argument("run_benchmark: queries_per_graph must be >= 1");
  }
  std::vector<BenchRecord> records;
  records.reserve(configs.size());
  for (const auto& config : configs) {
    records.push_back(run_benchmark_cell(config, queries_per_graph));
  }
  return records;
}

/// CSV is reproducible modulo the four timing columns and beta. A beta value
/// is written only when defined and nonnegative.
inline std::string to_csv(const std::vector<BenchRecord>& records) {
  std::ostringstream out;
  out << "d,p,seed,rvs,factors,groups_acp,groups_alpha,offline_acp_ms,offline_alpha_ms,"
         "online_acp_ms,online_alpha_ms,beta\n";
  for (const auto& r : records) {
    out << r.config.d << ',' << detail::format_p(r.config.p) << ',' << r.config.seed << ','
        << r.rv_count << ',' << r.factor_count << ',' << r.factor_groups_acp << ','
        << r.factor_groups_alpha << ',' << r.offline_acp_ms << ',' << r.offline_alpha_ms << ','
        << r.online_acp_ms << ',' << r.online_alpha_ms << ',';
    if (r.beta && !(*r.beta < Rational(0))) out << r.beta->str();
    out << '\n';
  }
  return out.str();
}

/// Mean online query time against d, one series per mode, log-scale y axis.
inline std::string to_svg(const std::vector<BenchRecord>& records) {
  std::map<unsigned, std::pair<std::vector<double>, std::vector<double>>> by_d;
  for (const auto& r : records) {
    by_d[r.config.d].first.push_back(r.online_acp_ms);
    by_d[r.config.d].second.push_back(r.online_alpha_ms);
  }
  struct Point {
    double d, acp, alpha;
  };
  std::vector<Point> points;
  for (const auto& [d, series] : by_d) {
    auto mean = [](const std::vector<double>& xs) {
      double total = 0.0;
      for (double x : xs) total += x;
      return total / static_cast<double>(xs.size());
    };
    points.push_back({static_cast<double>(d), mean(series.first), mean(series.second)});
  }

  const double width = 640, height = 400;
  const double left = 70, right = 20, top = 20, bottom = 50;
  double min_d = 1, max_d = 2, min_t = 1e-3, max_t = 1.0;
  if (!points.empty()) {
    min_d = points.front().d;
    max_d = std::max(points.back().d, min_d + 1);
    min_t = 1e300;
    max_t = 1e-300;
    for (const auto& p : points) {
      for (double t : {p.acp, p.alpha}) {
        min_t = std::min(min_t, std::max(t, 1e-6));
        max_t = std::max(max_t, std::max(t, 1e-6));
      }
    }
    if (max_t <= min_t) max_t = min_t * 10;
  }
  auto x_of = [&](double d) {
    return left + (d - min_d) / (max_d - min_d) * (width - left - right);
  };
  auto y_of = [&](double t) {
    const double lt = std::log10(std::max(t, 1e-6));
    const double lo = std::log10(min_t), hi = std::log10(max_t);
    return height - bottom - (lt - lo) / (hi - lo) * (height - top - bottom);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "  <line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
      << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
  svg << "  <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  svg << "  <text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">d</text>\n";
  svg << "  <text x=\"16\" y=\"" << (top + height - bottom) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (top + height - bottom) / 2
      << ")\">query time (ms, log scale)</text>\n";

  auto polyline = [&](const char* colour, auto select) {
    svg << "  <polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : points) svg << x_of(p.d) << ',' << y_of(select(p)) << ' ';
    svg << "\"/>\n";
    for (const auto& p : points) {
      svg << "  <circle cx=\"" << x_of(p.d) << "\" cy=\"" << y_of(select(p))
          << "\" r=\"2.5\" fill=\"" << colour << "\"/>\n";
    }
  };
  polyline("#e69f00", [](const Point& p) { return p.acp; });
  polyline("#2e2585", [](const Point& p) { return p.alpha; });
  for (const auto& p : points) {
    svg << "  <text x=\"" << x_of(p.d) << "\" y=\"" << height - bottom + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << static_cast<unsigned>(p.d)
        << "</text>\n";
  }
  svg << "  <rect x=\"" << left + 10 << "\" y=\"" << top + 6
      << "\" width=\"150\" height=\"40\" fill=\"white\" stroke=\"#ccc\"/>\n";
  svg << "  <line x1=\"" << left + 18 << "\" y1=\"" << top + 18 << "\" x2=\"" << left + 44
      << "\" y2=\"" << top + 18 << "\" stroke=\"#e69f00\" stroke-width=\"1.5\"/>\n";
  svg << "  <text x=\"" << left + 50 << "\" y=\"" << top + 22 << "\" font-size=\"11\">ACP</text>\n";
  svg << "  <line x1=\"" << left + 18 << "\" y1=\"" << top + 34 << "\" x2=\"" << left + 44
      << "\" y2=\"" << top + 34 << "\" stroke=\"#2e2585\" stroke-width=\"1.5\"/>\n";
  svg << "  <text x=\"" << left + 50 << "\" y=\"" << top + 38
      << "\" font-size=\"11\">alpha-ACP</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace liftfg
