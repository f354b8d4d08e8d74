#pragma once

// Experiment configuration: flat INI sections, round-trip float text, content hash.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rosen/domain.hpp"
#include "rosen/error.hpp"
#include "rosen/hurst.hpp"
#include "rosen/kernel.hpp"
#include "rosen/util.hpp"

namespace rosen {

struct DomainConfig {
  std::optional<double> L;  // unset: choose_truncation
  Grading grading = Grading::focused;
  std::size_t M = 512;
  double ratio = 0.8;
  int refinement = 4;
  double focus = 1.0;
  int cells_per_octave = 8;
  double min_width = 0.0009765625;
  double truncation_tol = 1e-3;
  double truncation_budget = 1208925819614629174706176.0;  // 2^80, in units of T
};

struct SimulationConfig {
  std::size_t n_times = 65;
  std::size_t n = 10000;
  std::uint64_t seed = 20240601;
};

struct AnalysisConfig {
  std::size_t spectrum_rank = 0;
  std::size_t cf_points = 41;
  double cf_max = 5.0;
  std::size_t berman_gaps = 7;
  double bin_fraction = 0.015625;
  std::size_t paths = 100;
  std::size_t path_points = 513;
  std::vector<double> synthetic_spectrum;
};

struct ExperimentConfig {
  HurstProfile model = HurstProfile::constant(0.6, 0.8, 1.0, 0.99);
  DomainConfig domain;
  SimulationConfig simulation;
  AnalysisConfig analysis;
  bool quick = false;
  std::string output_dir = "out";
};

namespace detail {

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

}  // namespace detail

// Canonical INI text: sections and keys in fixed order, floats in shortest round-trip form.
inline std::string to_ini(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "[model]\n";
  for (const auto& [k, v] : profile_to_key_values(c.model)) os << k << " = " << v << "\n";
  const auto& d = c.domain;
  os << "\n[domain]\n";
  os << "L = " << (d.L ? format_double(*d.L) : std::string("auto")) << "\n";
  os << "grading = " << to_string(d.grading) << "\n";
  os << "M = " << d.M << "\n";
  os << "ratio = " << format_double(d.ratio) << "\n";
  os << "refinement = " << d.refinement << "\n";
  os << "focus = " << format_double(d.focus) << "\n";
  os << "cells_per_octave = " << d.cells_per_octave << "\n";
  os << "min_width = " << format_double(d.min_width) << "\n";
  os << "truncation_tol = " << format_double(d.truncation_tol) << "\n";
  os << "truncation_budget = " << format_double(d.truncation_budget) << "\n";
  const auto& s = c.simulation;
  os << "\n[simulation]\n";
  os << "n_times = " << s.n_times << "\n";
  os << "n = " << s.n << "\n";
  os << "seed = " << s.seed << "\n";
  const auto& a = c.analysis;
  os << "\n[analysis]\n";
  os << "spectrum_rank = " << a.spectrum_rank << "\n";
  os << "cf_points = " << a.cf_points << "\n";
  os << "cf_max = " << format_double(a.cf_max) << "\n";
  os << "berman_gaps = " << a.berman_gaps << "\n";
  os << "bin_fraction = " << format_double(a.bin_fraction) << "\n";
  os << "paths = " << a.paths << "\n";
  os << "path_points = " << a.path_points << "\n";
  if (!a.synthetic_spectrum.empty()) os << "synthetic_spectrum = " << detail::join_doubles(a.synthetic_spectrum) << "\n";
  os << "\n[verify]\n";
  os << "quick = " << (c.quick ? "true" : "false") << "\n";
  os << "\n[output]\n";
  os << "dir = " << c.output_dir << "\n";
  return os.str();
}

inline std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a64(to_ini(c))); }

inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "config") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser::ini_parser_error& e) {
    throw ConfigError(e.message(), source + ":" + std::to_string(e.line()));
  }
  static const std::map<std::string, std::set<std::string>> known = {
      {"model", {"kind", "h1", "h2", "slope1", "slope2", "amplitude1", "amplitude2", "frequency1", "frequency2", "T", "gamma"}},
      {"domain", {"L", "grading", "M", "ratio", "refinement", "focus", "cells_per_octave", "min_width", "truncation_tol",
                  "truncation_budget"}},
      {"simulation", {"n_times", "n", "seed"}},
      {"analysis", {"spectrum_rank", "cf_points", "cf_max", "berman_gaps", "bin_fraction", "paths", "path_points",
                    "synthetic_spectrum"}},
      {"verify", {"quick"}},
      {"output", {"dir"}}};
  for (const auto& [sec, body] : tree) {
    auto it = known.find(sec);
    if (it == known.end()) throw ConfigError("unknown section '" + sec + "'", source + ":" + sec);
    if (!body.data().empty()) throw ConfigError("key outside a section", source + ":" + sec);
    for (const auto& [key, val] : body) {
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "'", sec + "." + key);
    }
  }
  ExperimentConfig c;
  auto raw = [&](const std::string& sec, const std::string& key) -> std::optional<std::string> {
    auto s = tree.get_child_optional(sec);
    if (!s) return std::nullopt;
    auto v = s->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return *v;
  };
  auto real = [&](const std::string& sec, const std::string& key, double& out) {
    if (auto v = raw(sec, key)) {
      auto d = parse_double(*v);
      if (!d) throw ConfigError("not a number: '" + *v + "'", sec + "." + key);
      out = *d;
    }
  };
  auto count = [&](const std::string& sec, const std::string& key, auto& out) {
    if (auto v = raw(sec, key)) {
      auto d = parse_int(*v);
      if (!d || *d < 0) throw ConfigError("not a non-negative integer: '" + *v + "'", sec + "." + key);
      out = static_cast<std::remove_reference_t<decltype(out)>>(*d);
    }
  };

  if (auto m = tree.get_child_optional("model")) {
    KeyValues kv;
    for (const auto& [k, v] : *m) kv[k] = v.data();
    c.model = profile_from_key_values(kv, "model");
  }
  auto& d = c.domain;
  if (auto v = raw("domain", "L"); v && *v != "auto") {
    auto x = parse_double(*v);
    if (!x || !(*x > 0.0)) throw ConfigError("L must be 'auto' or a positive number, got '" + *v + "'", "domain.L");
    d.L = *x;
  }
  if (auto v = raw("domain", "grading")) {
    try {
      d.grading = grading_from_string(*v);
    } catch (const ValidationError&) {
      throw ConfigError("unknown grading '" + *v + "'", "domain.grading");
    }
  }
  count("domain", "M", d.M);
  real("domain", "ratio", d.ratio);
  count("domain", "refinement", d.refinement);
  real("domain", "focus", d.focus);
  count("domain", "cells_per_octave", d.cells_per_octave);
  real("domain", "min_width", d.min_width);
  real("domain", "truncation_tol", d.truncation_tol);
  real("domain", "truncation_budget", d.truncation_budget);
  count("simulation", "n_times", c.simulation.n_times);
  count("simulation", "n", c.simulation.n);
  count("simulation", "seed", c.simulation.seed);
  auto& a = c.analysis;
  count("analysis", "spectrum_rank", a.spectrum_rank);
  count("analysis", "cf_points", a.cf_points);
  real("analysis", "cf_max", a.cf_max);
  count("analysis", "berman_gaps", a.berman_gaps);
  real("analysis", "bin_fraction", a.bin_fraction);
  count("analysis", "paths", a.paths);
  count("analysis", "path_points", a.path_points);
  if (auto v = raw("analysis", "synthetic_spectrum")) {
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
      auto x = b == std::string::npos ? std::nullopt : parse_double(item.substr(b, e - b + 1));
      if (!x) throw ConfigError("bad spectrum entry '" + item + "'", "analysis.synthetic_spectrum");
      a.synthetic_spectrum.push_back(*x);
    }
  }
  if (auto v = raw("verify", "quick")) {
    if (*v == "true" || *v == "1") c.quick = true;
    else if (*v == "false" || *v == "0") c.quick = false;
    else throw ConfigError("expected true or false, got '" + *v + "'", "verify.quick");
  }
  if (auto v = raw("output", "dir")) c.output_dir = *v;

  if (d.M < 2) throw ConfigError("M must be at least 2", "domain.M");
  if (d.refinement < 1) throw ConfigError("refinement must be at least 1", "domain.refinement");
  if (d.cells_per_octave < 1) throw ConfigError("cells_per_octave must be at least 1", "domain.cells_per_octave");
  if (!(d.min_width > 0.0)) throw ConfigError("min_width must be positive", "domain.min_width");
  if (!(d.ratio > 0.0 && d.ratio < 1.0)) throw ConfigError("ratio must lie in (0, 1)", "domain.ratio");
  if (!(d.truncation_tol > 0.0 && d.truncation_tol < 1.0)) throw ConfigError("truncation_tol must lie in (0, 1)", "domain.truncation_tol");
  if (!(d.focus >= 0.0 && d.focus <= c.model.horizon())) throw ConfigError("focus must lie in [0, T]", "domain.focus");
  if (c.simulation.n_times < 2) throw ConfigError("n_times must be at least 2", "simulation.n_times");
  if (!(a.bin_fraction > 0.0 && a.bin_fraction <= 1.0)) throw ConfigError("bin_fraction must lie in (0, 1]", "analysis.bin_fraction");
  if (a.cf_points < 1) throw ConfigError("cf_points must be positive", "analysis.cf_points");
  if (a.berman_gaps < 2) throw ConfigError("berman_gaps must be at least 2", "analysis.berman_gaps");
  if (a.path_points < 9) throw ConfigError("path_points must be at least 9", "analysis.path_points");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file", path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

// Pair whose tail is heaviest over the profile: maximum of each coordinate.
inline HurstPair truncation_pair(const HurstProfile& p) {
  const auto ex = profile_extrema(p);
  return {ex.max_h1, ex.max_h2};
}

inline double resolve_truncation(const DomainConfig& d, const HurstPair& pair, double T) {
  if (d.L) return *d.L;
  TruncationOptions opt;
  opt.budget_factor = d.truncation_budget;
  return choose_truncation(pair, T, T, d.truncation_tol, opt).L;
}

inline TruncatedDomain build_domain(const DomainConfig& d, double L, double T) {
  switch (d.grading) {
    case Grading::uniform: return TruncatedDomain::uniform(L, T, d.M, d.refinement);
    case Grading::graded: return TruncatedDomain::graded(L, T, d.M, d.ratio, d.refinement);
    case Grading::focused:
      return TruncatedDomain::focused(L, T, d.focus, d.min_width, d.cells_per_octave, d.refinement);
  }
  throw ValidationError("unknown grading");
}

inline TruncatedDomain build_domain(const ExperimentConfig& c) {
  const double T = c.model.horizon();
  return build_domain(c.domain, resolve_truncation(c.domain, truncation_pair(c.model), T), T);
}

// n_times points k T/(n_times - 1), k = 0..n_times-1.
inline std::vector<double> dyadic_times(std::size_t n_times, double T) {
  std::vector<double> t(n_times);
  for (std::size_t k = 0; k < n_times; ++k) t[k] = T * static_cast<double>(k) / static_cast<double>(n_times - 1);
  return t;
}

}  // namespace rosen
