#pragma once

// Subcommands of the rosen tool: validate, simulate, spectrum, localtime, verify.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "rosen/config.hpp"
#include "rosen/error.hpp"
#include "rosen/localtime.hpp"
#include "rosen/paths.hpp"
#include "rosen/spectral.hpp"
#include "rosen/verify.hpp"

namespace rosen {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2, kExitVerification = 3 };

struct RunContext {
  ExperimentConfig config;
  std::string hash;
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;
};

namespace detail {

inline std::filesystem::path output_dir(const RunContext& ctx) {
  std::filesystem::path d(ctx.config.output_dir);
  std::filesystem::create_directories(d);
  return d;
}

inline std::string metadata(const RunContext& ctx) {
  return "config " + ctx.hash + " seed " + std::to_string(ctx.config.simulation.seed);
}

inline nlohmann::ordered_json summary_head(const RunContext& ctx, const std::string& command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_hash"] = ctx.hash;
  j["seed"] = ctx.config.simulation.seed;
  j["model"] = describe(ctx.config.model);
  return j;
}

inline void write_summary(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream os(path);
  os << j.dump(2) << "\n";
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw ValidationError("cannot write " + p.string());
  return os;
}

}  // namespace detail

inline int cmd_validate(const RunContext& ctx) {
  const auto rep = validate_profile(ctx.config.model);
  if (!rep.ok) {
    *ctx.err << "invalid: " << rep.message << "\n";
    return kExitValidation;
  }
  const auto dom = build_domain(ctx.config);
  *ctx.out << "profile ok: " << describe(ctx.config.model) << "\n";
  *ctx.out << "domain ok: " << dom.describe() << " cells=" << dom.size() << "\n";
  *ctx.out << "config " << ctx.hash << "\n";
  return kExitOk;
}

inline int cmd_simulate(const RunContext& ctx) {
  const auto& c = ctx.config;
  const auto dom = build_domain(c);
  const auto times = dyadic_times(c.simulation.n_times, c.model.horizon());
  const auto ens = simulate_multifractional_streaming(c.model, times, dom, c.simulation.n, c.simulation.seed);
  const auto dir = detail::output_dir(ctx);
  const auto csv = dir / ("paths_" + ctx.hash + ".csv");
  {
    auto os = detail::open_output(csv);
    write_paths_csv(os, ens, detail::metadata(ctx));
  }
  auto j = detail::summary_head(ctx, "simulate");
  j["samples"] = c.simulation.n;
  j["times"] = times.size();
  j["domain"] = dom.describe();
  j["cells"] = dom.size();
  j["paths_csv"] = csv.filename().string();
  detail::write_summary(dir / ("summary_simulate_" + ctx.hash + ".json"), j);
  *ctx.out << "wrote " << csv.string() << "\n";
  return kExitOk;
}

inline EigenSpectrum configured_spectrum(const RunContext& ctx, std::string* domain_text = nullptr) {
  const auto& c = ctx.config;
  if (!c.analysis.synthetic_spectrum.empty()) return spectrum_from_values(c.analysis.synthetic_spectrum);
  const double T = c.model.horizon();
  const auto dom = build_domain(c);
  if (domain_text) *domain_text = dom.describe();
  return eigen_decompose(discretize_kernel(c.model.at(T), T, dom), c.analysis.spectrum_rank);
}

inline int cmd_spectrum(const RunContext& ctx) {
  const auto& c = ctx.config;
  std::string dom_text = "synthetic";
  const auto spec = configured_spectrum(ctx, &dom_text);
  const auto dir = detail::output_dir(ctx);
  const auto spec_csv = dir / ("spectrum_" + ctx.hash + ".csv");
  const auto cf_csv = dir / ("cf_" + ctx.hash + ".csv");
  {
    auto os = detail::open_output(spec_csv);
    write_spectrum_csv(os, spec, detail::metadata(ctx) + " domain " + dom_text);
  }
  {
    auto os = detail::open_output(cf_csv);
    write_cf_trace_csv(os, spec, alpha_grid(-c.analysis.cf_max, c.analysis.cf_max, c.analysis.cf_points),
                       detail::metadata(ctx));
  }
  auto j = detail::summary_head(ctx, "spectrum");
  j["domain"] = dom_text;
  j["rank"] = spec.lambdas.size();
  std::vector<double> lead(spec.lambdas.begin(), spec.lambdas.begin() + std::min<std::ptrdiff_t>(5, std::ssize(spec.lambdas)));
  j["leading"] = lead;
  j["residual_mass"] = spec.residual_mass;
  j["variance"] = 2.0 * (spec.sum_power(2) + spec.residual_mass);
  j["spectrum_csv"] = spec_csv.filename().string();
  j["cf_csv"] = cf_csv.filename().string();
  detail::write_summary(dir / ("summary_spectrum_" + ctx.hash + ".json"), j);
  *ctx.out << "wrote " << spec_csv.string() << " and " << cf_csv.string() << "\n";
  return kExitOk;
}

inline int cmd_localtime(const RunContext& ctx) {
  const auto& c = ctx.config;
  const double T = c.model.horizon();
  const auto dir = detail::output_dir(ctx);
  auto j = detail::summary_head(ctx, "localtime");

  BermanReport berman;
  if (!c.analysis.synthetic_spectrum.empty()) {
    std::vector<GapSpectrum> g;
    for (double gap : {0.5 * T, 0.25 * T}) g.push_back({T - gap, T, spectrum_from_values(c.analysis.synthetic_spectrum)});
    BermanOptions o;
    o.strict = false;
    o.horizon = T;
    berman = berman_integral(g, o);
  } else {
    const auto pair = truncation_pair(c.model);
    const double L = resolve_truncation(c.domain, pair, T);
    const auto bdom = TruncatedDomain::focused(L, T, T, c.domain.min_width, 4, c.domain.refinement);
    std::vector<GapSpectrum> g;
    for (std::size_t k = 1; k <= c.analysis.berman_gaps; ++k) {
      const double gap = T * std::ldexp(1.0, -static_cast<int>(k));
      if (c.model.kind() == ProfileKind::constant) {
        g.push_back({T - gap, T, eigen_decompose(discretize_increment(c.model.at(T), T - gap, T, bdom))});
      } else {
        g.push_back({T - gap, T, multifractional_gap(c.model, T - gap, T, bdom).g});
      }
    }
    BermanOptions o;
    o.horizon = T;
    berman = berman_integral(g, o);

    const auto dom = build_domain(c);
    const auto times = dyadic_times(c.analysis.path_points, T);
    const auto ens = simulate_multifractional_streaming(c.model, times, dom, c.analysis.paths, c.simulation.seed);
    const auto hist_csv = dir / ("localtime_" + ctx.hash + ".csv");
    auto os = detail::open_output(hist_csv);
    os << "# " << detail::metadata(ctx) << "\n# A=[0," << format_double(T) << "] bin_fraction="
       << format_double(c.analysis.bin_fraction) << "\n";
    os << "path,bin_left,bin_right,density\n";
    double l2 = 0.0;
    std::size_t used = 0;
    for (std::size_t r = 0; r < ens.samples(); ++r) {
      std::vector<double> path(times.size());
      for (std::size_t i = 0; i < times.size(); ++i) path[i] = ens.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i));
      const auto [lo, hi] = std::minmax_element(path.begin(), path.end());
      if (!(*hi > *lo)) continue;
      const auto h = estimate_local_time(path, times, 0.0, T, (*hi - *lo) * c.analysis.bin_fraction);
      l2 += l2_mass(h);
      ++used;
      for (std::size_t k = 0; k < h.density.size(); ++k) {
        os << r << ',' << format_double(h.bin_edges[k]) << ',' << format_double(h.bin_edges[k + 1]) << ','
           << format_double(h.density[k]) << "\n";
      }
    }
    j["paths"] = c.analysis.paths;
    j["mean_l2_mass"] = used ? l2 / static_cast<double>(used) : 0.0;
    j["histograms_csv"] = hist_csv.filename().string();
  }
  const auto berman_json = dir / ("berman_" + ctx.hash + ".json");
  {
    auto os = detail::open_output(berman_json);
    write_berman_json(os, berman);
  }
  j["berman_total"] = berman.total;
  j["berman_integrable"] = berman.integrable;
  j["v_tail_exponent"] = berman.v_tail_exponent;
  j["gap_exponent"] = berman.gap_exponent;
  j["berman_json"] = berman_json.filename().string();
  detail::write_summary(dir / ("summary_localtime_" + ctx.hash + ".json"), j);
  *ctx.out << "berman total " << format_double(berman.total) << (berman.integrable ? " (integrable)" : " (not integrable: " + berman.reason + ")")
           << "\n";
  return kExitOk;
}

inline int cmd_verify(const RunContext& ctx, std::filesystem::path* table_out = nullptr) {
  const auto settings = suite_settings(ctx.config);
  const auto rep = run_verify(settings, [&](int k) { *ctx.err << "criterion " << k << " done\n"; });
  const auto dir = detail::output_dir(ctx);
  const auto table = next_results_path(dir, ctx.hash);
  {
    auto os = detail::open_output(table);
    write_results_table(os, rep, ctx.hash, ctx.config.simulation.seed);
  }
  if (table_out) *table_out = table;
  auto j = detail::summary_head(ctx, "verify");
  j["quick"] = ctx.config.quick;
  j["checks"] = rep.checks.size();
  std::size_t unexpected = 0, controls = 0;
  for (const auto& c : rep.checks) {
    unexpected += !c.ok();
    controls += !c.expect_pass;
  }
  j["negative_controls"] = controls;
  j["unexpected"] = unexpected;
  auto crit = nlohmann::ordered_json::object();
  for (int k = 1; k <= 11; ++k) crit[std::to_string(k)] = rep.criterion_ok(k) ? "pass" : "fail";
  j["criteria"] = crit;
  j["results_csv"] = table.filename().string();
  auto stem = table.stem().string();
  detail::write_summary(dir / (stem + ".json"), j);
  for (int k = 1; k <= 11; ++k) *ctx.out << "criterion " << k << ": " << (rep.criterion_ok(k) ? "PASS" : "FAIL") << "\n";
  *ctx.out << "results " << table.string() << "\n";
  return rep.ok() ? kExitOk : kExitVerification;
}

// Parses arguments, runs one subcommand and maps errors to exit codes.
inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Rosenblatt-type process simulation and verification"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool quick = false;
  app.add_option("--config", config_path, "INI configuration file")->required();
  app.add_option("--seed", seed, "override simulation.seed");
  app.add_option("--threads", threads, "worker thread cap")->check(CLI::NonNegativeNumber);
  app.add_flag("--quick", quick, "reduced scale with widened tolerances");
  for (const char* name : {"validate", "simulate", "spectrum", "localtime", "verify"}) app.add_subcommand(name);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitValidation;
  }
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif
  const auto start = std::chrono::steady_clock::now();
  int code = kExitOk;
  try {
    RunContext ctx;
    ctx.config = load_config(config_path);
    if (seed) ctx.config.simulation.seed = *seed;
    if (quick) ctx.config.quick = true;
    ctx.hash = config_hash(ctx.config);
    ctx.out = &out;
    ctx.err = &err;
    const auto name = app.get_subcommands().front()->get_name();
    if (name == "validate") code = cmd_validate(ctx);
    else if (name == "simulate") code = cmd_simulate(ctx);
    else if (name == "spectrum") code = cmd_spectrum(ctx);
    else if (name == "localtime") code = cmd_localtime(ctx);
    else code = cmd_verify(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  err << "wall time " << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s\n";
  return code;
}

}  // namespace rosen
