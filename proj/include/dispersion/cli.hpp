#pragma once

// Batch front end: compute | scan | fit-scaling | check-limits.
//
// Exit codes: 0 success, 1 computation error, 2 configuration or usage
// error, 3 a failed check under check-limits.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dispersion/limits.hpp"
#include "dispersion/potentials.hpp"
#include "dispersion/quadrature.hpp"
#include "dispersion/scenario.hpp"

namespace dispersion::cli {

enum ExitCode : int { kOk = 0, kComputationError = 1, kConfigError = 2, kCheckFailed = 3 };

inline constexpr const char* kCsvHeader =
    "R,U_nonresonant,U_resonant,U_total,quad_abs_err,matsubara_tail_bound,n_resonant_terms,flags";

/// 17 significant digits.
inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) {
    if (!out.empty()) out += ';';
    out += f;
  }
  return out;
}

inline std::string csv_row(const PotentialBreakdown& b) {
  std::string row = format_value(b.separation);
  for (double v : {b.nonresonant, b.resonant, b.total, b.diagnostics.quad_abs_err,
                   b.diagnostics.matsubara_tail_bound}) {
    row += ',';
    row += format_value(v);
  }
  row += ',' + std::to_string(b.resonant_terms.size()) + ',' + join_flags(b.diagnostics.flags);
  return row;
}

inline nlohmann::ordered_json json_row(const PotentialBreakdown& b) {
  nlohmann::ordered_json row;
  row["R"] = b.separation;
  row["U_nonresonant"] = b.nonresonant;
  row["U_resonant"] = b.resonant;
  row["U_total"] = b.total;
  row["quad_abs_err"] = b.diagnostics.quad_abs_err;
  row["matsubara_tail_bound"] = b.diagnostics.matsubara_tail_bound;
  row["n_resonant_terms"] = b.resonant_terms.size();
  row["flags"] = join_flags(b.diagnostics.flags);
  return row;
}

struct FitRow {
  std::string quantity;
  std::optional<PowerLawFit> fit;
  std::string status;
};

/// Evaluates the breakdown at every separation, up to `jobs` points at a
/// time. Rows come back in grid order; on failure the error of the first
/// failing grid point is rethrown.
inline std::vector<PotentialBreakdown> evaluate_grid(const ScenarioConfig& cfg,
                                                     const std::vector<double>& separations,
                                                     const PotentialOptions& opts, int jobs) {
  const std::size_t n = separations.size();
  std::vector<std::optional<PotentialBreakdown>> rows(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        rows[i] = total_potential(cfg.atom_a, cfg.atom_b, cfg.field, cfg.mode, separations[i], opts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<PotentialBreakdown> out;
  out.reserve(n);
  for (auto& r : rows) out.push_back(std::move(*r));
  return out;
}

inline FitRow fit_quantity(const std::string& name, const std::vector<PotentialBreakdown>& rows,
                           double PotentialBreakdown::*member) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(r.separation, r.*member);
  try {
    return {name, fit_power_law(pts), "ok"};
  } catch (const Error& e) {
    return {name, std::nullopt, std::string(to_string(e.code()))};
  }
}

inline void write_table(std::ostream& out, OutputFormat format,
                        const std::vector<PotentialBreakdown>& rows,
                        const std::vector<FitRow>* fits) {
  if (format == OutputFormat::Csv) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) out << csv_row(r) << '\n';
    if (fits) {
      out << '\n' << "quantity,exponent,intercept,stderr,points_used,status\n";
      for (const auto& f : *fits) {
        out << f.quantity << ',';
        if (f.fit) {
          out << format_value(f.fit->exponent) << ',' << format_value(f.fit->intercept) << ','
              << format_value(f.fit->stderr_exponent) << ',' << f.fit->points_used;
        } else {
          out << ",,,0";
        }
        out << ',' << f.status << '\n';
      }
    }
    return;
  }
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (const auto& r : rows) table.push_back(json_row(r));
  if (!fits) {
    out << table.dump(2) << '\n';
    return;
  }
  nlohmann::ordered_json fit_table = nlohmann::ordered_json::array();
  for (const auto& f : *fits) {
    nlohmann::ordered_json row;
    row["quantity"] = f.quantity;
    row["exponent"] = f.fit ? nlohmann::ordered_json(f.fit->exponent) : nullptr;
    row["intercept"] = f.fit ? nlohmann::ordered_json(f.fit->intercept) : nullptr;
    row["stderr"] = f.fit ? nlohmann::ordered_json(f.fit->stderr_exponent) : nullptr;
    row["points_used"] = f.fit ? f.fit->points_used : 0;
    row["status"] = f.status;
    fit_table.push_back(row);
  }
  nlohmann::ordered_json doc;
  doc["rows"] = table;
  doc["fits"] = fit_table;
  out << doc.dump(2) << '\n';
}

struct Options {
  std::string config;
  bool strict = false;
  int jobs = 1;
  std::string output;
  std::string format;
  std::optional<double> tol;
  double tolerance_scale = 1.0;
};

namespace detail {

/// Runs `body` with the chosen output stream: `path` when non-empty and not
/// "-", otherwise `fallback`.
template <class Body>
void with_output(const std::string& path, std::ostream& fallback, Body&& body) {
  if (path.empty() || path == "-") {
    body(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError(path + ": cannot open output file");
  body(file);
}

inline int run_scenario(const std::string& command, const Options& o, std::ostream& out,
                        std::ostream& err) {
  ScenarioConfig cfg = load_scenario(o.config);
  if (o.tol) {
    if (!(*o.tol > 0.0)) throw ConfigError("--tol must be > 0");
    cfg.tolerances.quadrature = *o.tol;
  }
  OutputFormat format = cfg.output.format;
  if (o.format == "csv") format = OutputFormat::Csv;
  if (o.format == "json") format = OutputFormat::Json;
  const std::string path = o.output.empty() ? cfg.output.path : o.output;

  std::vector<double> separations;
  if (command == "compute") {
    if (!cfg.geometry.single) throw ConfigError("field 'geometry': compute needs a single R");
    separations = {*cfg.geometry.single};
  } else {
    separations = cfg.geometry.separations();
  }
  if (command == "fit-scaling" && separations.size() < 3) {
    throw ConfigError("field 'geometry.points': fit-scaling needs at least 3 grid points");
  }

  const std::vector<PotentialBreakdown> rows =
      evaluate_grid(cfg, separations, cfg.potential_options(o.strict), o.jobs);

  std::set<std::string> warned;
  for (const auto& r : rows)
    for (const auto& f : r.diagnostics.flags)
      if (warned.insert(f).second) err << "warning: " << f << '\n';

  std::vector<FitRow> fits;
  if (command == "fit-scaling") {
    fits.push_back(fit_quantity("abs_nonresonant", rows, &PotentialBreakdown::nonresonant));
    fits.push_back(fit_quantity("abs_resonant", rows, &PotentialBreakdown::resonant));
  }
  with_output(path, out, [&](std::ostream& s) {
    write_table(s, format, rows, command == "fit-scaling" ? &fits : nullptr);
  });
  return kOk;
}

inline int run_checks(const Options& o, std::ostream& out) {
  if (!(o.tolerance_scale > 0.0)) throw ConfigError("--tolerance-scale must be > 0");
  CheckOptions opts;
  opts.tolerance_scale = o.tolerance_scale;
  const std::vector<CheckResult> results = run_limit_checks(opts);
  bool all = true;
  with_output(o.output, out, [&](std::ostream& s) {
    for (const auto& c : results) {
      char line[256];
      std::snprintf(line, sizeof line, "%s %-34s measured=%.3e threshold=%.3e",
                    c.passed ? "PASS" : "FAIL", c.name.c_str(), c.measured, c.threshold);
      s << line << '\n';
      all = all && c.passed;
    }
  });
  return all ? kOk : kCheckFailed;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Two-atom dispersion potentials in external electromagnetic fields"};
  app.require_subcommand(1);
  Options o;

  auto add_scenario = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "Scenario file (JSON)")->required();
    sub->add_flag("--strict", o.strict, "Treat dark-atom violations as errors");
    sub->add_option("--jobs", o.jobs, "Grid points evaluated concurrently")
        ->check(CLI::PositiveNumber);
    sub->add_option("--output", o.output, "Output path ('-' for stdout)");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--tol", o.tol, "Relative quadrature tolerance");
    return sub;
  };
  add_scenario("compute", "Potential breakdown at a single separation");
  add_scenario("scan", "Potential breakdown over a separation grid");
  add_scenario("fit-scaling", "Grid scan plus power-law fits of |U_nonresonant| and |U_resonant|");
  CLI::App* checks = app.add_subcommand("check-limits", "Run the built-in limit checks");
  checks->add_option("--output", o.output, "Output path ('-' for stdout)");
  checks->add_option("--tolerance-scale", o.tolerance_scale,
                     "Multiply every check threshold (values < 1 tighten)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "check-limits") return detail::run_checks(o, out);
    return detail::run_scenario(command, o, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kComputationError;
  }
}

}  // namespace dispersion::cli
