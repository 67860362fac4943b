#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "visco/errors.hpp"
#include "visco/harness.hpp"
#include "visco/system_algebra.hpp"
#include "visco/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace visco;

namespace {

enum Exit { kOk = 0, kConfig = 2, kBlowUp = 3, kAssert = 4 };

struct Options {
  std::string config;
  std::string out;
  std::string format;
  std::string system = "relax";
  std::string dump = "csv";
  bool quiet = false;
  bool check = false;
};

// Assert windows used by --assert.
constexpr double kSlopeLow = 1.7;
constexpr double kSlopeHigh = 2.3;
constexpr double kMemoryTolerance = 1e-4;
constexpr double kMemoryRatio = 3.5;

RunSpec load(const Options& o) {
  RunSpec spec = load_config(o.config);
  if (!o.out.empty()) spec.output_dir = o.out;
  if (o.format == "csv") spec.format = OutputFormat::Csv;
  if (o.format == "json") spec.format = OutputFormat::Json;
  if (o.format == "both") spec.format = OutputFormat::Both;
  return spec;
}

void put(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

fs::path prepare_dir(const std::string& dir) {
  fs::create_directories(dir);
  return fs::path(dir);
}

void warn_aliasing(double fraction, double eps, bool quiet) {
  if (fraction > kAliasingWarningFraction && !quiet) {
    std::fprintf(stderr, "warning: eps=%g high-mode energy fraction %.3e exceeds %.0e; refine N\n", eps, fraction,
                 kAliasingWarningFraction);
  }
}

int algebra_check(const Options& o) {
  std::ostringstream csv;
  csv << "d,alpha,eps,mu,asym,min_eig\n";
  bool ok = true;
  for (int d = 1; d <= 3; ++d) {
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      for (double mu : {0.5, 1.0, 2.0}) {
        const double min_eig = min_eigen_B(d, eps, mu);
        for (int alpha = 0; alpha < d; ++alpha) {
          SystemMatrices one = build_system(d, eps, mu);
          one.A = {one.A[alpha]};
          const double asym = check_symmetrizes(one);
          ok = ok && asym <= 1e-13 * (mu / eps) && min_eig > 0.0;
          char line[160];
          std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g,%.17g,%.17g\n", d, alpha + 1, eps, mu, asym, min_eig);
          csv << line;
        }
      }
    }
  }
  if (!o.quiet) std::cout << csv.str();
  if (!o.out.empty()) put(prepare_dir(o.out) / "algebra.csv", csv.str());
  return o.check && !ok ? kAssert : kOk;
}

int simulate(const Options& o) {
  const RunSpec spec = load(o);
  const fs::path dir = prepare_dir(spec.output_dir);
  TrajectoryDump dump;
  if (o.system == "relax") {
    const RelaxConfig cfg = spec.relax_config(spec.eps_list.front());
    const EquilState e0 = build_preset(spec);
    const RelaxTrajectory traj = run_relax(well_prepared_init(e0.F_field(), e0.v_field(), cfg), cfg, spec.sample_every);
    warn_aliasing(traj.max_high_mode_fraction, cfg.eps, o.quiet);
    dump = to_dump(traj);
  } else {
    const EquilTrajectory traj = run_equilibrium(build_preset(spec), spec.equil_config(), spec.sample_every);
    dump = to_dump(traj);
  }
  if (o.dump != "binary") {
    std::ofstream os(dir / (o.system + ".csv"));
    write_trajectory_csv(dump, os);
  }
  if (o.dump != "csv") {
    std::ofstream os(dir / (o.system + ".bin"), std::ios::binary);
    write_trajectory_binary(dump, os);
  }
  if (!o.quiet) std::cout << o.system << ": " << dump.times.size() << " samples written to " << dir.string() << "\n";
  return kOk;
}

int converge(const Options& o) {
  const RunSpec spec = load(o);
  const ConvergenceReport report = run_convergence_study(spec);
  write_report(report, spec.output_dir, spec.format);
  bool blown = false;
  for (const auto& row : report.rows) {
    blown = blown || row.blown_up;
    warn_aliasing(row.max_high_mode_fraction, row.eps, o.quiet);
    if (o.quiet) continue;
    if (row.blown_up) {
      std::printf("eps=%-8g blown up: %s\n", row.eps, row.blowup_message.c_str());
    } else {
      std::printf("eps=%-8g sup_E=%.6e sup_phi=%.6e wall=%.2fs\n", row.eps, row.sup_E_sobolev, row.sup_phi, row.wall_s);
    }
  }
  if (!o.quiet) {
    if (report.fit_degenerate) {
      std::printf("fit: degenerate\n");
    } else {
      std::printf("fit: slope_E=%.4f slope_phi=%.4f C_T=%.4e\n", report.fit_E_sobolev->slope, report.fit_phi->slope,
                  report.C_T.value_or(0.0));
    }
  }
  if (blown) return kBlowUp;
  if (o.check) {
    auto in_window = [](const std::optional<RateFit>& f) {
      return f && f->slope >= kSlopeLow && f->slope <= kSlopeHigh;
    };
    if (!in_window(report.fit_E_sobolev) || !in_window(report.fit_phi)) return kAssert;
  }
  return kOk;
}

int modulated_check(const Options& o) {
  const RunSpec spec = load(o);
  const fs::path dir = prepare_dir(spec.output_dir);
  const std::vector<double> times = study_sample_times(spec);
  const EquilTrajectory equil = run_study_equilibrium(spec, times);
  bool ok = true;
  for (std::size_t k = 0; k < spec.eps_list.size(); ++k) {
    const double eps = spec.eps_list[k];
    const EpsilonRun run = run_epsilon(spec, eps, equil);
    if (run.row.blown_up) throw BlowUpError("relaxation run eps=" + std::to_string(eps), run.row.blowup_time);
    warn_aliasing(run.row.max_high_mode_fraction, eps, o.quiet);
    ModulatedParams params;
    params.lambda = spec.lambda;
    params.gamma_bound = 0.0;
    params.mu = spec.mu;
    params.eps = eps;
    const EnergyReport r = modulated_residual(run.relax, equil, params);
    const std::string stem = "modulated_" + std::to_string(k);
    if (spec.format != OutputFormat::Json) put(dir / (stem + ".csv"), energy_report_csv(r));
    if (spec.format != OutputFormat::Csv) put(dir / (stem + ".json"), energy_report_json(r));
    ok = ok && r.C1 > 0.0 && r.C3 > 0.0;
    if (!o.quiet) {
      std::printf("eps=%-8g Gamma=%.4f C1=%.4e C2=%.4e C3=%.4e K1=%.4e K2=%.4e residual_l1=%.4e\n", eps,
                  r.gamma_bound, r.C1, r.C2, r.C3, r.K1, r.K2, r.identity_residual_l1);
    }
  }
  return o.check && !ok ? kAssert : kOk;
}

int memory_check(const Options& o) {
  const RunSpec spec = load(o);
  const fs::path dir = prepare_dir(spec.output_dir);
  const MemoryCheckResult coarse = run_memory_check(spec, spec.history_per_eps);
  const MemoryCheckResult fine = run_memory_check(spec, 2 * spec.history_per_eps);
  const double ratio = fine.max_mismatch > 0.0 ? coarse.max_mismatch / fine.max_mismatch : 0.0;
  if (spec.format != OutputFormat::Json) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "t,mismatch\n";
    for (std::size_t k = 0; k < coarse.times.size(); ++k) csv << coarse.times[k] << ',' << coarse.mismatch[k] << '\n';
    put(dir / "memory.csv", csv.str());
  }
  if (spec.format != OutputFormat::Csv) {
    nlohmann::ordered_json j;
    j["suite_version"] = kSuiteVersion;
    j["eps"] = coarse.eps;
    j["window_start"] = coarse.window_start;
    j["history_dt"] = coarse.history_dt;
    j["max_mismatch"] = coarse.max_mismatch;
    j["history_dt_halved"] = fine.history_dt;
    j["max_mismatch_halved"] = fine.max_mismatch;
    j["ratio"] = ratio;
    put(dir / "memory.json", j.dump(2) + "\n");
  }
  if (!o.quiet) {
    std::printf("eps=%g dt_s=%.4e mismatch=%.4e | dt_s=%.4e mismatch=%.4e | ratio=%.3f\n", coarse.eps,
                coarse.history_dt, coarse.max_mismatch, fine.history_dt, fine.max_mismatch, ratio);
  }
  const bool ok = coarse.max_mismatch <= kMemoryTolerance && ratio >= kMemoryRatio;
  return o.check && !ok ? kAssert : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxation-limit verification suite for viscoelastic flow"};
  app.set_version_flag("--version", std::string(kSuiteVersion));
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub, bool needs_config) {
    if (needs_config) sub->add_option("--config", o.config, "Configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json", "both"}));
    sub->add_flag("--quiet", o.quiet, "Suppress progress output");
    sub->add_flag("--assert", o.check, "Exit with status 4 when the acceptance check fails");
  };

  auto* algebra = app.add_subcommand("algebra-check", "Symmetrizer residuals and minimal eigenvalues");
  common(algebra, false);
  auto* sim = app.add_subcommand("simulate", "Run one solver and dump its trajectory");
  common(sim, true);
  sim->add_option("--system", o.system, "relax or equilibrium")->check(CLI::IsMember({"relax", "equilibrium"}));
  sim->add_option("--dump", o.dump, "Trajectory format")->check(CLI::IsMember({"csv", "binary", "both"}));
  auto* conv = app.add_subcommand("converge", "Epsilon sweep and rate fit");
  common(conv, true);
  auto* mod = app.add_subcommand("modulated-check", "Modulated energy identity and constants");
  common(mod, true);
  auto* mem = app.add_subcommand("memory-check", "Fading-memory representation of the stress");
  common(mem, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*algebra) return algebra_check(o);
    if (*sim) return simulate(o);
    if (*conv) return converge(o);
    if (*mod) return modulated_check(o);
    if (*mem) return memory_check(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ThresholdError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up: " << e.what() << "\n";
    return kBlowUp;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
