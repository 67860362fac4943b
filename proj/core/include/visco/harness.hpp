#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "visco/energy_diagnostics.hpp"
#include "visco/equilibrium_solver.hpp"
#include "visco/fields.hpp"
#include "visco/relax_solver.hpp"
#include "visco/stress_models.hpp"

namespace visco {

inline constexpr const char* kSuiteVersion = VISCO_VERSION;

enum class InitPreset { Zero, TrigSmooth };
enum class OutputFormat { Csv, Json, Both };

struct RunSpec {
  int dim = 1;
  int n_points = 64;
  double length = 2.0 * std::numbers::pi;
  double mu = 1.0;
  StressModel model;
  std::vector<double> eps_list;
  double t_final = 0.5;
  double lambda = 2.0;
  double cfl_safety = 0.5;
  InitPreset init_preset = InitPreset::TrigSmooth;
  double amp_a = 0.1;
  double amp_b = 0.1;
  int sample_every = 10;
  /// History samples per relaxation time eps used by the memory-kernel check.
  int history_per_eps = 40;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  OutputFormat format = OutputFormat::Both;

  PeriodicGrid grid() const { return PeriodicGrid(dim, n_points, length); }
  RelaxConfig relax_config(double eps) const;
  EquilConfig equil_config() const;
  /// Throws ConfigError naming the violated invariant.
  void validate() const;
};

/// Parses a sectioned `key = value` document ([grid], [physics], [stress], [sweep], [output]).
/// `#` starts a comment. Unknown sections or keys are rejected.
RunSpec parse_config(std::string_view text);
RunSpec load_config(const std::filesystem::path& path);

std::string_view preset_name(InitPreset p);
InitPreset parse_preset(std::string_view name);

/// Equilibrium initial data:
///   zero:        all fields 0
///   trig_smooth: F_{i alpha} = a delta_{i alpha} cos(x_alpha), v_i = b sin(x_1)
EquilState build_preset(const RunSpec& spec);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;

  bool operator==(const RateFit&) const = default;
};

/// Least-squares line through (log eps, log value). Needs >= 3 points, all positive.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

struct ConvergenceRow {
  double eps = 0.0;
  double sup_E_sobolev = 0.0;
  double sup_phi = 0.0;
  double E_sobolev_0 = 0.0;
  /// Worst drift of the spatial means of F and v, relative to max(|mean_0|, ||f_0||_inf).
  double mean_drift = 0.0;
  double max_high_mode_fraction = 0.0;
  double wall_s = 0.0;
  bool blown_up = false;
  double blowup_time = 0.0;
  std::string blowup_message;

  bool operator==(const ConvergenceRow&) const = default;
};

struct ConvergenceReport {
  RunSpec spec;
  std::vector<ConvergenceRow> rows;  // eps descending
  std::optional<RateFit> fit_E_sobolev;
  std::optional<RateFit> fit_phi;
  bool fit_degenerate = false;
  std::optional<double> C_T;
};

/// Everything produced for one eps of a study, kept for follow-up diagnostics.
struct EpsilonRun {
  ConvergenceRow row;
  RelaxTrajectory relax;
};

/// Shared sample times of a study: uniform, spacing close to sample_every * finest dt.
std::vector<double> study_sample_times(const RunSpec& spec);
/// Finest relaxation step of the sweep; the equilibrium run never steps coarser.
double study_finest_dt(const RunSpec& spec);

EquilTrajectory run_study_equilibrium(const RunSpec& spec, const std::vector<double>& times);

/// Runs the relaxation system for one eps from well-prepared data and measures
/// the energies against the shared equilibrium trajectory.
EpsilonRun run_epsilon(const RunSpec& spec, double eps, const EquilTrajectory& equil);

ConvergenceReport run_convergence_study(const RunSpec& spec);

struct MemoryCheckResult {
  double eps = 0.0;
  double history_dt = 0.0;
  double window_start = 0.0;
  double max_mismatch = 0.0;
  std::vector<double> times;
  std::vector<double> mismatch;
};

/// Compares the evolved S with the memory-kernel quadrature on [5 eps, T] for
/// the first entry of eps_list, sampling the history every eps / history_per_eps.
MemoryCheckResult run_memory_check(const RunSpec& spec, int history_per_eps);

/// Rows with eps, sup_E_sobolev, sup_phi, wall_s, blown_up.
std::string convergence_csv(const ConvergenceReport& report);
/// Deterministic JSON; wall-clock times are left out so identical inputs give identical bytes.
std::string convergence_json(const ConvergenceReport& report);
ConvergenceReport convergence_from_json(std::string_view text);

std::string energy_report_csv(const EnergyReport& report);
std::string energy_report_json(const EnergyReport& report);

std::string spec_to_json(const RunSpec& spec);

/// Writes report.csv / report.json (per format) into dir; returns the paths written.
std::vector<std::filesystem::path> write_report(const ConvergenceReport& report,
                                                const std::filesystem::path& dir, OutputFormat format);

}  // namespace visco
