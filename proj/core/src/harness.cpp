#include "visco/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "visco/errors.hpp"
#include "visco/spectral.hpp"

namespace visco {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Configuration

RelaxConfig RunSpec::relax_config(double eps) const {
  RelaxConfig cfg;
  cfg.eps = eps;
  cfg.mu = mu;
  cfg.model = model;
  cfg.grid = grid();
  cfg.t_final = t_final;
  cfg.cfl_safety = cfl_safety;
  return cfg;
}

EquilConfig RunSpec::equil_config() const {
  EquilConfig cfg;
  cfg.mu = mu;
  cfg.model = model;
  cfg.grid = grid();
  cfg.t_final = t_final;
  cfg.cfl_safety = cfl_safety;
  return cfg;
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

void RunSpec::validate() const {
  try {
    (void)grid();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(mu > 0.0)) throw ConfigError("mu must be > 0");
  if (!(t_final > 0.0)) throw ConfigError("t_final must be > 0");
  if (!(lambda > 1.0)) throw ConfigError("lambda must be > 1");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("cfl_safety must lie in (0, 1]");
  if (sample_every < 1) throw ConfigError("sample_every must be >= 1");
  if (history_per_eps < 1) throw ConfigError("history_per_eps must be >= 1");
  if (!std::isfinite(amp_a) || !std::isfinite(amp_b)) throw ConfigError("preset amplitudes must be finite");
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (eps_list.empty()) throw ConfigError("eps_list must not be empty");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const double e = eps_list[k];
    if (!(e > 0.0)) throw ConfigError("eps " + fmt(e) + " must be > 0");
    if (!(e < mu / 4.0)) throw ConfigError("eps " + fmt(e) + " >= mu/4");
    if (k > 0 && !(e < eps_list[k - 1])) throw ConfigError("eps_list must be strictly decreasing");
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& value, const std::string& key, int line) {
  double x = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last || !std::isfinite(x)) {
    throw ConfigError("key '" + key + "' expects a number, got '" + value + "'", line);
  }
  return x;
}

long parse_int(const std::string& value, const std::string& key, int line) {
  long x = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + value + "'", line);
  }
  return x;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"grid", {"dim", "N", "L"}},
      {"physics", {"mu", "t_final", "lambda", "cfl_safety"}},
      {"stress", {"model", "kappa", "beta"}},
      {"sweep", {"eps_list", "init_preset", "a", "b", "sample_every", "history_per_eps", "seed"}},
      {"output", {"dir", "format"}},
  };
  return keys;
}

OutputFormat parse_format(const std::string& s, int line) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  if (s == "both") return OutputFormat::Both;
  throw ConfigError("unknown output format '" + s + "'", line);
}

}  // namespace

std::string_view preset_name(InitPreset p) { return p == InitPreset::Zero ? "zero" : "trig_smooth"; }

InitPreset parse_preset(std::string_view name) {
  if (name == "zero") return InitPreset::Zero;
  if (name == "trig_smooth") return InitPreset::TrigSmooth;
  throw ConfigError("unknown init preset '" + std::string(name) + "'");
}

RunSpec parse_config(std::string_view text) {
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> entries;  // "section.key"
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header '" + line + "'", line_no);
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_keys().contains(section)) throw ConfigError("unknown section [" + section + "]", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + line + "'", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) throw ConfigError("key '" + key + "' appears before any section", line_no);
    if (!known_keys().at(section).contains(key)) {
      throw ConfigError("unknown key '" + key + "' in section [" + section + "]", line_no);
    }
    if (value.empty()) throw ConfigError("key '" + key + "' has an empty value", line_no);
    const std::string full = section + "." + key;
    if (entries.contains(full)) throw ConfigError("duplicate key '" + key + "'", line_no);
    entries[full] = {value, line_no};
  }

  auto has = [&](const std::string& k) { return entries.contains(k); };
  auto require = [&](const std::string& k) -> const Entry& {
    auto it = entries.find(k);
    if (it == entries.end()) {
      throw ConfigError("missing required key '" + k.substr(k.find('.') + 1) + "' in section [" +
                        k.substr(0, k.find('.')) + "]");
    }
    return it->second;
  };
  auto number = [&](const std::string& k) {
    const Entry& e = require(k);
    return parse_double(e.value, k.substr(k.find('.') + 1), e.line);
  };
  auto integer = [&](const std::string& k) {
    const Entry& e = require(k);
    return parse_int(e.value, k.substr(k.find('.') + 1), e.line);
  };

  RunSpec spec;
  spec.dim = static_cast<int>(integer("grid.dim"));
  spec.n_points = static_cast<int>(integer("grid.N"));
  if (has("grid.L")) spec.length = number("grid.L");
  spec.mu = number("physics.mu");
  spec.t_final = number("physics.t_final");
  if (has("physics.lambda")) spec.lambda = number("physics.lambda");
  if (has("physics.cfl_safety")) spec.cfl_safety = number("physics.cfl_safety");

  const Entry& model = require("stress.model");
  const double kappa = number("stress.kappa");
  if (model.value == "linear") {
    spec.model = StressModel{StressKind::Linear, kappa, 0.0};
  } else if (model.value == "cubic") {
    spec.model = StressModel{StressKind::Cubic, kappa, number("stress.beta")};
  } else {
    throw ConfigError("unknown stress model '" + model.value + "'", model.line);
  }

  const Entry& eps = require("sweep.eps_list");
  std::stringstream list(eps.value);
  std::string item;
  while (std::getline(list, item, ',')) spec.eps_list.push_back(parse_double(trim(item), "eps_list", eps.line));
  if (has("sweep.init_preset")) {
    const Entry& e = require("sweep.init_preset");
    try {
      spec.init_preset = parse_preset(e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(err.what(), e.line);
    }
  }
  if (has("sweep.a")) spec.amp_a = number("sweep.a");
  if (has("sweep.b")) spec.amp_b = number("sweep.b");
  if (has("sweep.sample_every")) spec.sample_every = static_cast<int>(integer("sweep.sample_every"));
  if (has("sweep.history_per_eps")) spec.history_per_eps = static_cast<int>(integer("sweep.history_per_eps"));
  if (has("sweep.seed")) spec.seed = static_cast<std::uint64_t>(integer("sweep.seed"));
  if (has("output.dir")) spec.output_dir = require("output.dir").value;
  if (has("output.format")) spec.format = parse_format(require("output.format").value, require("output.format").line);

  spec.validate();
  return spec;
}

RunSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Presets and sweeps

EquilState build_preset(const RunSpec& spec) {
  const PeriodicGrid grid = spec.grid();
  EquilState state(grid);
  if (spec.init_preset == InitPreset::Zero) return state;
  const double a = spec.amp_a, b = spec.amp_b;
  for (int i = 0; i < grid.dim; ++i) {
    state.F(i, i) = ScalarField::from_function(grid, [&](const auto& x) { return a * std::cos(x[i]); });
    state.v(i) = ScalarField::from_function(grid, [&](const auto& x) { return b * std::sin(x[0]); });
  }
  return state;
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("rate fit needs at least 3 points");
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs, ys;
  for (const auto& [eps, value] : points) {
    if (!(eps > 0.0) || !(value > 0.0)) throw std::invalid_argument("rate fit needs positive eps and values");
    xs.push_back(std::log(eps));
    ys.push_back(std::log(value));
    sx += xs.back();
    sy += ys.back();
  }
  const double n = static_cast<double>(xs.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("rate fit needs distinct eps values");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    fit.max_residual = std::max(fit.max_residual, std::abs(ys[k] - (fit.intercept + fit.slope * xs[k])));
  }
  return fit;
}

double study_finest_dt(const RunSpec& spec) {
  const double k_max = spec.grid().k_max();
  double dt = std::numeric_limits<double>::infinity();
  for (double eps : spec.eps_list) dt = std::min(dt, relax_stable_dt(eps, spec.mu, k_max, spec.cfl_safety));
  return dt;
}

std::vector<double> study_sample_times(const RunSpec& spec) {
  const double interval = spec.sample_every * study_finest_dt(spec);
  const long n = std::max(2L, static_cast<long>(std::ceil(spec.t_final / interval - 1e-12)));
  std::vector<double> times(static_cast<std::size_t>(n) + 1);
  for (long k = 0; k <= n; ++k) times[k] = spec.t_final * static_cast<double>(k) / static_cast<double>(n);
  return times;
}

EquilTrajectory run_study_equilibrium(const RunSpec& spec, const std::vector<double>& times) {
  return run_equilibrium_sampled(build_preset(spec), spec.equil_config(), times, study_finest_dt(spec));
}

namespace {

double mean_drift(const FieldBundle& first, const FieldBundle& now, int components) {
  double worst = 0.0;
  for (int c = 0; c < components; ++c) {
    const double m0 = first.component(c).mean();
    double scale = std::max(std::abs(m0), field_linf(first.component(c)));
    if (scale == 0.0) scale = 1.0;
    worst = std::max(worst, std::abs(now.component(c).mean() - m0) / scale);
  }
  return worst;
}

}  // namespace

EpsilonRun run_epsilon(const RunSpec& spec, double eps, const EquilTrajectory& equil) {
  const auto start = std::chrono::steady_clock::now();
  EpsilonRun run;
  run.row.eps = eps;
  const RelaxConfig cfg = spec.relax_config(eps);
  const EquilState& e0 = equil.states.front();
  const StateField init = well_prepared_init(e0.F_field(), e0.v_field(), cfg);
  try {
    run.relax = run_relax_sampled(init, cfg, equil.times, study_finest_dt(spec));
    const int d = cfg.grid.dim;
    for (std::size_t k = 0; k < run.relax.times.size(); ++k) {
      const DiffState W = make_diff_state(run.relax.states[k], equil.states[k], cfg.model, cfg.mu);
      const double E = energy_sobolev(W, eps, cfg.mu);
      const double phi = phi_eps(W, eps);
      if (k == 0) run.row.E_sobolev_0 = E;
      run.row.sup_E_sobolev = std::max(run.row.sup_E_sobolev, E);
      run.row.sup_phi = std::max(run.row.sup_phi, phi);
      run.row.mean_drift =
          std::max(run.row.mean_drift, mean_drift(run.relax.states.front(), run.relax.states[k], d * d + d));
    }
    run.row.max_high_mode_fraction = run.relax.max_high_mode_fraction;
  } catch (const BlowUpError& e) {
    run.row = ConvergenceRow{};
    run.row.eps = eps;
    run.row.blown_up = true;
    run.row.blowup_time = e.last_finite_time();
    run.row.blowup_message = e.what();
  }
  run.row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

ConvergenceReport run_convergence_study(const RunSpec& spec) {
  spec.validate();
  ConvergenceReport report;
  report.spec = spec;
  const std::vector<double> times = study_sample_times(spec);
  const EquilTrajectory equil = run_study_equilibrium(spec, times);

  std::vector<std::future<ConvergenceRow>> jobs;
  for (double eps : spec.eps_list) {
    jobs.push_back(std::async(std::launch::async, [&spec, &equil, eps] { return run_epsilon(spec, eps, equil).row; }));
  }
  for (auto& job : jobs) report.rows.push_back(job.get());

  std::vector<std::pair<double, double>> pts_E, pts_phi;
  for (const auto& row : report.rows) {
    if (row.blown_up) continue;
    pts_E.emplace_back(row.eps, row.sup_E_sobolev);
    pts_phi.emplace_back(row.eps, row.sup_phi);
    const double ct = row.sup_E_sobolev / (row.eps * row.eps);
    report.C_T = report.C_T ? std::max(*report.C_T, ct) : ct;
  }
  auto fittable = [](const std::vector<std::pair<double, double>>& pts) {
    return pts.size() >= 3 && std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.second > 0.0; });
  };
  if (fittable(pts_E)) report.fit_E_sobolev = fit_rate(pts_E);
  if (fittable(pts_phi)) report.fit_phi = fit_rate(pts_phi);
  report.fit_degenerate = !report.fit_E_sobolev || !report.fit_phi;
  return report;
}

MemoryCheckResult run_memory_check(const RunSpec& spec, int history_per_eps) {
  spec.validate();
  if (history_per_eps < 1) throw std::invalid_argument("history_per_eps must be >= 1");
  MemoryCheckResult res;
  res.eps = spec.eps_list.front();
  const long n = static_cast<long>(std::ceil(spec.t_final * history_per_eps / res.eps - 1e-12));
  res.history_dt = spec.t_final / static_cast<double>(n);
  res.window_start = 5.0 * res.eps;
  std::vector<double> times(static_cast<std::size_t>(n) + 1);
  for (long k = 0; k <= n; ++k) times[k] = spec.t_final * static_cast<double>(k) / static_cast<double>(n);

  const RelaxConfig cfg = spec.relax_config(res.eps);
  const EquilState e0 = build_preset(spec);
  const RelaxTrajectory traj = run_relax_sampled(well_prepared_init(e0.F_field(), e0.v_field(), cfg), cfg, times);
  std::vector<MatrixField> F_hist;
  F_hist.reserve(traj.states.size());
  for (const auto& s : traj.states) F_hist.push_back(s.F_field());

  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < res.window_start - 1e-12) continue;
    MatrixField S_kernel = memory_kernel_S(times, F_hist, res.eps, cfg.mu, cfg.model, times[k]);
    S_kernel -= traj.states[k].S_field();
    const double mismatch = S_kernel.max_abs();
    res.times.push_back(times[k]);
    res.mismatch.push_back(mismatch);
    res.max_mismatch = std::max(res.max_mismatch, mismatch);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

ordered_json spec_json(const RunSpec& s) {
  ordered_json j;
  j["dim"] = s.dim;
  j["N"] = s.n_points;
  j["L"] = s.length;
  j["mu"] = s.mu;
  j["stress"] = {{"model", s.model.kind == StressKind::Linear ? "linear" : "cubic"},
                 {"kappa", s.model.kappa},
                 {"beta", s.model.beta}};
  j["eps_list"] = s.eps_list;
  j["t_final"] = s.t_final;
  j["lambda"] = s.lambda;
  j["cfl_safety"] = s.cfl_safety;
  j["init_preset"] = std::string(preset_name(s.init_preset));
  j["a"] = s.amp_a;
  j["b"] = s.amp_b;
  j["sample_every"] = s.sample_every;
  j["history_per_eps"] = s.history_per_eps;
  j["seed"] = s.seed;
  return j;
}

RunSpec spec_from_json(const ordered_json& j) {
  RunSpec s;
  s.dim = j.at("dim").get<int>();
  s.n_points = j.at("N").get<int>();
  s.length = j.at("L").get<double>();
  s.mu = j.at("mu").get<double>();
  const auto& st = j.at("stress");
  s.model.kind = st.at("model").get<std::string>() == "linear" ? StressKind::Linear : StressKind::Cubic;
  s.model.kappa = st.at("kappa").get<double>();
  s.model.beta = st.at("beta").get<double>();
  s.eps_list = j.at("eps_list").get<std::vector<double>>();
  s.t_final = j.at("t_final").get<double>();
  s.lambda = j.at("lambda").get<double>();
  s.cfl_safety = j.at("cfl_safety").get<double>();
  s.init_preset = parse_preset(j.at("init_preset").get<std::string>());
  s.amp_a = j.at("a").get<double>();
  s.amp_b = j.at("b").get<double>();
  s.sample_every = j.at("sample_every").get<int>();
  s.history_per_eps = j.at("history_per_eps").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

ordered_json fit_json(const std::optional<RateFit>& f) {
  if (!f) return nullptr;
  return ordered_json{{"slope", f->slope}, {"intercept", f->intercept}, {"max_residual", f->max_residual}};
}

std::optional<RateFit> fit_from_json(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  return RateFit{j.at("slope").get<double>(), j.at("intercept").get<double>(), j.at("max_residual").get<double>()};
}

std::string csv_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

std::string spec_to_json(const RunSpec& spec) { return spec_json(spec).dump(2); }

std::string convergence_csv(const ConvergenceReport& report) {
  std::ostringstream os;
  os << "eps,sup_E_sobolev,sup_phi,wall_s,blown_up\n";
  for (const auto& r : report.rows) {
    os << csv_number(r.eps) << ',' << csv_number(r.sup_E_sobolev) << ',' << csv_number(r.sup_phi) << ','
       << csv_number(r.wall_s) << ',' << (r.blown_up ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string convergence_json(const ConvergenceReport& report) {
  ordered_json j;
  j["suite_version"] = kSuiteVersion;
  j["config"] = spec_json(report.spec);
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"eps", r.eps},
                    {"sup_E_sobolev", r.sup_E_sobolev},
                    {"sup_phi", r.sup_phi},
                    {"E_sobolev_0", r.E_sobolev_0},
                    {"mean_drift", r.mean_drift},
                    {"max_high_mode_fraction", r.max_high_mode_fraction},
                    {"blown_up", r.blown_up},
                    {"blowup_time", r.blowup_time},
                    {"blowup_message", r.blowup_message}});
  }
  j["rows"] = std::move(rows);
  j["fit"] = {{"E_sobolev", fit_json(report.fit_E_sobolev)}, {"phi", fit_json(report.fit_phi)}};
  j["fit_degenerate"] = report.fit_degenerate;
  j["C_T"] = report.C_T ? ordered_json(*report.C_T) : ordered_json(nullptr);
  return j.dump(2) + "\n";
}

ConvergenceReport convergence_from_json(std::string_view text) {
  const ordered_json j = ordered_json::parse(text);
  ConvergenceReport report;
  report.spec = spec_from_json(j.at("config"));
  for (const auto& r : j.at("rows")) {
    ConvergenceRow row;
    row.eps = r.at("eps").get<double>();
    row.sup_E_sobolev = r.at("sup_E_sobolev").get<double>();
    row.sup_phi = r.at("sup_phi").get<double>();
    row.E_sobolev_0 = r.at("E_sobolev_0").get<double>();
    row.mean_drift = r.at("mean_drift").get<double>();
    row.max_high_mode_fraction = r.at("max_high_mode_fraction").get<double>();
    row.blown_up = r.at("blown_up").get<bool>();
    row.blowup_time = r.at("blowup_time").get<double>();
    row.blowup_message = r.at("blowup_message").get<std::string>();
    report.rows.push_back(std::move(row));
  }
  report.fit_E_sobolev = fit_from_json(j.at("fit").at("E_sobolev"));
  report.fit_phi = fit_from_json(j.at("fit").at("phi"));
  report.fit_degenerate = j.at("fit_degenerate").get<bool>();
  if (!j.at("C_T").is_null()) report.C_T = j.at("C_T").get<double>();
  return report;
}

std::string energy_report_csv(const EnergyReport& r) {
  std::ostringstream os;
  os << "t,E_eps,E_sobolev,phi,H_rm\n";
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    os << csv_number(r.times[k]) << ',' << csv_number(r.E_eps[k]) << ',' << csv_number(r.E_sobolev[k]) << ','
       << csv_number(r.phi[k]) << ',' << csv_number(r.H_rm_integral[k]) << '\n';
  }
  return os.str();
}

std::string energy_report_json(const EnergyReport& r) {
  ordered_json j;
  j["suite_version"] = kSuiteVersion;
  j["eps"] = r.eps;
  j["mu"] = r.mu;
  j["lambda"] = r.lambda;
  j["Gamma"] = r.gamma_bound;
  j["samples"] = r.times.size();
  j["constants"] = {{"C1", r.C1}, {"C2", r.C2}, {"C3", r.C3}, {"K1", r.K1}, {"K2", r.K2}};
  j["residuals"] = {{"identity_l1", r.identity_residual_l1}, {"max_flux_integral", r.max_flux_integral}};
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_report(const ConvergenceReport& report, const std::filesystem::path& dir,
                                                OutputFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
    written.push_back(path);
  };
  if (format != OutputFormat::Json) put(dir / "report.csv", convergence_csv(report));
  if (format != OutputFormat::Csv) put(dir / "report.json", convergence_json(report));
  return written;
}

}  // namespace visco
