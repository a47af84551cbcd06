#include "hfke/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hfke/io.hpp"

namespace hfke {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::ofstream open_csv(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot open " + (dir / name).string());
  return out;
}

double l2_error_against(const CoeffVector& c, const std::function<double(double)>& exact) {
  const QuadratureRule ref = reference_rule(c.spec);
  const Eigen::MatrixXd psi = basis_node_matrix(c.spec, ref);
  const Eigen::VectorXd num = psi.transpose() * c.values;
  double acc = 0.0;
  for (int j = 0; j < ref.size(); ++j) {
    const double x = c.spec.beta + ref.nodes[static_cast<std::size_t>(j)] / c.spec.alpha;
    const double r = num[j] - exact(x);
    acc += ref.modified_weights[static_cast<std::size_t>(j)] * r * r;
  }
  return std::sqrt(acc / c.spec.alpha);
}

StepperConfig stepper_from(const ExperimentConfig& cfg) {
  StepperConfig st;
  const std::string scheme = cfg.scheme.value_or("cn");
  st.scheme = scheme == "explicit" ? TimeScheme::explicit_central : TimeScheme::crank_nicolson;
  st.dt = cfg.dt.value_or(st.scheme == TimeScheme::explicit_central ? 1e-5 : 1e-4);
  return st;
}

struct SummaryWriter {
  std::ofstream out;
  explicit SummaryWriter(const fs::path& dir) : out(open_csv(dir, "summary.csv")) {
    out << "key,value\n";
  }
  void add(const std::string& key, const std::string& value) {
    out << key << ',' << value << '\n';
  }
  void add(const std::string& key, double value) { add(key, format_double(value)); }
  void add(const std::string& key, std::uint64_t value) { add(key, std::to_string(value)); }
};

}  // namespace

NamedModel make_named_model(const std::string& name) {
  NamedModel nm;
  nm.model.Q = [](double) { return 1.0; };
  nm.model.S = [](double) { return 1.0; };
  nm.model.f = [](double, double) { return 0.0; };
  nm.model.g = [](double, double) { return 1.0; };
  nm.model.f_x = [](double, double) { return 0.0; };
  nm.model.g_x = [](double, double) { return 0.0; };
  nm.model.g_xx = [](double, double) { return 0.0; };

  if (name == "linear") {
    nm.model.h = [](double x, double) { return x; };
    nm.model.sigma0 = [](double x) { return std::exp(-0.5 * x * x); };
    nm.profile = {0.5, 2.0};
    nm.x0 = {InitialState::Kind::gaussian, 0.0, 0.0, 1.0};
    nm.default_domain = 8.0;
  } else if (name == "almost_linear") {
    nm.model.h = [](double x, double) { return x * (1.0 + 0.25 * std::cos(x)); };
    nm.model.sigma0 = [](double x) { return std::exp(-0.5 * x * x); };
    nm.profile = {0.5, 2.0};
    nm.x0 = {InitialState::Kind::gaussian, 0.0, 0.0, 1.0};
    nm.default_domain = 17.0;
  } else if (name == "cubic") {
    nm.model.h = [](double x, double) { return x * x * x; };
    nm.model.sigma0 = [](double x) { return std::exp(-0.25 * x * x * x * x); };
    nm.profile = {0.25, 4.0};
    nm.x0 = {InitialState::Kind::quartic, 0.0, 0.0, 1.0};
    nm.default_domain = 3.0;
  } else {
    throw std::invalid_argument("unknown model '" + name + "' (expected linear, cubic or almost_linear)");
  }
  return nm;
}

void run_scaling_demo(const ExperimentConfig& cfg, std::ostream& log) {
  const auto start = Clock::now();
  auto f = [](double x) { return std::cos(x / 10.0) * std::exp(-5.0 * x * x); };
  auto out = open_csv(cfg.out_dir, "scaling_demo.csv");
  out << "n_modes,alpha,error\n";
  for (int n = 2; n <= 40; n += 2) {
    for (double alpha : {1.0, 3.1, 4.0}) {
      const BasisSpec spec{alpha, 0.0, n};
      const double err = truncation_error(f, spec, reference_rule(spec));
      out << n << ',' << format_double(alpha) << ',' << format_double(err) << '\n';
    }
  }
  log << "[timing] scaling_demo: " << seconds_since(start) << " s\n";
}

void run_convergence(const ExperimentConfig& cfg, std::ostream& log) {
  const auto start = Clock::now();
  const double alpha = cfg.alpha.value_or(1.4);
  const double horizon = cfg.horizon.value_or(0.1);
  const StepperConfig st = stepper_from(cfg);

  CanonicalFke fke;
  fke.nu = 1.0;
  fke.potential = [](double x, double) { return -x * x; };
  fke.source = [](double x, double t) {
    return (std::sin(t) + std::cos(t) + 3.0 * x) * std::exp(-0.5 * x * x);
  };
  fke.time_dependent_source = true;

  auto out = open_csv(cfg.out_dir, "convergence.csv");
  out << "n_modes,l2_error\n";
  for (int n : {5, 15, 25, 35, 45}) {
    const BasisSpec spec{alpha, 0.0, n};
    const CoeffVector u0 =
        project([](double x) { return x * std::exp(-0.5 * x * x); }, spec, projection_rule(spec));
    const CoeffVector uT = solve(fke, u0, 0.0, horizon, st);
    const double err = l2_error_against(uT, [horizon](double x) {
      return (x + std::sin(horizon)) * std::exp(-0.5 * x * x);
    });
    out << n << ',' << format_double(err) << '\n';
  }
  log << "[timing] convergence: " << seconds_since(start) << " s\n";
}

void run_translate_table(const ExperimentConfig& cfg, std::ostream& log) {
  const auto start = Clock::now();
  const double alpha = cfg.alpha.value_or(1.0);
  const int n = cfg.n_modes.value_or(24);
  auto out = open_csv(cfg.out_dir, "translate_table.csv");
  out << "p0,error_0,error_3\n";
  for (int p0 = -1; p0 <= 4; ++p0) {
    auto f = [p0](double x) { return std::exp(-0.5 * (x - p0) * (x - p0)); };
    const BasisSpec at0{alpha, 0.0, n};
    const BasisSpec at3{alpha, 3.0, n};
    out << p0 << ',' << format_double(truncation_error(f, at0, reference_rule(at0))) << ','
        << format_double(truncation_error(f, at3, reference_rule(at3))) << '\n';
  }
  log << "[timing] translate_table: " << seconds_since(start) << " s\n";
}

namespace {

struct FilterRun {
  NamedModel nm;
  Path obs;             // truth at the observation clock
  WindowBank bank;
  OnlineResult online;
  BankSaveInfo bank_info;
  double offline_seconds = 0.0;
  double online_seconds = 0.0;
};

FilterRun execute_filter(const ExperimentConfig& cfg, const std::string& model_name,
                         std::ostream& log) {
  FilterRun run;
  run.nm = make_named_model(model_name);

  const double dt_obs = cfg.dt_obs.value_or(0.01);
  const double horizon = cfg.horizon.value();
  const int substeps = cfg.sim_substeps.value_or(10);

  BankBuildOptions opt;
  opt.tolerance = cfg.tolerance.value_or(1e-5);
  opt.overlap = cfg.overlap.value_or(0.5);
  opt.dt_obs = dt_obs;
  opt.substeps = stepper_from(cfg);
  opt.shift_threshold = cfg.shift_threshold;
  opt.alpha_override = cfg.alpha;
  opt.n_modes_override = cfg.n_modes;
  opt.parallel = cfg.parallel_offline.value_or(false);

  const auto offline_start = Clock::now();
  run.bank = build_window_bank(run.nm.model, run.nm.profile,
                               cfg.domain.value_or(run.nm.default_domain), opt);
  run.offline_seconds = seconds_since(offline_start);

  SimConfig sim;
  sim.model = run.nm.model;
  sim.x0 = run.nm.x0;
  sim.dt = dt_obs / substeps;
  sim.horizon = horizon;
  sim.seed = cfg.seed.value();
  const Path fine = simulate_path(sim);
  run.obs = downsample(fine, substeps);

  std::vector<double> observations(run.obs.observations.begin() + 1,
                                   run.obs.observations.end());
  OnlineOptions oo;
  oo.recover_density = cfg.recover_density.value_or(false);
  oo.snapshot_interval = cfg.snapshot_interval.value_or(1.0);
  oo.snapshot_points = cfg.snapshot_points.value_or(201);

  const auto online_start = Clock::now();
  run.online = run_online(run.bank, run.nm.model, observations, oo);
  run.online_seconds = seconds_since(online_start);

  const fs::path dir = cfg.out_dir;
  save_path_csv(run.obs, dir / "path.csv");
  save_online_csv(run.online, dir / "estimates.csv");
  save_shifts_csv(run.online.shifts, dir / "shifts.csv");
  run.bank_info = save_bank(run.bank, dir / "bank.bin", dir / "bank_manifest.csv");
  if (oo.recover_density) save_snapshots_csv(run.online.snapshots, dir / "snapshots.csv");

  const auto k = observations.size();
  log << "[timing] offline bank (" << run.bank.window_count()
      << " windows): " << run.offline_seconds << " s\n";
  log << "[timing] online loop (" << k << " steps): " << run.online_seconds << " s ("
      << (k ? run.online_seconds / static_cast<double>(k) : 0.0) << " s/step)\n";
  return run;
}

void write_filter_summary(SummaryWriter& summary, const ExperimentConfig& cfg,
                          const FilterRun& run) {
  const std::vector<double> truth(run.obs.states.begin() + 1, run.obs.states.end());
  summary.add("experiment", to_string(cfg.experiment));
  summary.add("steps", static_cast<std::uint64_t>(run.online.t.size()));
  summary.add("n_modes", static_cast<std::uint64_t>(run.bank.n_modes()));
  summary.add("window_count", static_cast<std::uint64_t>(run.bank.window_count()));
  summary.add("window_half_width", run.bank.half_width);
  summary.add("storage_entries", static_cast<std::uint64_t>(run.bank.storage_entries()));
  summary.add("bank_file_bytes", static_cast<std::uint64_t>(run.bank_info.file_bytes));
  summary.add("matvec_flops", run.online.matvec_flops);
  summary.add("shift_count",
              static_cast<std::uint64_t>(run.online.shifts.size()));
  summary.add("rmse_spectral", rmse(run.online.mean, truth));
}

}  // namespace

void run_filter(const ExperimentConfig& cfg, std::ostream& log) {
  std::string model_name;
  switch (cfg.experiment) {
    case ExperimentKind::filter_almost_linear: model_name = "almost_linear"; break;
    case ExperimentKind::filter_cubic: model_name = "cubic"; break;
    default: model_name = cfg.model.value(); break;
  }
  const FilterRun run = execute_filter(cfg, model_name, log);
  SummaryWriter summary(cfg.out_dir);
  write_filter_summary(summary, cfg, run);
}

void run_compare(const ExperimentConfig& cfg, std::ostream& log) {
  const std::string model_name = cfg.model.value_or("cubic");
  const FilterRun run = execute_filter(cfg, model_name, log);

  const int n_particles = cfg.n_particles.value();
  const double dt_obs = cfg.dt_obs.value_or(0.01);
  const auto pf_start = Clock::now();
  const PfResult pf =
      run_pf(run.nm.model, run.obs, n_particles, dt_obs, cfg.seed.value(), run.nm.x0);
  const double pf_seconds = seconds_since(pf_start);
  log << "[timing] particle filter (" << n_particles << " particles): " << pf_seconds << " s\n";

  save_pf_csv(pf, fs::path(cfg.out_dir) / "pf_estimates.csv");

  SummaryWriter summary(cfg.out_dir);
  write_filter_summary(summary, cfg, run);
  const std::vector<double> truth(run.obs.states.begin() + 1, run.obs.states.end());
  summary.add("n_particles", static_cast<std::uint64_t>(n_particles));
  summary.add("rmse_pf", rmse(pf.mean, truth));
  std::uint64_t resamples = 0;
  for (int r : pf.resampled) resamples += static_cast<std::uint64_t>(r);
  summary.add("pf_resamples", resamples);
}

void run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  switch (cfg.experiment) {
    case ExperimentKind::scaling_demo: run_scaling_demo(cfg, log); break;
    case ExperimentKind::convergence: run_convergence(cfg, log); break;
    case ExperimentKind::translate_table: run_translate_table(cfg, log); break;
    case ExperimentKind::filter_almost_linear:
    case ExperimentKind::filter_cubic:
    case ExperimentKind::filter_custom: run_filter(cfg, log); break;
    case ExperimentKind::compare_pf: run_compare(cfg, log); break;
  }
}

}  // namespace hfke
