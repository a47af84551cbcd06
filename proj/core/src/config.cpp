#include "hfke/config.hpp"

#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "hfke/io.hpp"

namespace hfke {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: boolean expected for " + key + ", got '" + v + "'");
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::scaling_demo: return "scaling_demo";
    case ExperimentKind::convergence: return "convergence";
    case ExperimentKind::translate_table: return "translate_table";
    case ExperimentKind::filter_almost_linear: return "filter_almost_linear";
    case ExperimentKind::filter_cubic: return "filter_cubic";
    case ExperimentKind::filter_custom: return "filter_custom";
    case ExperimentKind::compare_pf: return "compare_pf";
  }
  throw std::logic_error("unknown experiment kind");
}

ExperimentKind experiment_from_string(const std::string& name) {
  for (ExperimentKind kind :
       {ExperimentKind::scaling_demo, ExperimentKind::convergence, ExperimentKind::translate_table,
        ExperimentKind::filter_almost_linear, ExperimentKind::filter_cubic,
        ExperimentKind::filter_custom, ExperimentKind::compare_pf}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("config: unknown experiment '" + name + "'");
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  out << '[' << to_string(experiment) << "]\n";
  out << "out = " << out_dir << '\n';
  auto emit_d = [&out](const char* key, const std::optional<double>& v) {
    if (v) out << key << " = " << format_double(*v) << '\n';
  };
  auto emit_i = [&out](const char* key, const std::optional<int>& v) {
    if (v) out << key << " = " << *v << '\n';
  };
  auto emit_b = [&out](const char* key, const std::optional<bool>& v) {
    if (v) out << key << " = " << (*v ? "true" : "false") << '\n';
  };
  emit_d("alpha", alpha);
  emit_d("beta", beta);
  emit_i("n_modes", n_modes);
  emit_d("dt", dt);
  emit_d("dt_obs", dt_obs);
  emit_d("horizon", horizon);
  emit_d("tolerance", tolerance);
  emit_d("overlap", overlap);
  emit_d("domain", domain);
  emit_d("shift_threshold", shift_threshold);
  emit_i("n_particles", n_particles);
  if (seed) out << "seed = " << *seed << '\n';
  if (model) out << "model = " << *model << '\n';
  if (scheme) out << "scheme = " << *scheme << '\n';
  emit_d("snapshot_interval", snapshot_interval);
  emit_i("snapshot_points", snapshot_points);
  emit_i("sim_substeps", sim_substeps);
  emit_b("recover_density", recover_density);
  emit_b("parallel_offline", parallel_offline);
  return out.str();
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig cfg;
  bool have_section = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config: malformed section at line " + std::to_string(line_no));
      if (have_section)
        throw std::invalid_argument("config: multiple sections (one experiment per file)");
      cfg.experiment = experiment_from_string(trim(line.substr(1, line.size() - 2)));
      have_section = true;
      continue;
    }
    if (!have_section)
      throw std::invalid_argument("config: key before the [experiment] section at line " +
                                  std::to_string(line_no));

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value at line " + std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty())
      throw std::invalid_argument("config: empty value for '" + key + "'");

    try {
      if (key == "out") cfg.out_dir = value;
      else if (key == "alpha") cfg.alpha = std::stod(value);
      else if (key == "beta") cfg.beta = std::stod(value);
      else if (key == "n_modes") cfg.n_modes = std::stoi(value);
      else if (key == "dt") cfg.dt = std::stod(value);
      else if (key == "dt_obs") cfg.dt_obs = std::stod(value);
      else if (key == "horizon") cfg.horizon = std::stod(value);
      else if (key == "tolerance") cfg.tolerance = std::stod(value);
      else if (key == "overlap") cfg.overlap = std::stod(value);
      else if (key == "domain") cfg.domain = std::stod(value);
      else if (key == "shift_threshold") cfg.shift_threshold = std::stod(value);
      else if (key == "n_particles") cfg.n_particles = std::stoi(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "model") cfg.model = value;
      else if (key == "scheme") cfg.scheme = value;
      else if (key == "snapshot_interval") cfg.snapshot_interval = std::stod(value);
      else if (key == "snapshot_points") cfg.snapshot_points = std::stoi(value);
      else if (key == "sim_substeps") cfg.sim_substeps = std::stoi(value);
      else if (key == "recover_density") cfg.recover_density = parse_bool(value, key);
      else if (key == "parallel_offline") cfg.parallel_offline = parse_bool(value, key);
      else throw std::invalid_argument("config: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("config: cannot parse value for '" + key + "' at line " +
                                  std::to_string(line_no));
    }
  }
  if (!have_section) throw std::invalid_argument("config: missing [experiment] section");
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  return parse(in);
}

void ExperimentConfig::validate() const {
  auto require_positive = [](const std::optional<double>& v, const char* name) {
    if (v && !(*v > 0.0))
      throw std::invalid_argument(std::string("config: ") + name + " must be positive");
  };
  require_positive(dt, "dt");
  require_positive(dt_obs, "dt_obs");
  require_positive(horizon, "horizon");
  require_positive(tolerance, "tolerance");
  require_positive(snapshot_interval, "snapshot_interval");
  if (n_particles && *n_particles < 1)
    throw std::invalid_argument("config: n_particles must be >= 1");
  if (n_modes && *n_modes < 0) throw std::invalid_argument("config: n_modes must be >= 0");
  if (scheme && *scheme != "cn" && *scheme != "explicit")
    throw std::invalid_argument("config: scheme must be 'cn' or 'explicit'");
  if (out_dir.empty()) throw std::invalid_argument("config: out must not be empty");

  const bool is_filter = experiment == ExperimentKind::filter_almost_linear ||
                         experiment == ExperimentKind::filter_cubic ||
                         experiment == ExperimentKind::filter_custom ||
                         experiment == ExperimentKind::compare_pf;
  if (is_filter) {
    if (!seed) throw std::invalid_argument("config: filter experiments require a seed");
    if (!horizon) throw std::invalid_argument("config: filter experiments require a horizon");
  }
  if (experiment == ExperimentKind::filter_custom && !model)
    throw std::invalid_argument("config: filter_custom requires a model name");
  if (experiment == ExperimentKind::compare_pf && !n_particles)
    throw std::invalid_argument("config: compare_pf requires n_particles");
}

}  // namespace hfke
