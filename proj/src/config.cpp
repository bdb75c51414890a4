#include "mvlab/config.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mvlab/io.hpp"

namespace mvlab {

namespace {

std::vector<std::string> split(const std::string& s, const char* seps) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(seps));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used, 0);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: '" + v + "'");
  }
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < 0) throw ConfigError(key + ": must be nonnegative");
  return static_cast<std::size_t>(x);
}

bool to_bool(const std::string& key, std::string v) {
  boost::to_lower(v);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": not a boolean: '" + v + "'");
}

std::vector<double> to_reals(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& p : split(v, ",")) out.push_back(to_real(key, p));
  return out;
}

std::vector<std::size_t> to_counts(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& p : split(v, ",")) out.push_back(to_count(key, p));
  return out;
}

bool is_pow2(std::size_t n) { return n > 0 && std::has_single_bit(n); }

std::vector<std::size_t> pow2_range(int lo, int hi) {
  std::vector<std::size_t> v;
  for (int k = lo; k <= hi; ++k) v.push_back(std::size_t{1} << k);
  return v;
}

}  // namespace

DriftMethod parse_drift_method(const std::string& s) {
  if (s == "auto") return DriftMethod::Auto;
  if (s == "pairwise") return DriftMethod::Pairwise;
  if (s == "window") return DriftMethod::Window;
  if (s == "binned") return DriftMethod::Binned;
  throw ConfigError("drift: unknown method '" + s + "'");
}

ExperimentConfig ExperimentConfig::defaults(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.name = experiment;
  if (experiment == "rates_euler_strong") {
    c.sizes = {512};
    c.steps = pow2_range(4, 9);
    c.reference_steps = 4096;
    c.checkpoints = 64;
  } else if (experiment == "rates_euler_weak") {
    c.points = 100000;
    c.steps = pow2_range(4, 9);
    c.reference_steps = 4096;
    c.checkpoints = 8;
  } else if (experiment == "poc_strong") {
    c.sizes = {64, 256, 1024, 4096};
    c.steps = {128};
    c.points = std::size_t{1} << 17;
    c.tol = 2e-3;
    c.max_iter = 12;
    c.checkpoints = 128;
    c.pool = 16384;
  } else if (experiment == "poc_weak") {
    c.sizes = {64, 256, 1024, 4096};
    c.steps = {256};
    c.points = std::size_t{1} << 17;
    c.pool = 8192;
    c.checkpoints = 1;
  } else if (experiment == "commute") {
    c.sizes = {16, 64, 256, 1024};
    c.steps = {8, 32, 128, 512};
    c.pool = 8192;
    c.checkpoints = 1;
  } else if (experiment == "picard") {
    c.points = 10000;
    c.steps = {64};
    c.tol = 1e-2;
    c.max_iter = 8;
  } else if (experiment == "pde_compare") {
    c.points = 100000;
    c.steps = {1024};
    c.checkpoints = 1;
    c.drift = DriftMethod::Binned;
  } else if (experiment == "besov_smoothing" || experiment == "sample_noise") {
  } else {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  return c;
}

StableSpec ExperimentConfig::make_noise() const {
  if (noise == "cylindrical") {
    auto s = noise_scales;
    if (s.empty()) s = {1.0};
    if (s.size() == 1) s.assign(static_cast<std::size_t>(dim), s.front());
    return StableSpec::cylindrical(alpha, s);
  }
  if (noise == "isotropic") return StableSpec::isotropic(alpha, dim, noise_scale);
  if (noise == "discrete") return StableSpec::discrete(alpha, atoms);
  throw ConfigError("noise: unknown structure '" + noise + "'");
}

Kernel ExperimentConfig::make_kernel() const {
  if (kernel == "zero") return Kernel::zero(dim);
  if (kernel == "power_capped") return Kernel::power_capped(dim, beta, kernel_cap, kernel_strength);
  if (kernel == "gaussian_gradient") return Kernel::gaussian_gradient(dim, kernel_width);
  if (kernel == "tabulated") return Kernel::tabulated(dim, kernel_radii, kernel_profile);
  throw ConfigError("kernel: unknown type '" + kernel + "'");
}

InitialLaw ExperimentConfig::make_initial() const {
  if (initial == "point") return InitialLaw::point_mass();
  if (initial == "uniform") return InitialLaw::uniform_box(initial_spread);
  if (initial == "gaussian") return InitialLaw::gaussian(initial_spread);
  throw ConfigError("initial: unknown law '" + initial + "'");
}

SchemeConfig ExperimentConfig::scheme(std::size_t fine_steps, std::size_t n_checkpoints) const {
  SchemeConfig s;
  s.fine_steps = fine_steps;
  s.checkpoints = n_checkpoints;
  s.drift.method = drift;
  s.drift.threads = threads;
  return s;
}

void ExperimentConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  if (dim < 1 || dim > 3) throw ConfigError("dim must be 1, 2 or 3");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
  for (auto s : steps) {
    if (!is_pow2(s)) throw ConfigError("steps must be powers of two");
  }
  if (!is_pow2(reference_steps)) throw ConfigError("reference_steps must be a power of two");
  for (auto n : sizes) {
    if (n == 0) throw ConfigError("sizes must be positive");
  }
  if (points == 0 || pool == 0) throw ConfigError("M and pool must be positive");
  if (!(p >= 1.0)) throw ConfigError("p must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (!is_pow2(pde_n) || !is_pow2(besov_n)) throw ConfigError("grid sizes must be powers of two");
  if (!(pde_half_length > 0.0 && besov_half_length > 0.0 && besov_horizon > 0.0)) {
    throw ConfigError("box half-lengths and horizons must be positive");
  }
  if (besov_steps == 0) throw ConfigError("besov_steps must be positive");
  if (!(gamma > 0.0 && gamma < alpha)) throw ConfigError("gamma must lie in (0, alpha)");
  try {
    (void)make_noise();
    (void)make_kernel();
    (void)make_initial();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["name"] = name;
  j["alpha"] = alpha;
  j["beta"] = beta;
  j["dim"] = dim;
  j["horizon"] = horizon;
  j["noise"] = {{"structure", noise}, {"scales", noise_scales}, {"scale", noise_scale}};
  auto& at = j["noise"]["atoms"] = nlohmann::json::array();
  for (const auto& a : atoms) at.push_back({{"direction", a.direction}, {"weight", a.weight}});
  j["kernel"] = {{"type", kernel},          {"strength", kernel_strength},
                 {"cap", kernel_cap},       {"width", kernel_width},
                 {"radii", kernel_radii},   {"profile", kernel_profile}};
  j["initial"] = {{"law", initial}, {"spread", initial_spread}};
  j["sizes"] = sizes;
  j["steps"] = steps;
  j["reference_steps"] = reference_steps;
  j["M"] = points;
  j["p"] = p;
  j["checkpoints"] = checkpoints;
  j["pool"] = pool;
  j["drift"] = to_string(drift);
  j["seed"] = seed;
  j["threads"] = threads;
  j["out"] = out.string();
  j["tol"] = tol;
  j["max_iter"] = max_iter;
  j["pde"] = {{"half_length", pde_half_length}, {"n", pde_n}, {"control", control}};
  j["besov"] = {{"gamma", gamma},          {"half_length", besov_half_length},
                {"n", besov_n},            {"horizon", besov_horizon},
                {"steps", besov_steps},    {"times", besov_times}};
  j["sample"] = {{"cf_draws", cf_draws},
                 {"xi", xi},
                 {"moment_q", moment_q},
                 {"moment_levels", moment_levels},
                 {"moment_draws", moment_draws}};
  return j;
}

nlohmann::json ExperimentConfig::regime_json() const {
  return {{"alpha", alpha},
          {"beta", beta},
          {"weak_threshold", 1.0 - alpha},
          {"strong_threshold", 1.0 - 0.5 * alpha},
          {"weak_regime", weak_regime()},
          {"strong_regime", strong_regime()}};
}

std::uint64_t ExperimentConfig::hash() const {
  auto j = to_json();
  j.erase("threads");
  j.erase("out");
  return fnv1a(j.dump());
}

ExperimentConfig parse_config(std::istream& in, const std::string& experiment) {
  ExperimentConfig c = ExperimentConfig::defaults(experiment);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }

  std::vector<std::vector<double>> atom_dirs;
  std::vector<double> atom_weights;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"experiment",
       [&](auto& k, auto& v) {
         if (v != experiment) throw ConfigError(k + ": file is for '" + v + "'");
       }},
      {"name", [&](auto&, auto& v) { c.name = v; }},
      {"alpha", [&](auto& k, auto& v) { c.alpha = to_real(k, v); }},
      {"beta", [&](auto& k, auto& v) { c.beta = to_real(k, v); }},
      {"dim", [&](auto& k, auto& v) { c.dim = static_cast<int>(to_integer(k, v)); }},
      {"horizon", [&](auto& k, auto& v) { c.horizon = to_real(k, v); }},
      {"structure", [&](auto&, auto& v) { c.noise = v; }},
      {"scales", [&](auto& k, auto& v) { c.noise_scales = to_reals(k, v); }},
      {"scale", [&](auto& k, auto& v) { c.noise_scale = to_real(k, v); }},
      {"atoms",
       [&](auto& k, auto& v) {
         for (const auto& row : split(v, ";")) {
           std::vector<double> dir;
           for (const auto& x : split(row, " \t,")) dir.push_back(to_real(k, x));
           atom_dirs.push_back(std::move(dir));
         }
       }},
      {"weights", [&](auto& k, auto& v) { atom_weights = to_reals(k, v); }},
      {"type", [&](auto&, auto& v) { c.kernel = v; }},
      {"strength", [&](auto& k, auto& v) { c.kernel_strength = to_real(k, v); }},
      {"cap", [&](auto& k, auto& v) { c.kernel_cap = to_real(k, v); }},
      {"width", [&](auto& k, auto& v) { c.kernel_width = to_real(k, v); }},
      {"radii", [&](auto& k, auto& v) { c.kernel_radii = to_reals(k, v); }},
      {"profile", [&](auto& k, auto& v) { c.kernel_profile = to_reals(k, v); }},
      {"law", [&](auto&, auto& v) { c.initial = v; }},
      {"spread", [&](auto& k, auto& v) { c.initial_spread = to_real(k, v); }},
      {"sizes", [&](auto& k, auto& v) { c.sizes = to_counts(k, v); }},
      {"steps", [&](auto& k, auto& v) { c.steps = to_counts(k, v); }},
      {"h",
       [&](auto& k, auto& v) {
         c.steps.clear();
         for (double h : to_reals(k, v)) {
           if (!(h > 0.0)) throw ConfigError(k + ": step sizes must be positive");
           const double r = std::round(c.horizon / h);
           if (std::abs(r * h - c.horizon) > 1e-12 * c.horizon) {
             throw ConfigError(k + ": every h must divide the horizon");
           }
           c.steps.push_back(static_cast<std::size_t>(r));
         }
       }},
      {"reference_steps", [&](auto& k, auto& v) { c.reference_steps = to_count(k, v); }},
      {"M", [&](auto& k, auto& v) { c.points = to_count(k, v); }},
      {"p", [&](auto& k, auto& v) { c.p = to_real(k, v); }},
      {"checkpoints", [&](auto& k, auto& v) { c.checkpoints = to_count(k, v); }},
      {"pool", [&](auto& k, auto& v) { c.pool = to_count(k, v); }},
      {"drift", [&](auto&, auto& v) { c.drift = parse_drift_method(v); }},
      {"seed", [&](auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(to_integer(k, v)); }},
      {"threads", [&](auto& k, auto& v) { c.threads = static_cast<int>(to_integer(k, v)); }},
      {"out", [&](auto&, auto& v) { c.out = v; }},
      {"tol", [&](auto& k, auto& v) { c.tol = to_real(k, v); }},
      {"max_iter", [&](auto& k, auto& v) { c.max_iter = to_count(k, v); }},
      {"pde_half_length", [&](auto& k, auto& v) { c.pde_half_length = to_real(k, v); }},
      {"pde_n", [&](auto& k, auto& v) { c.pde_n = to_count(k, v); }},
      {"control", [&](auto& k, auto& v) { c.control = to_bool(k, v); }},
      {"gamma", [&](auto& k, auto& v) { c.gamma = to_real(k, v); }},
      {"besov_half_length", [&](auto& k, auto& v) { c.besov_half_length = to_real(k, v); }},
      {"besov_n", [&](auto& k, auto& v) { c.besov_n = to_count(k, v); }},
      {"besov_horizon", [&](auto& k, auto& v) { c.besov_horizon = to_real(k, v); }},
      {"besov_steps", [&](auto& k, auto& v) { c.besov_steps = to_count(k, v); }},
      {"besov_times", [&](auto& k, auto& v) { c.besov_times = to_count(k, v); }},
      {"cf_draws", [&](auto& k, auto& v) { c.cf_draws = to_count(k, v); }},
      {"xi", [&](auto& k, auto& v) { c.xi = to_reals(k, v); }},
      {"moment_q", [&](auto& k, auto& v) { c.moment_q = to_reals(k, v); }},
      {"moment_levels",
       [&](auto& k, auto& v) {
         c.moment_levels.clear();
         for (const auto& x : split(v, ",")) {
           c.moment_levels.push_back(static_cast<int>(to_integer(k, x)));
         }
       }},
      {"moment_draws", [&](auto& k, auto& v) { c.moment_draws = to_count(k, v); }},
  };

  // "h" is resolved after "horizon" regardless of file order.
  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string> seen;
  auto take = [&](const std::string& key, const std::string& value) {
    if (!setters.count(key)) throw ConfigError("unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
    entries.emplace_back(key, boost::trim_copy(value));
  };
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      take(key, node.data());
    } else {
      for (const auto& [sub, leaf] : node) take(sub, leaf.data());
    }
  }
  std::stable_partition(entries.begin(), entries.end(),
                        [](const auto& e) { return e.first != "h"; });
  for (const auto& [key, value] : entries) setters.at(key)(key, value);

  if (!atom_dirs.empty() || !atom_weights.empty()) {
    if (atom_weights.empty()) atom_weights.assign(atom_dirs.size(), 1.0);
    if (atom_weights.size() != atom_dirs.size()) {
      throw ConfigError("atoms and weights differ in length");
    }
    c.atoms.clear();
    for (std::size_t i = 0; i < atom_dirs.size(); ++i) {
      c.atoms.push_back({atom_dirs[i], atom_weights[i]});
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file, const std::string& experiment) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config " + file.string());
  return parse_config(in, experiment);
}

}  // namespace mvlab
