#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "circuit.hpp"
#include "gaussian.hpp"

namespace diamond::sweep {

inline constexpr const char* kToolVersion = "diamond-mirror 1.0.0";

class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Scenario { ParticleMap, EofMapLr, EofMapLl, EofBipartite, EnergyDecay };

inline std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::ParticleMap: return "particle-map";
    case Scenario::EofMapLr: return "eof-map-lr";
    case Scenario::EofMapLl: return "eof-map-ll";
    case Scenario::EofBipartite: return "eof-bipartite";
    case Scenario::EnergyDecay: return "energy-decay";
  }
  return "";
}

inline Scenario parse_scenario(const std::string& s) {
  for (Scenario c : {Scenario::ParticleMap, Scenario::EofMapLr, Scenario::EofMapLl, Scenario::EofBipartite,
                     Scenario::EnergyDecay})
    if (to_string(c) == s) return c;
  throw ConfigError("scenario: unknown value '" + s + "'");
}

inline std::string to_string(NumberPath p) {
  return p == NumberPath::Exact ? "exact" : p == NumberPath::Fast ? "fast" : "auto";
}

// Either an evenly spaced range (linear or log) or an explicit list.
struct Grid {
  double min = 0.0;
  double max = 1.0;
  int count = 2;
  bool log = false;
  std::vector<double> explicit_values;

  static Grid range(double lo, double hi, int n, bool logspace = false) { return {lo, hi, n, logspace, {}}; }
  static Grid list(std::vector<double> v) { return {0.0, 0.0, 0, false, std::move(v)}; }

  std::vector<double> values() const {
    if (!explicit_values.empty()) return explicit_values;
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) {
      const double t = count == 1 ? 0.0 : double(i) / (count - 1);
      v[i] = log ? std::exp(std::log(min) + t * (std::log(max) - std::log(min))) : min + t * (max - min);
    }
    if (count > 1) v.back() = max;
    return v;
  }
};

struct SweepConfig {
  Scenario scenario = Scenario::ParticleMap;
  double k0_over_a = 12.0;
  double sigma_over_a = 3.2;
  double delta_over_a = 0.2;
  double omega0_over_a = 5.0;
  double theta = std::numbers::pi / 2;
  double phi = 0.0;
  double fixed_center = 2.0;
  std::vector<double> delta_list{0.1, 0.2};
  Grid omega0_grid = Grid::range(0.5, 6.0, 12);
  Grid center_grid = Grid::range(-5.0, 5.0, 50);
  Grid sigma_grid = Grid::range(0.1, 1.0, 19);
  Grid k0_grid = Grid::range(10.0, 100.0, 10, true);
  double tol = 1e-6;
  double eof_tol = 1e-4;
  double overlap_gate = 0.05;
  NumberPath path = NumberPath::Auto;
  int workers = 1;
  std::string output;

  static SweepConfig defaults(Scenario s) {
    SweepConfig c;
    c.scenario = s;
    switch (s) {
      case Scenario::ParticleMap:
        break;
      case Scenario::EofMapLr:
      case Scenario::EofMapLl:
        c.k0_over_a = 8.0;
        c.delta_over_a = 0.11;
        c.omega0_grid = Grid::range(0.5, 3.0, 6);
        c.center_grid = Grid::range(-3.0, 3.0, 25);
        break;
      case Scenario::EofBipartite:
        c.k0_over_a = 0.02;
        c.omega0_over_a = 0.01;
        c.delta_over_a = 0.4;
        c.center_grid = Grid::range(-1.0, 1.0, 5);
        break;
      case Scenario::EnergyDecay:
        c.omega0_over_a = 5.0;
        c.sigma_over_a = 1.0;
        c.fixed_center = 2.0;
        c.path = NumberPath::Fast;
        break;
    }
    return c;
  }
};

namespace detail {

using nlohmann::json;

inline json grid_to_json(const Grid& g) {
  if (!g.explicit_values.empty()) return json{{"values", g.explicit_values}};
  return json{{"min", g.min}, {"max", g.max}, {"count", g.count}, {"spacing", g.log ? "log" : "linear"}};
}

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

class Reader {
 public:
  explicit Reader(const json& j, std::string path = "") : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "expected an object");
  }

  template <class F>
  void visit(F&& f) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) f(it.key(), it.value(), child(it.key()));
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string where() const { return path_.empty() ? "config: " : "field " + path_ + ": "; }
  const json& j_;
  std::string path_;
};

inline double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError("field " + field + ": expected a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("field " + field + ": must be finite");
  return x;
}

inline int integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError("field " + field + ": expected an integer");
  return v.get<int>();
}

inline std::vector<double> number_list(const json& v, const std::string& field) {
  if (v.is_number()) return {number(v, field)};
  if (!v.is_array() || v.empty()) throw ConfigError("field " + field + ": expected a non-empty list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

inline Grid read_grid(const json& v, const std::string& field) {
  if (v.is_array() || v.is_number()) return Grid::list(number_list(v, field));
  Grid g = Grid::range(0.0, 1.0, 2);
  bool has_min = false, has_max = false, has_count = false;
  Reader(v, field).visit([&](const std::string& k, const json& x, const std::string& f) {
    if (k == "min") g.min = number(x, f), has_min = true;
    else if (k == "max") g.max = number(x, f), has_max = true;
    else if (k == "count") g.count = integer(x, f), has_count = true;
    else if (k == "spacing") {
      if (!x.is_string() || (x != "linear" && x != "log"))
        throw ConfigError("field " + f + ": expected \"linear\" or \"log\"");
      g.log = x == "log";
    } else if (k == "values") g = Grid::list(number_list(x, f)), has_min = has_max = has_count = true;
    else throw ConfigError("field " + f + ": unknown key");
  });
  if (g.explicit_values.empty() && !(has_min && has_max && has_count))
    throw ConfigError("field " + field + ": range needs min, max and count");
  return g;
}

}  // namespace detail

inline void validate(const SweepConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("field ") + name + ": must be positive");
  };
  positive(c.k0_over_a, "physics.k0_over_a");
  positive(c.sigma_over_a, "physics.sigma_over_a");
  positive(c.delta_over_a, "physics.delta_over_a");
  positive(c.omega0_over_a, "physics.omega0_over_a");
  for (double d : c.delta_list) positive(d, "physics.delta_list");
  if (!(c.theta >= 0.0 && c.theta <= std::numbers::pi))
    throw ConfigError("field physics.theta: must lie in [0, pi]");
  if (!std::isfinite(c.phi)) throw ConfigError("field physics.phi: must be finite");
  if (!std::isfinite(c.fixed_center)) throw ConfigError("field physics.fixed_center: must be finite");
  auto check_grid = [](const Grid& g, const char* name, bool freq) {
    if (g.explicit_values.empty()) {
      if (g.count < 2) throw ConfigError(std::string("field ") + name + ".count: must be at least 2");
      if (!(g.max > g.min)) throw ConfigError(std::string("field ") + name + ": max must exceed min");
      if (g.log && !(g.min > 0.0)) throw ConfigError(std::string("field ") + name + ": log spacing needs min > 0");
    }
    if (freq)
      for (double v : g.values())
        if (!(v > 0.0)) throw ConfigError(std::string("field ") + name + ": frequencies must be positive");
  };
  check_grid(c.omega0_grid, "grid.omega0_over_a", true);
  check_grid(c.center_grid, "grid.center", false);
  check_grid(c.sigma_grid, "grid.sigma_over_a", true);
  check_grid(c.k0_grid, "grid.k0_over_a", true);
  positive(c.tol, "numerics.tol");
  positive(c.eof_tol, "numerics.eof_tol");
  positive(c.overlap_gate, "numerics.overlap_gate");
  if (c.workers < 1) throw ConfigError("field numerics.workers: must be at least 1");
}

inline void apply_json(SweepConfig& c, const nlohmann::json& root) {
  using detail::number;
  detail::Reader(root).visit([&](const std::string& key, const nlohmann::json& v, const std::string& f) {
    if (key == "scenario") {
      if (!v.is_string()) throw ConfigError("field scenario: expected a string");
      if (parse_scenario(v.get<std::string>()) != c.scenario)
        throw ConfigError("field scenario: '" + v.get<std::string>() + "' does not match the command '" +
                          to_string(c.scenario) + "'");
    } else if (key == "output") {
      if (!v.is_string()) throw ConfigError("field output: expected a string");
      c.output = v.get<std::string>();
    } else if (key == "physics") {
      detail::Reader(v, f).visit([&](const std::string& k, const nlohmann::json& x, const std::string& p) {
        if (k == "k0_over_a") c.k0_over_a = number(x, p);
        else if (k == "sigma_over_a") c.sigma_over_a = number(x, p);
        else if (k == "delta_over_a") c.delta_over_a = number(x, p);
        else if (k == "omega0_over_a") c.omega0_over_a = number(x, p);
        else if (k == "theta") c.theta = number(x, p);
        else if (k == "phi") c.phi = number(x, p);
        else if (k == "fixed_center") c.fixed_center = number(x, p);
        else if (k == "delta_list") c.delta_list = detail::number_list(x, p);
        else throw ConfigError("field " + p + ": unknown key");
      });
    } else if (key == "grid") {
      detail::Reader(v, f).visit([&](const std::string& k, const nlohmann::json& x, const std::string& p) {
        if (k == "omega0_over_a") c.omega0_grid = detail::read_grid(x, p);
        else if (k == "center") c.center_grid = detail::read_grid(x, p);
        else if (k == "sigma_over_a") c.sigma_grid = detail::read_grid(x, p);
        else if (k == "k0_over_a") c.k0_grid = detail::read_grid(x, p);
        else throw ConfigError("field " + p + ": unknown key");
      });
    } else if (key == "numerics") {
      detail::Reader(v, f).visit([&](const std::string& k, const nlohmann::json& x, const std::string& p) {
        if (k == "tol") c.tol = number(x, p);
        else if (k == "eof_tol") c.eof_tol = number(x, p);
        else if (k == "overlap_gate") c.overlap_gate = number(x, p);
        else if (k == "workers") c.workers = detail::integer(x, p);
        else if (k == "path") {
          if (x == "auto") c.path = NumberPath::Auto;
          else if (x == "exact") c.path = NumberPath::Exact;
          else if (x == "fast") c.path = NumberPath::Fast;
          else throw ConfigError("field " + p + ": expected \"auto\", \"exact\" or \"fast\"");
        } else throw ConfigError("field " + p + ": unknown key");
      });
    } else {
      throw ConfigError("field " + f + ": unknown key");
    }
  });
}

inline SweepConfig parse_config(Scenario s, const std::string& text) {
  SweepConfig c = SweepConfig::defaults(s);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
  }
  apply_json(c, root);
  return c;
}

inline SweepConfig load_config(Scenario s, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(s, ss.str());
}

inline nlohmann::json to_json(const SweepConfig& c) {
  return nlohmann::json{
      {"scenario", to_string(c.scenario)},
      {"physics",
       {{"k0_over_a", c.k0_over_a},
        {"sigma_over_a", c.sigma_over_a},
        {"delta_over_a", c.delta_over_a},
        {"omega0_over_a", c.omega0_over_a},
        {"theta", c.theta},
        {"phi", c.phi},
        {"fixed_center", c.fixed_center},
        {"delta_list", c.delta_list}}},
      {"grid",
       {{"omega0_over_a", detail::grid_to_json(c.omega0_grid)},
        {"center", detail::grid_to_json(c.center_grid)},
        {"sigma_over_a", detail::grid_to_json(c.sigma_grid)},
        {"k0_over_a", detail::grid_to_json(c.k0_grid)}}},
      {"numerics",
       {{"tol", c.tol},
        {"eof_tol", c.eof_tol},
        {"overlap_gate", c.overlap_gate},
        {"path", to_string(c.path)},
        {"workers", c.workers}}},
      {"output", c.output}};
}

struct Dataset {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::size_t failures = 0;
  std::size_t skipped = 0;
  std::vector<std::string> summary;
};

// Runs task(i) for i in [0, n) on a bounded pool; results are indexed, so the
// outcome does not depend on scheduling.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int workers, F&& task) {
  std::vector<T> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto run = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        out[i] = task(i);
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  const int w = std::max(1, std::min<int>(workers, int(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < w; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (fatal) std::rethrow_exception(fatal);
  return out;
}

// A point either produces values, fails (NaN row) or is skipped (no row).
struct Point {
  enum class Status { Ok, Failed, Skipped } status = Status::Ok;
  std::vector<double> values;
};

template <class F>
Point guarded(F&& f) {
  try {
    return {Point::Status::Ok, f()};
  } catch (const DetectorOverlapTooLarge&) {
    return {Point::Status::Skipped, {}};
  } catch (const Error&) {
    return {Point::Status::Failed, {}};
  }
}

inline CircuitOptions circuit_options(const SweepConfig& c) {
  CircuitOptions o;
  o.overlap.outer_rel_tol = c.tol;
  o.overlap.inner_rel_tol = c.tol * 0.1;
  o.path = c.path;
  o.overlap_gate = c.overlap_gate;
  return o;
}

inline void collect(Dataset& d, const std::vector<std::vector<double>>& keys, const std::vector<Point>& pts,
                    std::size_t width) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].status == Point::Status::Skipped) {
      ++d.skipped;
      continue;
    }
    std::vector<double> row = keys[i];
    if (pts[i].status == Point::Status::Failed) {
      ++d.failures;
      row.resize(keys[i].size() + width, std::numeric_limits<double>::quiet_NaN());
    } else {
      row.insert(row.end(), pts[i].values.begin(), pts[i].values.end());
    }
    d.rows.push_back(std::move(row));
  }
}

inline Dataset run_particle_map(const SweepConfig& c) {
  validate(c);
  const DiamondScale scale(1.0);
  const MirrorUnitary u(c.theta, c.phi);
  const CircuitOptions opt = circuit_options(c);
  std::vector<std::vector<double>> keys;
  for (double w : c.omega0_grid.values())
    for (double x : c.center_grid.values()) keys.push_back({w, x});
  auto pts = parallel_map<Point>(keys.size(), c.workers, [&](std::size_t i) {
    return guarded([&] {
      const auto g = WavepacketSpec::diamond(keys[i][0], c.delta_over_a);
      const auto f = WavepacketSpec::minkowski(c.k0_over_a, c.sigma_over_a, keys[i][1], Direction::Right);
      if (u.one_minus_cos() == 0.0) return std::vector<double>{0.0};
      return std::vector<double>{particle_number_from(channel_overlaps(f, g, scale, opt), u)};
    });
  });
  Dataset d;
  d.columns = {"omega0_over_a", "a_center_pos", "n_particles"};
  collect(d, keys, pts, 1);
  return d;
}

inline std::vector<double> entanglement_columns(const MomentSet& m, double eof_tol) {
  const CovarianceMatrix cm = covariance_from_moments(m);
  return {eof(cm, eof_tol), log_negativity(cm)};
}

inline Dataset run_eof_map(const SweepConfig& c) {
  validate(c);
  require(c.scenario == Scenario::EofMapLr || c.scenario == Scenario::EofMapLl,
          "run_eof_map: scenario must be eof-map-lr or eof-map-ll");
  const bool same_side = c.scenario == Scenario::EofMapLl;
  const DiamondScale scale(1.0);
  const MirrorUnitary u(c.theta, c.phi);
  const CircuitOptions opt = circuit_options(c);
  const auto omegas = c.omega0_grid.values();
  const auto centers = c.center_grid.values();
  const Direction scan_dir = same_side ? Direction::Left : Direction::Right;
  auto fixed_spec = WavepacketSpec::minkowski(c.k0_over_a, c.sigma_over_a, c.fixed_center, Direction::Left);

  auto fixed = parallel_map<std::optional<OverlapSet>>(omegas.size(), c.workers, [&](std::size_t i) {
    try {
      return std::optional<OverlapSet>(
          channel_overlaps(fixed_spec, WavepacketSpec::diamond(omegas[i], c.delta_over_a), scale, opt));
    } catch (const Error&) {
      return std::optional<OverlapSet>();
    }
  });

  std::vector<std::vector<double>> keys;
  for (double w : omegas)
    for (double x : centers) keys.push_back({w, x});
  auto pts = parallel_map<Point>(keys.size(), c.workers, [&](std::size_t i) {
    return guarded([&] {
      const std::size_t wi = i / centers.size();
      const auto scan = WavepacketSpec::minkowski(c.k0_over_a, c.sigma_over_a, keys[i][1], scan_dir);
      if (same_side) {
        const double ov = std::abs(detector_commutator(fixed_spec, scan));
        if (!(ov < c.overlap_gate)) throw DetectorOverlapTooLarge("eof-map-ll: overlap gate", ov);
      }
      if (!fixed[wi]) throw NonConvergence("fixed detector overlaps unavailable");
      if (u.one_minus_cos() == 0.0) return std::vector<double>{0.0, 0.0};
      const auto g = WavepacketSpec::diamond(keys[i][0], c.delta_over_a);
      const OverlapSet o = channel_overlaps(scan, g, scale, opt);
      const MomentSet m = same_side ? ll_moments(*fixed[wi], o, u) : lr_moments(*fixed[wi], o, u);
      return entanglement_columns(m, c.eof_tol);
    });
  });
  Dataset d;
  d.columns = {"omega0_over_a", "a_scan_center", "eof", "log_negativity"};
  collect(d, keys, pts, 2);
  return d;
}

inline Dataset run_eof_bipartite(const SweepConfig& c) {
  validate(c);
  const DiamondScale scale(1.0);
  const MirrorUnitary u(c.theta, c.phi);
  const CircuitOptions opt = circuit_options(c);
  const auto g = WavepacketSpec::diamond(c.omega0_over_a, c.delta_over_a);
  std::vector<std::vector<double>> keys;
  for (double s : c.sigma_grid.values())
    for (double x : c.center_grid.values()) keys.push_back({s, x});
  auto pts = parallel_map<Point>(keys.size(), c.workers, [&](std::size_t i) {
    return guarded([&] {
      if (u.one_minus_cos() == 0.0) return std::vector<double>{0.0, 1.0};
      const auto fl = WavepacketSpec::minkowski(c.k0_over_a, keys[i][0], keys[i][1], Direction::Left);
      const auto fr = fl.with_direction(Direction::Right);
      const MomentSet m = lr_moments(channel_overlaps(fl, g, scale, opt), channel_overlaps(fr, g, scale, opt), u);
      const CovarianceMatrix cm = covariance_from_moments(m);
      return std::vector<double>{eof(cm, c.eof_tol), epr_variance_product(cm)};
    });
  });
  Dataset d;
  d.columns = {"sigma_over_a", "a_center", "eof", "epr_variance_product"};
  collect(d, keys, pts, 2);
  return d;
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline Dataset run_energy_decay(const SweepConfig& c,
                                std::function<double(double k0, double delta)> number_hook = nullptr) {
  validate(c);
  const DiamondScale scale(1.0);
  const MirrorUnitary u(c.theta, c.phi);
  const CircuitOptions opt = circuit_options(c);
  const auto k0s = c.k0_grid.values();
  std::vector<std::vector<double>> keys;
  for (double d : c.delta_list)
    for (double k : k0s) keys.push_back({d, k});
  auto pts = parallel_map<Point>(keys.size(), c.workers, [&](std::size_t i) {
    return guarded([&] {
      const double delta = keys[i][0], k0 = keys[i][1];
      double n;
      if (number_hook) {
        n = number_hook(k0, delta);
      } else {
        const auto g = WavepacketSpec::diamond(c.omega0_over_a, delta);
        const auto f = WavepacketSpec::minkowski(k0, c.sigma_over_a, c.fixed_center, Direction::Left);
        n = u.one_minus_cos() == 0.0 ? 0.0 : particle_number_from(channel_overlaps(f, g, scale, opt), u);
      }
      return std::vector<double>{k0 * n};
    });
  });
  Dataset d;
  d.columns = {"delta_over_a", "k0_over_a", "energy"};
  collect(d, keys, pts, 1);
  for (double delta : c.delta_list) {
    std::vector<double> x, y;
    for (const auto& r : d.rows)
      if (r[0] == delta && std::isfinite(r[2]) && r[2] > 0.0) {
        x.push_back(r[1]);
        y.push_back(r[2]);
      }
    std::string slope = "nan";
    if (x.size() >= 2) slope = format_number(fit_loglog_slope(x, y));
    d.summary.push_back("slope delta_over_a=" + format_number(delta) + ": " + slope);
  }
  return d;
}

inline Dataset run(const SweepConfig& c) {
  switch (c.scenario) {
    case Scenario::ParticleMap: return run_particle_map(c);
    case Scenario::EofMapLr:
    case Scenario::EofMapLl: return run_eof_map(c);
    case Scenario::EofBipartite: return run_eof_bipartite(c);
    case Scenario::EnergyDecay: return run_energy_decay(c);
  }
  throw ConfigError("unknown scenario");
}

inline void write_csv(std::ostream& os, const SweepConfig& c, const Dataset& d) {
  os << "# " << kToolVersion << '\n';
  os << "# scenario: " << to_string(c.scenario) << '\n';
  os << "# config: " << to_json(c).dump() << '\n';
  os << "# failures: " << d.failures << '\n';
  os << "# skipped: " << d.skipped << '\n';
  for (std::size_t i = 0; i < d.columns.size(); ++i) os << (i ? "," : "") << d.columns[i];
  os << '\n';
  for (const auto& r : d.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
    os << '\n';
  }
  for (const auto& s : d.summary) os << "# " << s << '\n';
}

// CSV content without comment lines.
inline std::string csv_body(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out += line + '\n';
  return out;
}

}  // namespace diamond::sweep
