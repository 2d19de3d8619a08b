#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <diamond/sweep.hpp>

using namespace diamond;
using namespace diamond::sweep;

namespace {

struct Overrides {
  std::string config, out, path;
  std::optional<int> workers, omega0_count, center_count, sigma_count, k0_count;
  std::optional<double> tol, k0, sigma, omega0, theta, phi, fixed_center, gate;
  std::optional<double> omega0_min, omega0_max, center_min, center_max, sigma_min, sigma_max, k0_min, k0_max;
  std::vector<double> deltas;
};

void add_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON configuration file");
  cmd->add_option("--out", o.out, "output CSV path (default: stdout)");
  cmd->add_option("--workers", o.workers, "worker threads");
  cmd->add_option("--tol", o.tol, "relative quadrature tolerance");
  cmd->add_option("--path", o.path, "particle-number path: auto, exact or fast");
  cmd->add_option("--k0-over-a", o.k0, "detector centre frequency k0/a");
  cmd->add_option("--sigma-over-a", o.sigma, "detector bandwidth sigma/a");
  cmd->add_option("--omega0-over-a", o.omega0, "diamond wavepacket centre frequency omega0/a");
  cmd->add_option("--delta-over-a", o.deltas, "diamond wavepacket bandwidth(s) delta/a")->delimiter(',');
  cmd->add_option("--theta", o.theta, "beamsplitter angle theta in [0, pi]");
  cmd->add_option("--phi", o.phi, "mirror phase phi");
  cmd->add_option("--fixed-center", o.fixed_center, "centre a*pos of the fixed detector");
  cmd->add_option("--gate", o.gate, "detector overlap gate");
  cmd->add_option("--omega0-min", o.omega0_min);
  cmd->add_option("--omega0-max", o.omega0_max);
  cmd->add_option("--omega0-count", o.omega0_count);
  cmd->add_option("--center-min", o.center_min);
  cmd->add_option("--center-max", o.center_max);
  cmd->add_option("--center-count", o.center_count);
  cmd->add_option("--sigma-min", o.sigma_min);
  cmd->add_option("--sigma-max", o.sigma_max);
  cmd->add_option("--sigma-count", o.sigma_count);
  cmd->add_option("--k0-min", o.k0_min);
  cmd->add_option("--k0-max", o.k0_max);
  cmd->add_option("--k0-count", o.k0_count);
}

void override_grid(Grid& g, const std::optional<double>& lo, const std::optional<double>& hi,
                   const std::optional<int>& n) {
  if (!lo && !hi && !n) return;
  if (!g.explicit_values.empty()) {
    const auto v = g.values();
    g = Grid::range(v.front(), v.back(), int(v.size()));
  }
  if (lo) g.min = *lo;
  if (hi) g.max = *hi;
  if (n) g.count = *n;
}

SweepConfig resolve(Scenario s, const Overrides& o) {
  SweepConfig c = o.config.empty() ? SweepConfig::defaults(s) : load_config(s, o.config);
  if (o.workers) c.workers = *o.workers;
  if (o.tol) c.tol = *o.tol;
  if (!o.path.empty()) {
    if (o.path == "auto") c.path = NumberPath::Auto;
    else if (o.path == "exact") c.path = NumberPath::Exact;
    else if (o.path == "fast") c.path = NumberPath::Fast;
    else throw ConfigError("option --path: expected auto, exact or fast");
  }
  if (o.k0) c.k0_over_a = *o.k0;
  if (o.sigma) c.sigma_over_a = *o.sigma;
  if (o.omega0) {
    c.omega0_over_a = *o.omega0;
    c.omega0_grid = Grid::list({*o.omega0});
  }
  if (!o.deltas.empty()) {
    c.delta_list = o.deltas;
    if (s != Scenario::EnergyDecay && o.deltas.size() != 1)
      throw ConfigError("option --delta-over-a: this command takes a single value");
    c.delta_over_a = o.deltas.front();
  }
  if (o.theta) c.theta = *o.theta;
  if (o.phi) c.phi = *o.phi;
  if (o.fixed_center) c.fixed_center = *o.fixed_center;
  if (o.gate) c.overlap_gate = *o.gate;
  override_grid(c.omega0_grid, o.omega0_min, o.omega0_max, o.omega0_count);
  override_grid(c.center_grid, o.center_min, o.center_max, o.center_count);
  override_grid(c.sigma_grid, o.sigma_min, o.sigma_max, o.sigma_count);
  override_grid(c.k0_grid, o.k0_min, o.k0_max, o.k0_count);
  if (!o.out.empty()) c.output = o.out;
  validate(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle production and entanglement from a mirror confined to a causal diamond"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  const std::pair<Scenario, const char*> commands[] = {
      {Scenario::ParticleMap, "particle number map over omega0/a and detector centre"},
      {Scenario::EofMapLr, "left-right entanglement map"},
      {Scenario::EofMapLl, "same-side entanglement map"},
      {Scenario::EofBipartite, "bipartite entanglement and EPR product over sigma/a"},
      {Scenario::EnergyDecay, "energy per mode against k0/a with fitted slopes"}};
  std::vector<Overrides> opts(std::size(commands));
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    subs.push_back(app.add_subcommand(to_string(commands[i].first), commands[i].second));
    add_options(subs.back(), opts[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  std::size_t which = 0;
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) which = i;

  SweepConfig cfg;
  try {
    cfg = resolve(commands[which].first, opts[which]);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    const Dataset d = run(cfg);
    if (cfg.output.empty()) {
      write_csv(std::cout, cfg, d);
    } else {
      std::ofstream out(cfg.output);
      if (!out) {
        std::cerr << "error: cannot write '" << cfg.output << "'\n";
        return 3;
      }
      write_csv(out, cfg, d);
    }
    for (const auto& s : d.summary) std::cerr << s << '\n';
    if (d.failures > 0) {
      std::cerr << "warning: " << d.failures << " grid point(s) failed and were written as NaN\n";
      return 2;
    }
    if (d.skipped > 0) std::cerr << "note: " << d.skipped << " grid point(s) skipped by the overlap gate\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
