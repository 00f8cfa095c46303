// Command line driver: one subcommand per experiment stage.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "slowbond/catalog.hpp"
#include "slowbond/harness.hpp"
#include "slowbond/inverse.hpp"
#include "slowbond/parallel.hpp"

using namespace slowbond;
using harness::ExperimentConfig;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t threads = 0;
  bool perturbed = false;
};

void add_common(CLI::App* app, Common& c, bool perturbed_flag) {
  app->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Override the config seed");
  app->add_option("--out", c.out, "Output directory (overrides the config)");
  app->add_option("--threads", c.threads, "Worker threads (default: SLOWBOND_THREADS, then all cores)");
  if (perturbed_flag) app->add_flag("--perturbed", c.perturbed, "Use the perturbed dynamics");
}

std::vector<ExperimentConfig> configs(const Common& c) {
  std::vector<ExperimentConfig> out = c.config.empty() ? std::vector<ExperimentConfig>{{}} : harness::load_configs(c.config);
  for (auto& cfg : out) {
    if (c.seed) cfg.seed = *c.seed;
    if (!c.out.empty()) cfg.output = c.out;
  }
  return out;
}

ExperimentConfig single(const Common& c) {
  auto all = configs(c);
  if (all.size() != 1) throw std::invalid_argument("expected a single config, got " + std::to_string(all.size()));
  all.front().validate();
  if (all.front().output.empty()) all.front().output = "out";
  return all.front();
}

std::ofstream open(const ExperimentConfig& c, const std::string& file) {
  std::filesystem::create_directories(c.output);
  const auto path = std::filesystem::path(c.output) / file;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.imbue(std::locale::classic());
  std::cerr << "wrote " << path.string() << '\n';
  return os;
}

PdeSolution solve(const ExperimentConfig& c, bool perturbed) {
  const auto gamma = DensityField::from_profile(named_profile(c.profile.name, c.profile.params), c.grid);
  const PdeOptions opt{.m = c.grid, .dt = c.dt};
  if (!perturbed) return solve_symmetric(gamma, c.horizon, opt);
  return solve_perturbed(gamma, named_field(c.perturbation.name, c.perturbation.params), c.horizon, opt);
}

int cmd_simulate(const Common& o) {
  const auto c = single(o);
  const auto gamma = named_profile(c.profile.name, c.profile.params);
  const FieldPtr h = o.perturbed ? named_field(c.perturbation.name, c.perturbation.params) : nullptr;
  std::vector<double> times;
  for (int i = 0; i <= 8; ++i) times.push_back(c.horizon * i / 8.0);
  json summary = json::array();
  for (std::size_t n : c.lattice_sizes) {
    const DynamicsSpec spec{n, o.perturbed ? Mode::weakly_asymmetric : Mode::symmetric, h, c.horizon, c.seed};
    const auto traj = simulate(spec, initial_from_profile(gamma, n), times, {.record_events = false});
    auto os = open(c, "simulate_n" + std::to_string(n) + ".csv");
    write_snapshots_csv(os, traj);
    summary.push_back({{"n", n}, {"events", traj.event_count}, {"slow_bond_events", traj.slow_bond_events}});
  }
  open(c, "simulate.json") << summary.dump(2) << '\n';
  return 0;
}

int cmd_pde(const Common& o) {
  const auto c = single(o);
  const auto s = solve(c, o.perturbed);
  auto os = open(c, "pde.csv");
  write_csv(os, s);
  const auto& last = s.fields.back();
  open(c, "pde.json") << json{{"steps", s.steps},
                              {"dt", s.dt},
                              {"mass", last.mass()},
                              {"side_plus", last.side_plus()},
                              {"side_minus", last.side_minus()}}
                             .dump(2)
                      << '\n';
  return 0;
}

int cmd_rate(const Common& o) {
  const auto c = single(o);
  const auto h = named_field(c.perturbation.name, c.perturbation.params);
  const auto path = PathMeasure::from_solution(solve(c, true));
  const json j{{"closed_form", rate::rate_closed_form(path, *h)}, {"j_hat", rate::j_hat(path, *h)}};
  open(c, "rate.json") << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_invert(const Common& o) {
  const auto c = single(o);
  const auto built = build_H(GridPath(PathMeasure::from_solution(solve(c, true))), c.grid);
  auto os = open(c, "inverse.csv");
  write_csv(os, *built.h);
  return 0;
}

int cmd_entropy(const Common& o) {
  const auto c = single(o);
  const auto gamma = named_profile(c.profile.name, c.profile.params);
  const auto h = named_field(c.perturbation.name, c.perturbation.params);
  json j = json::array();
  for (std::size_t n : c.lattice_sizes) {
    const DynamicsSpec spec{n, Mode::weakly_asymmetric, h, c.horizon, c.seed};
    j.push_back(estimate_entropy(spec, initial_from_profile(gamma, n), c.replicas, resolve_threads(o.threads)));
  }
  open(c, "entropy.json") << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return 0;
}

void print_checks(const harness::ExperimentReport& r) {
  for (const auto& k : r.checks) {
    std::printf("%-5s %-16s %-28s value=%.6g tolerance=%.6g\n", k.passed ? "PASS" : "FAIL", r.config.kind.c_str(),
                k.name.c_str(), k.value, k.tolerance);
  }
}

int cmd_verify(const Common& o) {
  auto c = single(o);
  const auto r = harness::run(c, resolve_threads(o.threads));
  print_checks(r);
  std::printf("%.1f s, report in %s\n", r.seconds, (std::filesystem::path(c.output) / "report.json").string().c_str());
  return r.passed() ? 0 : 1;
}

int cmd_sweep(const Common& o) {
  auto all = configs(o);
  for (auto& c : all) {
    c.validate();
    if (c.output.empty()) c.output = "out";
  }
  const auto s = harness::sweep(all, resolve_threads(o.threads));
  bool ok = true;
  for (const auto& r : s.reports) {
    print_checks(r);
    ok = ok && r.passed();
  }
  if (!all.empty()) {
    ExperimentConfig where = all.front();
    open(where, "sweep.json") << harness::to_json(s).dump(2) << '\n';
  }
  if (!s.summary.is_null()) std::cout << s.summary.dump() << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exclusion process with a slow bond: simulation, PDE, rate functional and entropy checks"};
  app.set_version_flag("--version", std::string(SLOWBOND_VERSION));
  app.require_subcommand(1);

  Common opts;
  struct Sub {
    const char* name;
    const char* help;
    bool perturbed_flag;
    int (*fn)(const Common&);
  };
  const Sub subs[] = {
      {"simulate", "Simulate one trajectory per lattice size and write snapshots", true, cmd_simulate},
      {"pde", "Solve the hydrodynamic equation and write the density", true, cmd_pde},
      {"rate", "Closed-form rate at the perturbed solution", false, cmd_rate},
      {"invert", "Recover H from the perturbed solution", false, cmd_invert},
      {"entropy", "Relative entropy per site for each lattice size", false, cmd_entropy},
      {"verify", "Run the configured experiment and its checks", false, cmd_verify},
      {"sweep", "Run a list of configs and summarize across lattice sizes", false, cmd_sweep},
  };
  std::vector<std::pair<CLI::App*, int (*)(const Common&)>> handlers;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, opts, s.perturbed_flag);
    handlers.emplace_back(sub, s.fn);
  }
  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [sub, fn] : handlers) {
      if (sub->parsed()) return fn(opts);
    }
  } catch (const std::exception& e) {
    std::cerr << "slowbond: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
