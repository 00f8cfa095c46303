#include "slowbond/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "slowbond/catalog.hpp"
#include "slowbond/empirical.hpp"
#include "slowbond/inverse.hpp"
#include "slowbond/lattice.hpp"
#include "slowbond/parallel.hpp"
#include "slowbond/quadrature.hpp"
#include "slowbond/robin_pde.hpp"

namespace slowbond::harness {

using nlohmann::json;

namespace {

constexpr std::size_t kHydroPoints = 256;
constexpr std::size_t kFamilySize = 20;

CheckResult at_most(std::string name, double value, double tolerance) {
  return {std::move(name), value, tolerance, value <= tolerance};
}

Profile profile_of(const ExperimentConfig& c) { return named_profile(c.profile.name, c.profile.params); }
FieldPtr field_of(const ExperimentConfig& c) { return named_field(c.perturbation.name, c.perturbation.params); }
PdeOptions pde_options(const ExperimentConfig& c) { return {.m = c.grid, .dt = c.dt}; }

std::ofstream open_output(const ExperimentConfig& c, const std::string& file) {
  std::filesystem::create_directories(c.output);
  std::ofstream os(std::filesystem::path(c.output) / file);
  if (!os) throw std::runtime_error("cannot write " + (std::filesystem::path(c.output) / file).string());
  os.imbue(std::locale::classic());
  return os;
}

// Largest successive increase of v; negative when v strictly decreases.
double largest_increase(const std::vector<double>& v) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < v.size(); ++i) worst = std::max(worst, v[i] - v[i - 1]);
  return v.size() < 2 ? 0.0 : worst;
}

void hydro(const ExperimentConfig& c, bool perturbed, std::size_t threads, ExperimentReport& out) {
  const auto gamma = profile_of(c);
  const FieldPtr h = perturbed ? field_of(c) : nullptr;
  const auto initial = DensityField::from_profile(gamma, c.grid);
  const auto pde = perturbed ? solve_perturbed(initial, h, c.horizon, pde_options(c))
                             : solve_symmetric(initial, c.horizon, pde_options(c));

  const std::vector<double> times = {0.25 * c.horizon, 0.5 * c.horizon, 0.75 * c.horizon, c.horizon};
  const std::size_t pts = kHydroPoints;
  auto point = [pts](std::size_t j) { return (static_cast<double>(j) + 0.5) / static_cast<double>(pts); };
  std::vector<std::vector<double>> reference(times.size(), std::vector<double>(pts));
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto& f = pde.fields[nearest_observation(pde, times[k])];
    for (std::size_t j = 0; j < pts; ++j) reference[k][j] = box_at(f, c.eps, point(j));
  }

  std::ofstream csv;
  if (!c.output.empty()) {
    csv = open_output(c, "hydro.csv");
    csv.precision(17);
    csv << "n,t,u,empirical,pde\n";
  }

  std::vector<double> final_l1;
  json per_size = json::array();
  for (std::size_t n : c.lattice_sizes) {
    const DynamicsSpec spec{n, perturbed ? Mode::weakly_asymmetric : Mode::symmetric, h, c.horizon, c.seed};
    const auto start = initial_from_profile(gamma, n);
    struct Sample {
      std::vector<double> values;
      std::uint64_t events = 0;
    };
    // Candidate thinning is markedly cheaper than the tree sampler here and
    // has the same law.
    const auto samples = parallel_map<Sample>(c.replicas, threads, [&](std::size_t r) {
      const auto traj = simulate(spec, start, times,
                                 {.record_events = false, .sampler = Sampler::uniformized, .replica = r});
      Sample s;
      s.events = traj.event_count;
      for (const auto& snap : traj.snapshots) {
        for (std::size_t j = 0; j < pts; ++j) s.values.push_back(box_at(snap.config, c.eps, point(j)));
      }
      return s;
    });
    std::vector<double> mean(times.size() * pts, 0.0);
    double events = 0;
    for (const auto& s : samples) {
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += s.values[i];
      events += static_cast<double>(s.events);
    }
    for (double& v : mean) v /= static_cast<double>(c.replicas);

    std::vector<double> l1(times.size(), 0.0);
    for (std::size_t k = 0; k < times.size(); ++k) {
      for (std::size_t j = 0; j < pts; ++j) {
        const double e = mean[k * pts + j];
        l1[k] += std::abs(e - reference[k][j]) / static_cast<double>(pts);
        if (csv.is_open()) csv << n << ',' << times[k] << ',' << point(j) << ',' << e << ',' << reference[k][j] << '\n';
      }
    }
    final_l1.push_back(l1.back());
    per_size.push_back({{"n", n}, {"t", times}, {"l1", l1}, {"events_per_replica", events / c.replicas}});
  }
  out.data["sizes"] = per_size;
  const double tol = perturbed ? 0.05 : 0.03;
  out.checks.push_back(at_most("l1_largest_n", final_l1.back(), tol));
  if (final_l1.size() > 1) {
    const double rise = largest_increase(final_l1);
    out.checks.push_back({"l1_decreasing_in_n", rise, 0.0, rise < 0});
  }
}

void rate_check(const ExperimentConfig& c, ExperimentReport& out) {
  const auto h = field_of(c);
  const auto gamma = DensityField::from_profile(profile_of(c), c.grid);
  const auto rho = PathMeasure::from_solution(solve_perturbed(gamma, h, c.horizon, pde_options(c)));
  const auto lambda = PathMeasure::from_solution(solve_symmetric(gamma, c.horizon, pde_options(c)));
  const auto family = rate::test_family(c.seed, kFamilySize, c.horizon);

  const double jh = rate::j_hat(rho, *h);
  const auto closed = rate::rate_closed_form(rho, *h);
  double excess = -std::numeric_limits<double>::infinity(), at_lambda = excess;
  for (const auto& g : family) {
    excess = std::max(excess, rate::j_hat(rho, *g) - jh);
    at_lambda = std::max(at_lambda, rate::j_hat(lambda, *g));
  }
  const double constant = rate::j_hat(lambda, *constant_field(1.0));
  out.data["j_hat"] = jh;
  out.data["closed_form"] = closed;
  out.checks.push_back(at_most("closed_form_gap", std::abs(jh - closed.total), 1e-4));
  out.checks.push_back(at_most("sup_attainment", excess, 1e-6));
  out.checks.push_back(at_most("zero_rate_random_g", at_lambda, 1e-6));
  out.checks.push_back(at_most("zero_rate_constant_g", std::abs(constant), 1e-10));
}

void invert_check(const ExperimentConfig& c, ExperimentReport& out) {
  const auto h = field_of(c);
  const auto gamma = DensityField::from_profile(profile_of(c), c.grid);
  const auto built = build_H(GridPath(PathMeasure::from_solution(solve_perturbed(gamma, h, c.horizon, pde_options(c)))),
                             c.grid);
  const auto& times = built.h->times();
  const std::size_t m = c.grid;
  // Trapezoid weights in t, node weights in u.
  double err = 0, norm = 0, jump_err = 0, jump_norm = 0, residual = 0, agreement = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double w = 0.5 * ((i + 1 < times.size() ? times[i + 1] : times[i]) - (i > 0 ? times[i - 1] : times[i]));
    const auto& dv = built.h->node_gradients(i);
    for (std::size_t k = 0; k <= m; ++k) {
      const double want = h->du(times[i], static_cast<double>(k) / m);
      err += w * (dv[k] - want) * (dv[k] - want);
      norm += w * want * want;
    }
    const double dj = built.h->jump(times[i]) - h->jump(times[i]);
    jump_err += w * dj * dj;
    jump_norm += w * h->jump(times[i]) * h->jump(times[i]);
    residual = std::max(residual, built.roots[i].residual);
    agreement = std::max(agreement, std::abs(built.roots[i].z0 - solve_root_newton(built.coefficients[i]).z0));
  }
  auto rng = replica_engine(c.seed, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const EllipticCoefficients k{2 + 20 * unif(rng), 10 * (unif(rng) - 0.5), unif(rng), unif(rng)};
    const auto a = solve_root(k);
    residual = std::max(residual, a.residual);
    agreement = std::max(agreement, std::abs(a.z0 - solve_root_newton(k).z0));
  }
  const double rel = norm > 0 ? std::sqrt(err / norm) : std::sqrt(err);
  const double rel_jump = jump_norm > 0 ? std::sqrt(jump_err / jump_norm) : std::sqrt(jump_err);
  out.data["solve_times"] = times.size();
  out.checks.push_back(at_most("gradient_relative_l2", rel, 0.05));
  out.checks.push_back(at_most("jump_relative_l2", rel_jump, 0.05));
  out.checks.push_back(at_most("root_residual", residual, 1e-12));
  out.checks.push_back(at_most("bisection_newton_agreement", agreement, 1e-10));
  if (!c.output.empty()) {
    auto os = open_output(c, "inverse.csv");
    write_csv(os, *built.h);
  }
}

void entropy_check(const ExperimentConfig& c, std::size_t threads, ExperimentReport& out) {
  const auto gamma = profile_of(c);
  const auto h = field_of(c);
  const auto rho = PathMeasure::from_solution(
      solve_perturbed(DensityField::from_profile(gamma, c.grid), h, c.horizon, pde_options(c)));
  const auto closed = rate::rate_closed_form(rho, *h);
  const double target = closed.total;

  std::vector<double> gaps;
  double worst_z = 0, lowest = std::numeric_limits<double>::infinity();
  json estimates = json::array();
  for (std::size_t n : c.lattice_sizes) {
    const DynamicsSpec spec{n, Mode::weakly_asymmetric, h, c.horizon, c.seed};
    const auto e = estimate_entropy(spec, initial_from_profile(gamma, n), c.replicas, threads);
    gaps.push_back(std::abs(e.compensated_mean - target));
    lowest = std::min(lowest, e.mean_per_site + 3 * e.std_error);
    const double se = std::hypot(e.std_error, e.compensated_std_error);
    const double diff = std::abs(e.mean_per_site - e.compensated_mean);
    worst_z = std::max(worst_z, se > 0 ? diff / se : (diff == 0 ? 0.0 : std::numeric_limits<double>::max()));
    json j = e;
    j["gap"] = gaps.back();
    estimates.push_back(j);
  }
  out.data["rate"] = closed;
  out.data["estimates"] = estimates;
  if (gaps.size() > 1) {
    const double rise = largest_increase(gaps);
    out.checks.push_back({"gap_nonincreasing_in_n", rise, 0.0, rise <= 0});
  }
  out.checks.push_back(at_most("final_gap", gaps.back(), std::max(0.1, 0.2 * target)));
  out.checks.push_back({"nonnegative_within_3se", lowest, 0.0, lowest >= 0});
  out.checks.push_back(at_most("direct_vs_compensated_z", worst_z, 3.0));
}

void energy_check(const ExperimentConfig& c, ExperimentReport& out) {
  constexpr std::size_t kPaths = 5, kFields = 10, kIntervals = 200;
  double closed_err = 0, excess = -std::numeric_limits<double>::infinity();
  json values = json::array();
  for (std::size_t p = 0; p < kPaths; ++p) {
    const auto path_spec = energy_test_path(c.seed + p);
    const auto path = PathMeasure::sample(path_spec.rho, c.grid, c.horizon, kIntervals);
    const double exact =
        quad::gauss(
            [&](double t) {
              return quad::gauss([&](double u) { return path_spec.du_rho(t, u) * path_spec.du_rho(t, u); }, 0.0,
                                 1.0, 64);
            },
            0.0, c.horizon, 32) /
        8;
    const double at_max = rate::energy_of(path, *path_spec.maximizer);
    closed_err = std::max(closed_err, std::abs(at_max - exact));
    for (std::size_t k = 0; k < kFields; ++k) {
      const auto g = random_admissible_field(c.seed + 1000 * (p + 1) + k, c.horizon);
      excess = std::max(excess, rate::energy_of(path, *g) - at_max);
    }
    values.push_back({{"exact", exact}, {"maximizer", at_max}, {"finite_difference", rate::energy(path)}});
  }
  out.data["paths"] = values;
  out.checks.push_back(at_most("closed_form_error", closed_err, 1e-6));
  out.checks.push_back(at_most("admissible_excess", excess, 1e-9));
}

void martingale_check(const ExperimentConfig& c, std::size_t threads, ExperimentReport& out) {
  const std::size_t n = c.lattice_sizes.front();
  const DynamicsSpec spec{n, Mode::symmetric, nullptr, c.horizon, c.seed};
  const auto m = martingale_mean(spec, initial_from_profile(profile_of(c), n), *field_of(c), c.replicas, threads);
  out.data["martingale"] = m;
  const double z = m.std_error > 0 ? std::abs(m.mean - 1) / m.std_error : (m.mean == 1 ? 0.0 : 1e300);
  out.checks.push_back(at_most("mean_one_z", z, 3.0));
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end()) fail("unknown kind '" + kind + "'");
  if (lattice_sizes.empty()) fail("lattice_sizes is empty");
  for (auto n : lattice_sizes) {
    if (n < 4) fail("lattice sizes must be at least 4");
  }
  if (grid < 16) fail("grid must be at least 16");
  if (!(dt >= 0) || dt > 0.25 / (static_cast<double>(grid) * grid)) fail("dt violates the stability limit 0.25/grid^2");
  if (!(horizon > 0) || !std::isfinite(horizon)) fail("horizon must be positive");
  if (replicas == 0) fail("replicas must be positive");
  if (!(eps > 0 && eps < 0.5)) fail("eps must lie in (0, 1/2)");
  try {
    (void)named_profile(profile.name, profile.params);
  } catch (const std::exception& e) {
    fail(std::string("profile: ") + e.what());
  }
  try {
    (void)named_field(perturbation.name, perturbation.params);
  } catch (const std::exception& e) {
    fail(std::string("perturbation: ") + e.what());
  }
}

bool ExperimentReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

ExperimentReport run(const ExperimentConfig& config, std::size_t threads) {
  config.validate();
  ExperimentReport report;
  report.config = config;
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto& k = config.kind;
    if (k == "hydro_symmetric" || k == "hydro_perturbed") hydro(config, k == "hydro_perturbed", threads, report);
    else if (k == "rate_check") rate_check(config, report);
    else if (k == "invert_check") invert_check(config, report);
    else if (k == "entropy_check") entropy_check(config, threads, report);
    else if (k == "energy_check") energy_check(config, report);
    else martingale_check(config, threads, report);
  } catch (const std::exception& e) {
    throw std::runtime_error(config.kind + ": " + e.what());
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!config.output.empty()) open_output(config, "report.json") << json(report).dump(2) << '\n';
  return report;
}

double headline(const ExperimentReport& report) {
  const auto& k = report.config.kind;
  std::string name = "closed_form_gap";
  if (k == "hydro_symmetric" || k == "hydro_perturbed") name = "l1_largest_n";
  else if (k == "invert_check") name = "gradient_relative_l2";
  else if (k == "entropy_check") name = "final_gap";
  else if (k == "energy_check") name = "closed_form_error";
  else if (k == "martingale_check") name = "mean_one_z";
  for (const auto& c : report.checks) {
    if (c.name == name) return c.value;
  }
  throw std::logic_error("headline: missing check " + name);
}

SweepResult sweep(const std::vector<ExperimentConfig>& configs, std::size_t threads) {
  SweepResult out;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    auto c = configs[i];
    if (!c.output.empty() && configs.size() > 1) c.output = (std::filesystem::path(c.output) / ("run_" + std::to_string(i))).string();
    out.reports.push_back(run(c, threads));
  }
  const bool same_kind = !configs.empty() && std::all_of(configs.begin(), configs.end(), [&](const auto& c) {
    return c.kind == configs.front().kind;
  });
  if (!same_kind) return out;
  std::vector<std::pair<std::size_t, double>> rows;
  for (const auto& r : out.reports) rows.emplace_back(r.config.lattice_sizes.back(), headline(r));
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> values;
  json sizes = json::array();
  for (const auto& [n, v] : rows) {
    sizes.push_back(n);
    values.push_back(v);
  }
  out.summary = {{"kind", configs.front().kind},
                 {"sizes", sizes},
                 {"values", values},
                 {"nonincreasing", largest_increase(values) <= 0}};
  return out;
}

void to_json(json& j, const NamedSpec& s) { j = {{"name", s.name}, {"params", s.params}}; }

void from_json(const json& j, NamedSpec& s) {
  j.at("name").get_to(s.name);
  s.params = j.value("params", std::vector<double>{});
}

void to_json(json& j, const ExperimentConfig& c) {
  j = {{"kind", c.kind},       {"lattice_sizes", c.lattice_sizes}, {"grid", c.grid},
       {"dt", c.dt},           {"horizon", c.horizon},             {"replicas", c.replicas},
       {"seed", c.seed},       {"eps", c.eps},                     {"profile", c.profile},
       {"perturbation", c.perturbation}, {"output", c.output}};
}

void from_json(const json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("config: expected an object");
  static const std::vector<std::string> keys = {"kind", "lattice_sizes", "grid",    "dt",           "horizon", "replicas",
                                                "seed", "eps",           "profile", "perturbation", "output"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  auto take = [&j](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  take("kind", c.kind);
  take("lattice_sizes", c.lattice_sizes);
  take("grid", c.grid);
  take("dt", c.dt);
  take("horizon", c.horizon);
  take("replicas", c.replicas);
  take("seed", c.seed);
  take("eps", c.eps);
  take("profile", c.profile);
  take("perturbation", c.perturbation);
  take("output", c.output);
}

void to_json(json& j, const CheckResult& c) {
  j = {{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"passed", c.passed}};
}

void to_json(json& j, const ExperimentReport& r) {
  j = {{"config", r.config},
       {"checks", r.checks},
       {"data", r.data},
       {"passed", r.passed()},
       {"timing", {{"seconds", r.seconds}}},
       {"version", r.version}};
}

json to_json(const SweepResult& s) { return {{"reports", s.reports}, {"summary", s.summary}}; }

std::vector<ExperimentConfig> load_configs(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  if (j.is_object() && j.contains("configs")) j = j.at("configs");
  std::vector<ExperimentConfig> out;
  try {
    if (j.is_array()) {
      for (const auto& item : j) out.push_back(item.get<ExperimentConfig>());
    } else {
      out.push_back(j.get<ExperimentConfig>());
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return out;
}

}  // namespace slowbond::harness

namespace slowbond::rate {

void to_json(nlohmann::json& j, const RateBreakdown& r) {
  j = {{"grad_term", r.grad_term}, {"plus_term", r.plus_term}, {"minus_term", r.minus_term}, {"total", r.total}};
}

}  // namespace slowbond::rate

namespace slowbond {

void to_json(nlohmann::json& j, const EntropyEstimate& e) {
  j = {{"n", e.n},
       {"replicas", e.replicas},
       {"mean_per_site", e.mean_per_site},
       {"std_error", e.std_error},
       {"compensated_mean", e.compensated_mean},
       {"compensated_std_error", e.compensated_std_error}};
}

void to_json(nlohmann::json& j, const MartingaleEstimate& m) {
  j = {{"replicas", m.replicas}, {"mean", m.mean}, {"std_error", m.std_error}};
}

}  // namespace slowbond
