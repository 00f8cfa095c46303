#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "slowbond/harness.hpp"

using namespace slowbond;
using namespace slowbond::harness;
using nlohmann::json;

namespace {

ExperimentConfig martingale() {
  ExperimentConfig c;
  c.kind = "martingale_check";
  c.lattice_sizes = {16};
  c.replicas = 300;
  c.horizon = 0.05;
  c.profile = {"constant", {0.5}};
  c.perturbation = {"composite", {1.0, 0.3, 1.0, 0.5}};
  return c;
}

ExperimentConfig entropy(std::vector<std::size_t> sizes, NamedSpec h) {
  ExperimentConfig c;
  c.kind = "entropy_check";
  c.lattice_sizes = std::move(sizes);
  c.replicas = 10;
  c.grid = 64;
  c.horizon = 0.02;
  c.profile = {"cosine", {0.5, 0.2, 1.0, 0.0}};
  c.perturbation = std::move(h);
  return c;
}

const CheckResult& check(const ExperimentReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return c;
  }
  FAIL("missing check " << name);
  throw std::logic_error("unreachable");
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("slowbond_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config json round trip") {
  const auto c = martingale();
  const json j = c;
  const auto back = j.get<ExperimentConfig>();
  CHECK(json(back) == j);
  CHECK(j.at("profile").at("name") == "constant");

  const auto partial = json::parse(R"({"kind": "rate_check", "seed": 9})").get<ExperimentConfig>();
  CHECK(partial.kind == "rate_check");
  CHECK(partial.seed == 9);
  CHECK(partial.grid == ExperimentConfig{}.grid);
  CHECK_THROWS_AS(json::parse(R"({"kind": "rate_check", "sede": 9})").get<ExperimentConfig>(), std::invalid_argument);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = [](auto edit) {
    ExperimentConfig c;
    edit(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](auto& c) { c.kind = "nope"; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](auto& c) { c.lattice_sizes.clear(); }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](auto& c) { c.dt = 1.0 / (c.grid * c.grid); }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](auto& c) { c.horizon = 0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](auto& c) { c.replicas = 0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](auto& c) { c.profile = {"cosine_bumpy", {}}; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](auto& c) { c.perturbation = {"composite", {1.0}}; }).validate(), std::invalid_argument);
}

TEST_CASE("entropy check with the zero field") {
  const auto r = run(entropy({16, 32, 64}, {"zero", {}}));
  CHECK(r.passed());
  for (const auto& e : r.data.at("estimates")) {
    CHECK(e.at("mean_per_site") == 0.0);
    CHECK(e.at("compensated_mean") == 0.0);
    CHECK(e.at("std_error") == 0.0);
  }
  CHECK(r.data.at("rate").at("total") == 0.0);
}

TEST_CASE("martingale check") {
  const auto r = run(martingale());
  CHECK(r.passed());
  CHECK(r.checks.size() == 1);
  CHECK(r.data.at("martingale").at("replicas") == 300);
}

TEST_CASE("reruns reproduce every number") {
  const auto c = martingale();
  const json a = run(c, 1), b = run(c, 3);
  CHECK(a.at("data") == b.at("data"));
  CHECK(a.at("checks") == b.at("checks"));

  // From the echoed config of a written report.
  auto written = c;
  written.output = scratch_dir("rerun").string();
  run(written);
  std::ifstream is(std::filesystem::path(written.output) / "report.json");
  const auto report = json::parse(is);
  auto echoed = report.at("config").get<ExperimentConfig>();
  echoed.output.clear();
  CHECK(json(run(echoed)).at("data") == report.at("data"));
  std::filesystem::remove_all(written.output);
}

TEST_CASE("every check appears once") {
  const auto r = run(entropy({16, 32}, {"composite", {1.0, 0.3, 1.0, 0.0}}));
  for (const auto& a : r.checks) {
    int seen = 0;
    for (const auto& b : r.checks) seen += a.name == b.name;
    CHECK(seen == 1);
  }
  CHECK(check(r, "final_gap").tolerance >= 0.1);
}

TEST_CASE("sweeps") {
  CHECK(sweep({}).reports.empty());
  CHECK(sweep({}).summary.is_null());

  const auto one = sweep({martingale()});
  REQUIRE(one.reports.size() == 1);
  CHECK(json(one.reports.front()).at("data") == json(run(martingale())).at("data"));

  const auto h = NamedSpec{"composite", {1.0, 0.3, 1.0, 0.0}};
  const auto s = sweep({entropy({128}, h), entropy({32}, h), entropy({64}, h)});
  CHECK(s.summary.at("kind") == "entropy_check");
  CHECK(s.summary.at("sizes") == json({32, 64, 128}));
  CHECK(s.summary.at("values").size() == 3);
  CHECK(s.summary.contains("nonincreasing"));

  auto mixed = sweep({martingale(), entropy({16}, h)});
  CHECK(mixed.summary.is_null());
}

TEST_CASE("output files") {
  auto c = entropy({16}, {"zero", {}});
  c.output = scratch_dir("files").string();
  run(c);
  CHECK(std::filesystem::exists(std::filesystem::path(c.output) / "report.json"));

  auto inv = ExperimentConfig{};
  inv.kind = "invert_check";
  inv.grid = 64;
  inv.horizon = 0.01;
  inv.profile = {"cosine", {0.5, 0.2, 1.0, 0.0}};
  inv.output = c.output;
  const auto r = run(inv);
  std::ifstream is(std::filesystem::path(c.output) / "inverse.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,u,H,dH");
  CHECK(check(r, "root_residual").passed);
  std::filesystem::remove_all(c.output);
}

TEST_CASE("module errors carry the experiment kind") {
  auto c = ExperimentConfig{};
  c.kind = "invert_check";
  c.grid = 64;
  c.horizon = 0.01;
  c.profile = {"constant", {1.0}};
  try {
    run(c);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).rfind("invert_check: ", 0) == 0);
  }
}

TEST_CASE("result json") {
  const json r = rate::RateBreakdown{1, 2, 3, 6};
  CHECK(r == json::parse(R"({"grad_term":1.0,"plus_term":2.0,"minus_term":3.0,"total":6.0})"));
  EntropyEstimate e;
  e.n = 32;
  e.replicas = 5;
  e.mean_per_site = 0.1;
  e.std_error = 0.01;
  const json j = e;
  CHECK(j.at("n") == 32);
  CHECK(j.at("replicas") == 5);
  CHECK(j.at("mean_per_site") == 0.1);
  CHECK(j.at("std_error") == 0.01);
}
