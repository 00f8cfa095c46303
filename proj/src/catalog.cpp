#include "slowbond/catalog.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace slowbond {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr int kSmoothBump = 8;

void expect(const std::string& name, const std::vector<double>& p, std::size_t n) {
  if (p.size() != n) {
    throw std::invalid_argument(name + ": expected " + std::to_string(n) + " parameters, got " +
                                std::to_string(p.size()));
  }
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Profile cosine_profile(double mean, double amp, double k, double phase) {
  return {[=](double u) { return mean + amp * std::cos(kTwoPi * k * u + phase); },
          [=](double u) {
            return mean * u + amp * (std::sin(kTwoPi * k * u + phase) - std::sin(phase)) / (kTwoPi * k);
          }};
}

}  // namespace

Profile named_profile(const std::string& name, const std::vector<double>& p) {
  if (name == "constant") {
    expect(name, p, 1);
    return constant_profile(p[0]);
  }
  if (name == "linear") {
    expect(name, p, 2);
    const double a = p[0], b = p[1];
    return {[=](double u) { return a + b * u; }, [=](double u) { return a * u + 0.5 * b * u * u; }};
  }
  if (name == "cosine") {
    expect(name, p, 4);
    if (p[2] <= 0) throw std::invalid_argument("cosine: k must be positive");
    return cosine_profile(p[0], p[1], p[2], p[3]);
  }
  if (name == "smoothed_step") {
    expect(name, p, 4);
    const double hi = p[0], lo = p[1], c = p[2], w = p[3];
    if (w <= 0) throw std::invalid_argument("smoothed_step: width must be positive");
    // lo + (hi - lo) / (1 + e^{(u-c)/w}); the antiderivative uses softplus.
    return {[=](double u) { return lo + (hi - lo) / (1.0 + std::exp((u - c) / w)); },
            [=](double u) {
              return lo * u + (hi - lo) * (u - w * softplus((u - c) / w) + w * softplus(-c / w));
            }};
  }
  throw std::invalid_argument("unknown profile '" + name + "'");
}

FieldPtr bump_field(double amp, double centre, double hw) {
  if (hw <= 0 || centre - hw < 0 || centre + hw > 1) {
    throw std::invalid_argument("bump: support must lie inside [0,1]");
  }
  auto s_of = [=](double u) { return (u - centre) / hw; };
  auto zero = [](double, double) { return 0.0; };
  return make_field({[=](double, double u) {
                       const double s = s_of(u);
                       return std::abs(s) < 1 ? amp * std::pow(1 - s * s, 4) : 0.0;
                     },
                     [=](double, double u) {
                       const double s = s_of(u);
                       return std::abs(s) < 1 ? amp * -8 * s * std::pow(1 - s * s, 3) / hw : 0.0;
                     },
                     zero,
                     [=](double, double u) {
                       const double s = s_of(u), q = 1 - s * s;
                       return std::abs(s) < 1 ? amp * (-8 * q * q * q + 48 * s * s * q * q) / (hw * hw) : 0.0;
                     }});
}

FieldPtr named_field(const std::string& name, const std::vector<double>& p) {
  auto zero = [](double, double) { return 0.0; };
  if (name == "zero") {
    expect(name, p, 0);
    return zero_field();
  }
  if (name == "constant") {
    expect(name, p, 1);
    return constant_field(p[0]);
  }
  if (name == "linear_u") {
    expect(name, p, 1);
    const double a = p[0];
    return make_field({[a](double, double u) { return a * u; }, [a](double, double) { return a; }, zero, zero});
  }
  if (name == "composite") {
    expect(name, p, 4);
    const double a = p[0], b = p[1], w = kTwoPi * p[2], c = p[3];
    SeparableTerm term;
    term.time = [c](double t) { return std::array<double, 2>{1 + c * t, c}; };
    term.space = [=](double u) {
      return std::array<double, 3>{a * u + b * std::sin(w * u), a + b * w * std::cos(w * u),
                                   -b * w * w * std::sin(w * u)};
    };
    return std::make_shared<SeparableField>(std::vector<SeparableTerm>{term});
  }
  if (name == "bump") {
    expect(name, p, 3);
    return bump_field(p[0], p[1], p[2]);
  }
  if (name == "random") {
    expect(name, p, 2);
    return random_test_field(static_cast<std::uint64_t>(p[0]), p[1]);
  }
  throw std::invalid_argument("unknown field '" + name + "'");
}

Profile random_profile(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x70f11e5ull);
  std::uniform_real_distribution<double> amp(-0.12, 0.12), phase(0, kTwoPi);
  double a[3], ph[3];
  for (int k = 0; k < 3; ++k) {
    a[k] = amp(rng);
    ph[k] = phase(rng);
  }
  auto density = [=](double u) {
    double s = 0.5;
    for (int k = 0; k < 3; ++k) s += a[k] * std::cos(kTwoPi * (k + 1) * u + ph[k]);
    return s;
  };
  auto cumulative = [=](double u) {
    double s = 0.5 * u;
    for (int k = 0; k < 3; ++k) s += a[k] * (std::sin(kTwoPi * (k + 1) * u + ph[k]) - std::sin(ph[k])) / (kTwoPi * (k + 1));
    return s;
  };
  return {density, cumulative};
}

FieldPtr random_test_field(std::uint64_t seed, double horizon) {
  if (!(horizon > 0)) throw std::invalid_argument("random_test_field: horizon must be positive");
  std::mt19937_64 rng(seed ^ 0x7e57f1e1dull);
  std::uniform_real_distribution<double> coef(-1, 1), freq(0, kTwoPi / horizon), phase(0, kTwoPi);
  std::vector<SeparableTerm> terms;
  for (int k = 0; k <= 2; ++k) {
    for (int l = 0; l <= 2; ++l) {
      SeparableTerm term;
      term.coefficient = coef(rng);
      const double w = freq(rng), ph = phase(rng);
      term.time = [w, ph](double t) { return std::array<double, 2>{std::cos(w * t + ph), -w * std::sin(w * t + ph)}; };
      // u^k (1-u)^l with k, l <= 2, differentiated by the product rule.
      term.space = [k, l](double u) {
        const double v = 1 - u;
        const double pu[3] = {1, u, u * u}, pv[3] = {1, v, v * v};
        const double du[3] = {0, 1, 2 * u}, dv[3] = {0, -1, -2 * v};
        const double ddu[3] = {0, 0, 2}, ddv[3] = {0, 0, 2};
        return std::array<double, 3>{pu[k] * pv[l], du[k] * pv[l] + pu[k] * dv[l],
                                     ddu[k] * pv[l] + 2 * du[k] * dv[l] + pu[k] * ddv[l]};
      };
      terms.push_back(std::move(term));
    }
  }
  return std::make_shared<SeparableField>(std::move(terms));
}

std::array<double, 4> bump_derivatives(double centre, double hw, double u, int power) {
  if (power < 3) throw std::invalid_argument("bump_derivatives: power must be at least 3");
  const double s = (u - centre) / hw;
  if (std::abs(s) >= 1) return {0, 0, 0, 0};
  const double q = 1 - s * s, p = power;
  const double q3 = std::pow(q, power - 3), q2 = q3 * q, q1 = q2 * q;
  return {q1 * q, -2 * p * s * q1 / hw, (-2 * p * q1 + 4 * p * (p - 1) * s * s * q2) / (hw * hw),
          (12 * p * (p - 1) * s * q2 - 8 * p * (p - 1) * (p - 2) * s * s * s * q3) / (hw * hw * hw)};
}

namespace {

struct Bump {
  double amp, centre, hw, w, phase;
};

std::vector<Bump> random_bumps(std::mt19937_64& rng, int count, double max_amp, double max_freq) {
  std::uniform_real_distribution<double> amp(-max_amp, max_amp), centre(0.3, 0.7), hw(0.08, 0.2),
      freq(0, max_freq), phase(0, kTwoPi);
  std::vector<Bump> out;
  for (int i = 0; i < count; ++i) out.push_back({amp(rng), centre(rng), hw(rng), freq(rng), phase(rng)});
  return out;
}

SeparableTerm bump_term(const Bump& b, double scale, int derivative) {
  SeparableTerm term;
  term.coefficient = scale * b.amp;
  term.time = [w = b.w, p = b.phase](double t) {
    return std::array<double, 2>{std::cos(w * t + p), -w * std::sin(w * t + p)};
  };
  term.space = [b, derivative](double u) {
    const auto d = bump_derivatives(b.centre, b.hw, u, kSmoothBump);
    return std::array<double, 3>{d[derivative], d[derivative + 1], d[derivative + 2]};
  };
  return term;
}

}  // namespace

EnergyTestPath energy_test_path(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xe4e26ull);
  const auto bumps = random_bumps(rng, 2, 0.2, 10.0);
  EnergyTestPath p;
  p.rho = [bumps](double t, double u) {
    double s = 0.5;
    for (const auto& b : bumps) s += b.amp * std::cos(b.w * t + b.phase) * bump_derivatives(b.centre, b.hw, u, kSmoothBump)[0];
    return s;
  };
  p.du_rho = [bumps](double t, double u) {
    double s = 0;
    for (const auto& b : bumps) s += b.amp * std::cos(b.w * t + b.phase) * bump_derivatives(b.centre, b.hw, u, kSmoothBump)[1];
    return s;
  };
  std::vector<SeparableTerm> terms;
  for (const auto& b : bumps) terms.push_back(bump_term(b, -0.25, 1));
  p.maximizer = std::make_shared<SeparableField>(std::move(terms));
  return p;
}

FieldPtr random_admissible_field(std::uint64_t seed, double horizon) {
  if (!(horizon > 0)) throw std::invalid_argument("random_admissible_field: horizon must be positive");
  std::mt19937_64 rng(seed ^ 0xad3155ull);
  std::vector<SeparableTerm> terms;
  for (const auto& b : random_bumps(rng, 3, 1.0, kTwoPi / horizon)) terms.push_back(bump_term(b, 1.0, 0));
  return std::make_shared<SeparableField>(std::move(terms));
}

}  // namespace slowbond
