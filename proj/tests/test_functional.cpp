#include <cmath>
#include <random>
#include <set>
#include <string>

#include <Eigen/SparseCholesky>
#include <doctest.h>

#include "hsys/functional.hpp"

using namespace hsys;

namespace {

struct Case {
  std::string name;
  ProblemParams params;
};

std::vector<Case> cases() {
  const double L3 = hardy_constant(3);
  return {
      {"N=4 subcritical, alpha=beta=1.4", make_params(4, 0.5, 0.5, 1, 1, 1, 1.4, 1.4, 2.0)},
      {"N=3 superquadratic", make_params(3, 0.3 * L3, 0.7 * L3, 0.5, 0.5, 0.5, 2.2, 2.2, 0.5)},
      {"N=4 critical coupling", make_params(4, 0.5, 0.3, 1, 1, 1, 1.5, 1.5, 1.0)},
      {"N=5 mixed orders", make_params(5, 1.0, 2.0, 0.6, 1.2, 1.4, 1.3, 1.1, 3.0)},
  };
}

RadialField<> bumps(const GridPtr<>& g, std::mt19937_64& rng, bool allow_negative) {
  std::uniform_real_distribution<double> centre(-3.0, 3.0), width(0.4, 1.5), amp(0.1, 1.5);
  RadialField<> u(g);
  for (int b = 0; b < 3; ++b) {
    const double c = centre(rng), w = width(rng);
    double a = amp(rng);
    if (allow_negative && b == 2) a = -a;
    u.values += a * (-((g->log_radii() - c) / w).square()).exp();
  }
  return u;
}

StatePair<> random_state(const GridPtr<>& g, std::mt19937_64& rng, bool allow_negative = false) {
  return {bumps(g, rng, allow_negative), bumps(g, rng, allow_negative)};
}

StatePair<> first_semitrivial(const ProblemParams& p, const GridPtr<>& g, double scale = 1.0) {
  return {sample_profile(make_profile(p.N, p.lambda1, p.s1), g).scaled(scale), RadialField<>(g)};
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("breakdown keys and the energy formula") {
  for (const auto& c : cases()) {
    CAPTURE(c.name);
    const auto g = build_grid<double>(c.params.N);
    Functional<> f(c.params, g);
    std::mt19937_64 rng(1);
    const auto s = random_state(g, rng);
    const auto e = f.breakdown(s);
    const auto& p = c.params;
    const double want = 0.5 * (e.dirichlet_u + e.dirichlet_v) - 0.5 * p.lambda1 * e.hardy_u -
                        0.5 * p.lambda2 * e.hardy_v - e.crit_u / p.crit1() - e.crit_v / p.crit2() - p.nu * e.coupling;
    CHECK(e.total == doctest::Approx(want).epsilon(1e-13));
    CHECK(e.coupling >= 0.0);

    std::vector<std::string> keys;
    for (const auto& [k, v] : e.items()) keys.emplace_back(k);
    CHECK(keys == std::vector<std::string>{"dirichlet_u", "dirichlet_v", "hardy_u", "hardy_v", "crit_u", "crit_v",
                                           "coupling", "total"});
  }
}

TEST_CASE("energy reference values") {
  for (const auto& c : cases()) {
    CAPTURE(c.name);
    const auto& p = c.params;
    const auto g = build_grid<double>(p.N);
    SUBCASE("first semitrivial sits at its critical level") {
      const double c1 = critical_level(p.N, p.lambda1, p.s1);
      CHECK(rel(energy(first_semitrivial(p, g), p).total, c1) < 1e-3);
    }
    SUBCASE("zero state") { CHECK(energy(StatePair<>(RadialField<>(g), RadialField<>(g)), p).total == 0.0); }
    SUBCASE("nu = 0 decouples") {
      auto q = p;
      q.nu = 0.0;
      std::mt19937_64 rng(2);
      const auto s = random_state(g, rng);
      const StatePair<> su(s.u, RadialField<>(g)), sv(RadialField<>(g), s.v);
      CHECK(energy(s, q).total == doctest::Approx(energy(su, q).total + energy(sv, q).total).epsilon(1e-13));
    }
  }
}

TEST_CASE("truncated energy") {
  const auto p = cases()[0].params;
  const auto g = build_grid<double>(p.N);
  std::mt19937_64 rng(3);
  SUBCASE("identical on nonnegative states") {
    const auto s = random_state(g, rng);
    const auto a = energy(s, p), b = energy_truncated(s, p);
    for (std::size_t i = 0; i < a.items().size(); ++i) CHECK(a.items()[i].second == b.items()[i].second);
  }
  SUBCASE("nonpositive u carries no critical or coupling mass") {
    auto s = random_state(g, rng);
    s.u = s.u.scaled(-1.0);
    const auto b = energy_truncated(s, p);
    CHECK(b.crit_u == 0.0);
    CHECK(b.coupling == 0.0);
    CHECK(energy(s, p).crit_u > 0.0);
  }
  SUBCASE("mixed sign lowers the critical term") {
    const auto s = random_state(g, rng, true);
    CHECK(energy_truncated(s, p).crit_u < energy(s, p).crit_u);
  }
}

TEST_CASE("gradient matches central differences of the energy") {
  for (const auto& c : cases()) {
    CAPTURE(c.name);
    const auto g = build_grid<double>(c.params.N);
    Functional<> f(c.params, g);
    std::mt19937_64 rng(42);
    for (int k = 0; k < 20; ++k) {
      const auto s = random_state(g, rng);
      // perturbations proportional to the state keep s + h d away from the kinks of |u|^alpha at u = 0
      const auto m = random_state(g, rng, true);
      const StatePair<> d(RadialField<>(g, s.u.values * m.u.values), RadialField<>(g, s.v.values * m.v.values));
      const double h = 1e-4;
      const StatePair<> plus(RadialField<>(g, s.u.values + h * d.u.values), RadialField<>(g, s.v.values + h * d.v.values));
      const StatePair<> minus(RadialField<>(g, s.u.values - h * d.u.values), RadialField<>(g, s.v.values - h * d.v.values));
      const StatePair<> plus2(RadialField<>(g, s.u.values + 2 * h * d.u.values),
                              RadialField<>(g, s.v.values + 2 * h * d.v.values));
      const StatePair<> minus2(RadialField<>(g, s.u.values - 2 * h * d.u.values),
                               RadialField<>(g, s.v.values - 2 * h * d.v.values));
      // fourth-order central stencil
      const double fd = (8 * (f.energy(plus) - f.energy(minus)) - (f.energy(plus2) - f.energy(minus2))) / (12 * h);
      const double analytic = f.pairing(f.gradient(s), d);
      CAPTURE(k);
      CHECK(rel(analytic, fd) < 1e-6);
    }
  }
}

TEST_CASE("gradient at special states") {
  for (const auto& c : cases()) {
    CAPTURE(c.name);
    const auto& p = c.params;
    const auto g = build_grid<double>(p.N);
    Functional<> f(p, g);
    SUBCASE("zero state") {
      const auto G = f.gradient(StatePair<>(RadialField<>(g), RadialField<>(g)));
      CHECK(G.u.is_zero());
      CHECK(G.v.is_zero());
    }
    SUBCASE("semitrivial is a discrete critical point up to grid error") {
      const auto s = first_semitrivial(p, g);
      const auto [gu, gv] = f.derivative(s);
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(f.stiffness(0));
      const Eigen::VectorXd x = ldlt.solve(gu.matrix());
      const double dual = std::sqrt(gu.matrix().dot(x));
      CHECK(dual / std::sqrt(f.norm_sq(s)) < 1e-3);
      CHECK(gv.abs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("lambda norm") {
  const auto g = build_grid<double>(4);
  std::mt19937_64 rng(8);
  const auto u = bumps(g, rng, true);
  CHECK(lambda_norm_sq(u, 0.0) ==
        doctest::Approx(dirichlet_energy(u, std::optional<TailModel<>>(TailModel<>::hardy(4, 0.0)))).epsilon(1e-14));
  for (int k = 0; k < 20; ++k) CHECK(lambda_norm_sq(bumps(g, rng, true), 0.99) > 0.0);
  CHECK_THROWS_AS(lambda_norm_sq(u, 1.0), Error);
  const double mass = extremal_mass(4, 0.5, 1.0);
  CHECK(rel(lambda_norm_sq(sample_profile(make_profile(4, 0.5, 1.0), g), 0.5), mass) < 1e-3);
  // stiffness matrix reproduces the quadratic form
  const auto p = cases()[0].params;
  Functional<> f(p, g);
  CHECK(u.values.matrix().dot(f.stiffness(0) * u.values.matrix()) ==
        doctest::Approx(lambda_norm_sq(u, p.lambda1)).epsilon(1e-12));
}

TEST_CASE("Nehari residual") {
  for (const auto& c : cases()) {
    CAPTURE(c.name);
    const auto& p = c.params;
    const auto g = build_grid<double>(p.N);
    Functional<> f(p, g);
    const auto z = first_semitrivial(p, g);
    CHECK(std::abs(f.nehari_residual(z)) / f.norm_sq(z) < 1e-3);

    auto q = p;
    q.nu = 0.0;
    Functional<> f0(q, g);
    const auto z2 = first_semitrivial(p, g, 2.0);
    const double want = 4 * f0.lambda_norm_sq(0, z.u.values) - std::pow(2.0, p.crit1()) * f0.critical(0, z.u.values);
    CHECK(f0.nehari_residual(z2) == doctest::Approx(want).epsilon(1e-12));
    CHECK(f0.nehari_residual(z2) < 0.0);
    CHECK(f.nehari_residual(first_semitrivial(p, g, 1e-3)) > 0.0);

    try {
      f.nehari_residual(StatePair<>(RadialField<>(g), RadialField<>(g)));
      FAIL("zero state accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UndefinedState);
    }
  }
}

TEST_CASE("Nehari residual has one sign change along rays") {
  for (const auto& c : cases()) {
    CAPTURE(c.name);
    const auto g = build_grid<double>(c.params.N);
    Functional<> f(c.params, g);
    std::mt19937_64 rng(9);
    for (int k = 0; k < 5; ++k) {
      const auto s = random_state(g, rng, true);
      int changes = 0;
      double prev = f.nehari_residual(s.scaled(1e-4));
      CHECK(prev > 0);
      for (double y = -4; y <= 4; y += 0.05) {
        const double cur = f.nehari_residual(s.scaled(std::pow(10.0, y)));
        if ((cur < 0) != (prev < 0)) ++changes;
        prev = cur;
      }
      CHECK(prev < 0);
      CHECK(changes == 1);
    }
  }
}

TEST_CASE("Nehari projection") {
  for (const auto& c : cases()) {
    CAPTURE(c.name);
    const auto& p = c.params;
    const auto g = build_grid<double>(p.N);
    Functional<> f(p, g);
    std::mt19937_64 rng(10);
    SUBCASE("random states land on the manifold and re-project with t = 1") {
      for (int k = 0; k < 25; ++k) {
        const auto s = random_state(g, rng, k % 2 == 1).scaled(std::pow(10.0, (k % 5) - 2.0));
        const auto pr = f.project(s);
        CHECK(std::abs(pr.residual) / f.norm_sq(pr.projected) <= 1e-10);
        CHECK(pr.residual == doctest::Approx(f.nehari_residual(pr.projected)).epsilon(1e-12));
        CHECK(std::abs(f.project(pr.projected).t - 1) <= 1e-10);
      }
    }
    SUBCASE("homogeneity without coupling") {
      auto q = p;
      q.nu = 0.0;
      Functional<> f0(q, g);
      const double t1 = f0.project(first_semitrivial(p, g)).t;
      for (double scale : {0.01, 0.5, 3.0, 40.0})
        CHECK(f0.project(first_semitrivial(p, g, scale)).t == doctest::Approx(t1 / scale).epsilon(1e-11));
    }
    SUBCASE("semitrivial is already projected up to grid error") {
      CHECK(std::abs(f.project(first_semitrivial(p, g)).t - 1) < 1e-3);
    }
    SUBCASE("degenerate direction") {
      auto s = random_state(g, rng);
      s = StatePair<>(s.u.scaled(-1), s.v.scaled(-1));
      try {
        f.project(s, Truncation::PositivePart);
        FAIL("degenerate direction accepted");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ProjectionImpossible);
      }
    }
  }
}

TEST_CASE("constrained energy forms") {
  for (const auto& c : cases()) {
    CAPTURE(c.name);
    const auto& p = c.params;
    const auto g = build_grid<double>(p.N);
    Functional<> f(p, g);
    SUBCASE("semitrivial") {
      const auto z = f.project(first_semitrivial(p, g)).projected;
      const auto forms = f.constrained_forms(z);
      const double c1 = critical_level(p.N, p.lambda1, p.s1);
      CHECK(rel(forms.direct, c1) < 1e-3);
      CHECK(rel(forms.by_norm, c1) < 1e-3);
      CHECK(rel(forms.by_critical, c1) < 1e-3);
    }
    SUBCASE("projected random states") {
      std::mt19937_64 rng(12);
      for (int k = 0; k < 10; ++k) {
        const auto pr = f.project(random_state(g, rng));
        const auto forms = f.constrained_forms(pr.projected);
        const double tol = 10 * std::abs(pr.residual) / f.norm_sq(pr.projected) + 1e-12;
        CHECK(forms.direct > 0);
        CHECK(forms.by_norm > 0);
        CHECK(forms.by_critical > 0);
        CHECK(rel(forms.by_norm, forms.direct) <= tol);
        CHECK(rel(forms.by_critical, forms.direct) <= tol);
        CHECK(f.natural_constraint_derivative(pr.projected) < 0);
      }
    }
    SUBCASE("off the manifold") {
      std::mt19937_64 rng(13);
      const auto s = random_state(g, rng);
      try {
        f.constrained_forms(s);
        FAIL("off-manifold state accepted");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OffManifold);
      }
      CHECK_THROWS_AS(f.natural_constraint_derivative(s), Error);
    }
  }
}

TEST_CASE("generalized Hoelder bound") {
  for (const auto& c : cases()) {
    CAPTURE(c.name);
    const auto& p = c.params;
    const auto g = build_grid<double>(p.N);
    for (double mu : {1e-2, 1.0, 30.0}) {
      const StatePair<> s(sample_profile(make_profile(p.N, p.lambda1, p.s1), g),
                          sample_profile(make_profile(p.N, p.lambda2, p.s2, mu), g));
      const auto rep = holder_bound_check(s, p);
      CHECK(rep.holds);
      CHECK(rep.slack > 0.0);
      CHECK(rep.slack <= 1.0);
      CHECK(rep.h_norm > 0.0);
    }
    const StatePair<> half(sample_profile(make_profile(p.N, p.lambda1, p.s1), g), RadialField<>(g));
    const auto rep = holder_bound_check(half, p);
    CHECK(rep.coupling == 0.0);
    CHECK(rep.bound == 0.0);
  }
}

TEST_CASE("mismatched grids") {
  const auto p = cases()[0].params;
  Functional<> f(p, build_grid<double>(4));
  const auto other = build_grid<double>(4, 1e-5, 1e5, 512);
  try {
    f.energy(StatePair<>(RadialField<>(other), RadialField<>(other)));
    FAIL("foreign grid accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MismatchedGrids);
  }
}
