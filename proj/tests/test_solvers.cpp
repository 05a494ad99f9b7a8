#include <cmath>

#include <doctest.h>

#include "hsys/regime.hpp"
#include "hsys/solvers.hpp"

using namespace hsys;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// N=4, s=1, lambda=0.5, alpha=beta=1.4: sublinear coupling, c1 = c2.
ProblemParams subquadratic(double nu) { return make_params(4, 0.5, 0.5, 1, 1, 1, 1.4, 1.4, nu); }

// N=3, s=0.5, alpha=beta=2.2 with c1 > c2; lambda2 picks the level gap.
ProblemParams superquadratic(double lambda2_frac, double nu) {
  const double L = hardy_constant(3);
  return make_params(3, 0.3 * L, lambda2_frac * L, 0.5, 0.5, 0.5, 2.2, 2.2, nu);
}

StatePair<> mixed(const ProblemParams& p, const GridPtr<>& g, double c, double mu) {
  return {semitrivial(Semitrivial::First, mu, p, g).u.scaled(c), semitrivial(Semitrivial::Second, mu, p, g).v.scaled(1 - c)};
}

}  // namespace

TEST_CASE("solver settings") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto bad = cfg;
  bad.grad_tol = 1e-13;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.max_iters = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.armijo_shrink = 1.5;
  try {
    bad.validate();
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}

TEST_CASE("semitrivial states") {
  const auto p = superquadratic(0.7, 0.3);
  const auto g = build_grid<double>(3);
  Functional<> f(p, g);
  const double c1 = critical_level(3, p.lambda1, p.s1), c2 = critical_level(3, p.lambda2, p.s2);
  const auto a = semitrivial(Semitrivial::First, 1.0, p, g);
  CHECK(a.v.is_zero());
  CHECK(rel(f.energy(a), c1) < 1e-4);
  CHECK(std::abs(f.nehari_residual(a)) / f.norm_sq(a) < 1e-4);
  const auto b1 = semitrivial(Semitrivial::Second, 1.0, p, g);
  const auto b2 = semitrivial(Semitrivial::Second, 2.0, p, g);
  CHECK(b1.u.is_zero());
  CHECK(rel(f.energy(b1), c2) < 1e-4);
  CHECK(rel(f.energy(b2), f.energy(b1)) < 1e-4);
  CHECK_THROWS_AS(semitrivial(Semitrivial::First, 0.0, p, g), Error);
}

TEST_CASE("classification") {
  const auto p = subquadratic(1.0);
  const auto g = build_grid<double>(4);
  Functional<> f(p, g);
  const auto z1 = semitrivial(Semitrivial::First, 1.0, p, g).u;
  const auto z2 = semitrivial(Semitrivial::Second, 1.0, p, g).v;
  CHECK(classify(StatePair<>(z1, z2.scaled(1e-8)), f) == Classification::SemitrivialU);
  CHECK(classify(StatePair<>(z1.scaled(1e-8), z2), f) == Classification::SemitrivialV);
  CHECK(classify(StatePair<>(z1, z2.scaled(1e-4)), f) == Classification::Coupled);
  CHECK(classify(StatePair<>(RadialField<>(g), RadialField<>(g)), f) == Classification::Failed);
  CHECK(std::string(to_string(Classification::SemitrivialV)) == "SemitrivialV");
}

TEST_CASE("ground state without coupling stays at the semitrivial") {
  auto p = subquadratic(0.0);
  const auto g = build_grid<double>(4);
  const auto z = semitrivial(Semitrivial::First, 1.0, p, g);
  const auto r = ground_state(p, z, SolverConfig{});
  CHECK(r.converged);
  CHECK(r.classification == Classification::SemitrivialU);
  CHECK(rel(r.energy, critical_level(4, 0.5, 1.0)) < 1e-4);
  // the start is a discrete critical point up to grid error: only a handful of tiny steps
  CHECK(r.iters <= 5);
  CHECK(std::abs(r.energy - r.trace.front().energy) < 1e-8 * r.energy);
}

TEST_CASE("ground state at large coupling") {
  const auto p = subquadratic(100.0);
  const auto g = build_grid<double>(4);
  const double cmin = critical_level(4, 0.5, 1.0);
  SolverConfig cfg;
  double energies[3];
  int k = 0;
  for (double mu : {0.5, 1.0, 2.0}) {
    const auto r = ground_state(p, mixed(p, g, 0.5, mu), cfg);
    CAPTURE(mu);
    CHECK(r.converged);
    CHECK(r.classification == Classification::Coupled);
    CHECK(r.energy < cmin * (1 - 1e-3));
    CHECK(std::abs(r.nehari_residual) <= 1e-8 * Functional<>(p, g).norm_sq(r.state));
    CHECK(r.state.nonnegative());
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].energy <= r.trace[i - 1].energy + cfg.energy_tol);
    energies[k++] = r.energy;
  }
  // scale invariance of the continuum problem, up to grid error
  CHECK(rel(energies[0], energies[1]) < 1e-4);
  CHECK(rel(energies[2], energies[1]) < 1e-4);
}

TEST_CASE("ground state rejects the zero state") {
  const auto p = subquadratic(1.0);
  const auto g = build_grid<double>(4);
  CHECK_THROWS_AS(ground_state(p, StatePair<>(RadialField<>(g), RadialField<>(g)), SolverConfig{}), Error);
}

TEST_CASE("multistart at small coupling finds the lower semitrivial") {
  const auto g = build_grid<double>(3);
  for (double nu : {1e-4, 1e-3}) {
    const auto p = superquadratic(0.7, nu);
    const auto rep = classify_regime(p);
    REQUIRE(rep.c1 > rep.c2);
    const auto ms = multistart_ground_state(p, g, SolverConfig{}, 7);
    CAPTURE(nu);
    CHECK(ms.runs.size() == 5);
    CHECK(ms.best.classification == Classification::SemitrivialV);
    CHECK(rel(ms.best.energy, rep.c2) < 1e-2);
    for (const auto& r : ms.runs) {
      CHECK(r.state.nonnegative());
      if (r.classification != Classification::Failed) CHECK(ms.best.energy <= r.energy);
    }
  }
}

TEST_CASE("multistart is reproducible from its seed") {
  const auto p = subquadratic(10.0);
  const auto g = build_grid<double>(4, 1e-5, 1e5, 1024);
  const auto a = multistart_ground_state(p, g, SolverConfig{}, 3);
  const auto b = multistart_ground_state(p, g, SolverConfig{}, 3);
  REQUIRE(a.runs.size() == b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].energy == b.runs[i].energy);
    CHECK((a.runs[i].state.u.values == b.runs[i].state.u.values).all());
  }
}

TEST_CASE("mountain pass") {
  const auto g = build_grid<double>(3);
  SUBCASE("outside the level window") {
    const auto p = superquadratic(0.7, 0.01);  // c1 > 2 c2
    try {
      mountain_pass(p, g, SolverConfig{});
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::RegimeViolation);
    }
  }
  SUBCASE("inside the window at small coupling") {
    const auto p = superquadratic(0.5, 0.01);
    const auto rep = classify_regime(p);
    REQUIRE(rep.mountain_pass_c1_above == Applicability::SmallNu);
    const auto mp = mountain_pass(p, g, SolverConfig{});
    CHECK(rel(mp.initial_path.front(), rep.c1) < 1e-4);
    CHECK(rel(mp.initial_path.back(), rep.c2) < 1e-4);
    CHECK(mp.final_path.front() == mp.initial_path.front());
    CHECK(mp.final_path.back() == mp.initial_path.back());
    CHECK(mp.initial_max < rep.c1 + rep.c2);
    CHECK(mp.c_mp > rep.c1 * (1 + 1e-3));
    CHECK(mp.c_mp < rep.c1 + rep.c2);
    CHECK(mp.cmp_history.front() == mp.initial_max);
    for (std::size_t i = 1; i < mp.cmp_history.size(); ++i) CHECK(mp.cmp_history[i] <= mp.cmp_history[i - 1]);
    CHECK(mp.max_node > 0);
    CHECK(mp.max_node + 1 < static_cast<int>(mp.final_path.size()));
    CHECK(mp.bound_state.state.nonnegative());
  }
}

TEST_CASE("concentration diagnostics") {
  const auto p = subquadratic(1.0);
  const auto g = build_grid<double>(4);
  const auto centred = concentration_report(mixed(p, g, 0.5, 1.0), p, 1e-3, 1e3);
  CHECK(centred.rho_0_u < 0.05);
  CHECK(centred.rho_inf_u < 0.05);
  CHECK(centred.rho_0_v < 0.05);
  CHECK(centred.rho_inf_v < 0.05);

  const auto squeezed = concentration_report(mixed(p, g, 0.5, 1e-4), p, 1e-3, 1e3);
  CHECK(squeezed.rho_0_u > 0.5);
  CHECK(squeezed.rho_0_v > 0.5);
  for (double x : {squeezed.rho_0_u, squeezed.rho_inf_u, squeezed.rho_0_v, squeezed.rho_inf_v}) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }

  const auto zero = concentration_report(StatePair<>(RadialField<>(g), RadialField<>(g)), p, 1e-3, 1e3);
  CHECK(zero.rho_0_u == 0.0);
  CHECK(zero.rho_inf_v == 0.0);
  CHECK_THROWS_AS(concentration_report(mixed(p, g, 0.5, 1.0), p, 1.0, 0.5), Error);
}
