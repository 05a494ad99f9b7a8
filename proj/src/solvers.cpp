#include "hsys/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <string>

#include "hsys/regime.hpp"

namespace hsys {

namespace {

constexpr Truncation kTr = Truncation::PositivePart;
constexpr double kMinStep = 1e-14;
constexpr int kEnergyWindow = 10;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::Config, "invalid solver setting: " + what);
}

StatePair<> clipped_step(const StatePair<>& x, const Eigen::ArrayXd& du, const Eigen::ArrayXd& dv, double eta) {
  const auto& g = x.u.grid;
  return {RadialField<>(g, (x.u.values - eta * du).max(0.0)), RadialField<>(g, (x.v.values - eta * dv).max(0.0))};
}

struct Direction {
  Eigen::ArrayXd du, dv;
  double norm_sq = 0.0;  // gᵀ K^{-1} g
};

Direction sobolev_direction(const Functional<>& f, const SobolevMetric& metric, const StatePair<>& x) {
  auto [gu, gv] = f.derivative(x, kTr);
  Direction d;
  std::tie(d.du, d.dv) = metric.riesz(gu, gv);
  d.norm_sq = std::max(0.0, (gu * d.du).sum() + (gv * d.dv).sum());
  return d;
}

struct CurvaturePair {
  Eigen::ArrayXd su, sv, yu, yv;
  double rho = 0.0;
};

// Two-loop recursion with initial inverse Hessian γ K^{-1}.
std::pair<Eigen::ArrayXd, Eigen::ArrayXd> quasi_newton(const SobolevMetric& metric,
                                                       const std::deque<CurvaturePair>& mem,
                                                       const Eigen::ArrayXd& gu, const Eigen::ArrayXd& gv) {
  Eigen::ArrayXd qu = gu, qv = gv;
  std::vector<double> a(mem.size());
  for (std::size_t i = mem.size(); i-- > 0;) {
    const auto& m = mem[i];
    a[i] = m.rho * ((m.su * qu).sum() + (m.sv * qv).sum());
    qu -= a[i] * m.yu;
    qv -= a[i] * m.yv;
  }
  const auto& last = mem.back();
  auto [kyu, kyv] = metric.riesz(last.yu, last.yv);
  const double gamma = 1.0 / (last.rho * ((last.yu * kyu).sum() + (last.yv * kyv).sum()));
  auto [ru, rv] = metric.riesz(qu, qv);
  ru *= gamma;
  rv *= gamma;
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const auto& m = mem[i];
    const double b = m.rho * ((m.yu * ru).sum() + (m.yv * rv).sum());
    ru += (a[i] - b) * m.su;
    rv += (a[i] - b) * m.sv;
  }
  return {ru, rv};
}

SolveResult finish(const Functional<>& f, const StatePair<>& x, double grad_norm) {
  SolveResult r;
  r.state = x;
  r.breakdown = f.breakdown(x, kTr);
  r.energy = r.breakdown.total;
  r.nehari_residual = x.is_zero() ? 0.0 : f.nehari_residual(x, kTr);
  r.grad_norm = grad_norm;
  r.nu = f.params().nu;
  r.classification = classify(x, f);
  return r;
}

SolveResult failed(const Functional<>& f, const StatePair<>& x) {
  SolveResult r;
  r.state = x;
  r.nu = f.params().nu;
  r.classification = Classification::Failed;
  if (!x.is_zero()) {
    r.breakdown = f.breakdown(x, kTr);
    r.energy = r.breakdown.total;
    r.nehari_residual = f.nehari_residual(x, kTr);
  }
  return r;
}

}  // namespace

void SolverConfig::validate() const {
  require(max_iters > 0, "max_iters must be positive");
  require(step0 > 0.0, "step0 must be positive");
  require(armijo_c > 0.0 && armijo_c < 1.0, "armijo_c must lie in (0,1)");
  require(armijo_shrink > 0.0 && armijo_shrink < 1.0, "armijo_shrink must lie in (0,1)");
  require(grad_tol >= 1e-12, "grad_tol must be >= 1e-12");
  require(energy_tol >= 1e-12, "energy_tol must be >= 1e-12");
  require(path_points >= 3, "path_points must be >= 3");
  require(deform_rounds > 0, "deform_rounds must be positive");
  require(refine_iters >= 0, "refine_iters must be >= 0");
  require(memory >= 0, "memory must be >= 0");
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::Coupled: return "Coupled";
    case Classification::SemitrivialU: return "SemitrivialU";
    case Classification::SemitrivialV: return "SemitrivialV";
    case Classification::Failed: return "Failed";
  }
  return "?";
}

SobolevMetric::SobolevMetric(const Functional<>& f) {
  for (int i = 0; i < 2; ++i) {
    ldlt_[i].compute(f.stiffness(i));
    if (ldlt_[i].info() != Eigen::Success)
      throw Error(ErrorKind::Domain, "quadratic form is not positive definite on this grid");
  }
}

std::pair<Eigen::ArrayXd, Eigen::ArrayXd> SobolevMetric::riesz(const Eigen::ArrayXd& gu,
                                                                const Eigen::ArrayXd& gv) const {
  Eigen::VectorXd x = ldlt_[0].solve(gu.matrix());
  Eigen::VectorXd y = ldlt_[1].solve(gv.matrix());
  return {x.array(), y.array()};
}

StatePair<> semitrivial(Semitrivial which, double mu, const ProblemParams& params, const GridPtr<>& grid) {
  if (!(mu > 0.0)) throw Error(ErrorKind::Domain, "scale mu must be positive");
  RadialField<> zero(grid);
  if (which == Semitrivial::First)
    return {sample_profile(make_profile(params.N, params.lambda1, params.s1, mu), grid), zero};
  return {zero, sample_profile(make_profile(params.N, params.lambda2, params.s2, mu), grid)};
}

Classification classify(const StatePair<>& state, const Functional<>& f) {
  const double nu_ = std::sqrt(std::max(0.0, f.lambda_norm_sq(0, state.u.values)));
  const double nv_ = std::sqrt(std::max(0.0, f.lambda_norm_sq(1, state.v.values)));
  if (nu_ == 0.0 && nv_ == 0.0) return Classification::Failed;
  if (nu_ < kComponentThreshold * nv_) return Classification::SemitrivialV;
  if (nv_ < kComponentThreshold * nu_) return Classification::SemitrivialU;
  return Classification::Coupled;
}

SolveResult ground_state(const ProblemParams& params, const StatePair<>& init, const SolverConfig& cfg) {
  return ground_state(Functional<>(params, init.u.grid), init, cfg);
}

SolveResult ground_state(const Functional<>& f, const StatePair<>& init, const SolverConfig& cfg) {
  cfg.validate();
  if (init.is_zero()) throw Error(ErrorKind::UndefinedState, "ground_state needs a nonzero initial state");
  const SobolevMetric metric(f);

  StatePair<> x;
  try {
    x = f.project(init.positive_part(), kTr).projected;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ProjectionImpossible) throw;
    return failed(f, init);
  }
  double E = f.energy(x, kTr);
  std::vector<TraceEntry> trace;
  std::deque<CurvaturePair> memory;
  Eigen::ArrayXd prev_xu, prev_xv, prev_gu, prev_gv;
  bool converged = false;
  double gnorm = 0.0;
  int it = 0;

  for (; it < cfg.max_iters; ++it) {
    auto [gu, gv] = f.derivative(x, kTr);
    auto [zu, zv] = metric.riesz(gu, gv);
    const double gz = std::max(0.0, (gu * zu).sum() + (gv * zv).sum());
    gnorm = std::sqrt(gz);
    trace.push_back({it, E, gnorm});
    const double scale = 1.0 + std::abs(E);
    if (gnorm <= cfg.grad_tol * scale) {
      converged = true;
      break;
    }
    if (it >= kEnergyWindow && trace[it - kEnergyWindow].energy - E <= cfg.energy_tol * scale) {
      converged = true;
      break;
    }

    if (cfg.memory > 0 && it > 0) {
      CurvaturePair cp{x.u.values - prev_xu, x.v.values - prev_xv, gu - prev_gu, gv - prev_gv, 0.0};
      const double sy = (cp.su * cp.yu).sum() + (cp.sv * cp.yv).sum();
      const double ss = (cp.su.square().sum() + cp.sv.square().sum());
      if (sy > 1e-12 * std::sqrt(ss * ((cp.yu.square().sum() + cp.yv.square().sum())))) {
        cp.rho = 1.0 / sy;
        memory.push_back(std::move(cp));
        if (static_cast<int>(memory.size()) > cfg.memory) memory.pop_front();
      }
    }
    prev_xu = x.u.values;
    prev_xv = x.v.values;
    prev_gu = gu;
    prev_gv = gv;

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Eigen::ArrayXd du, dv;
      if (memory.empty()) {
        du = zu;
        dv = zv;
      } else {
        std::tie(du, dv) = quasi_newton(metric, memory, gu, gv);
      }
      // descent direction is -d
      const double slope = (gu * du).sum() + (gv * dv).sum();
      if (!(slope > 0.0)) {
        memory.clear();
        du = zu;
        dv = zv;
      }
      const double decrease = memory.empty() ? gz : slope;
      for (double eta = cfg.step0; eta >= kMinStep; eta *= cfg.armijo_shrink) {
        StatePair<> trial;
        try {
          trial = f.project(clipped_step(x, du, dv, eta), kTr).projected;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::ProjectionImpossible) throw;
          continue;
        }
        const double Et = f.energy(trial, kTr);
        if (Et <= E - cfg.armijo_c * eta * decrease) {
          x = std::move(trial);
          E = Et;
          accepted = true;
          break;
        }
      }
      if (!accepted && memory.empty()) break;
      memory.clear();
    }
    // no admissible step left: the descent has stalled at round-off level
    if (!accepted) {
      converged = gnorm <= std::sqrt(cfg.grad_tol) * scale;
      ++it;
      break;
    }
  }

  SolveResult r = finish(f, x, gnorm);
  r.trace = std::move(trace);
  r.iters = it;
  r.converged = converged;
  if (!converged) r.classification = Classification::Failed;
  return r;
}

MultiStartResult multistart_ground_state(const ProblemParams& params, const GridPtr<>& grid, const SolverConfig& cfg,
                                         std::uint64_t seed) {
  const Functional<> f(params, grid);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_jitter(-0.25, 0.25);

  std::vector<StatePair<>> starts;
  starts.push_back(semitrivial(Semitrivial::First, 1.0, params, grid));
  starts.push_back(semitrivial(Semitrivial::Second, 1.0, params, grid));
  for (double c : {0.25, 0.5, 0.75}) {
    const double mu_u = std::exp(log_jitter(rng));
    const double mu_v = std::exp(log_jitter(rng));
    const auto a = semitrivial(Semitrivial::First, mu_u, params, grid);
    const auto b = semitrivial(Semitrivial::Second, mu_v, params, grid);
    starts.push_back({a.u.scaled(c), b.v.scaled(1.0 - c)});
  }

  MultiStartResult out;
  for (const auto& s : starts) out.runs.push_back(ground_state(f, s, cfg));
  const SolveResult* best = nullptr;
  for (const auto& r : out.runs) {
    const bool ok = r.classification != Classification::Failed;
    const bool best_ok = best && best->classification != Classification::Failed;
    if (!best || (ok && !best_ok) || (ok == best_ok && r.energy < best->energy)) best = &r;
  }
  out.best = *best;
  return out;
}

MountainPassResult mountain_pass(const ProblemParams& params, const GridPtr<>& grid, const SolverConfig& cfg) {
  cfg.validate();
  const RegimeReport regime = classify_regime(params);
  if (!regime.mountain_pass_applicable())
    throw Error(ErrorKind::RegimeViolation,
                "regime violation: mountain pass needs alpha >= 2 with 2*c2 > c1 > c2, or beta >= 2 with "
                "2*c1 > c2 > c1");

  const Functional<> f(params, grid);
  const SobolevMetric metric(f);
  const auto z1 = semitrivial(Semitrivial::First, 1.0, params, grid);
  const auto z2 = semitrivial(Semitrivial::Second, 1.0, params, grid);

  const int M = cfg.path_points;
  std::vector<StatePair<>> path;
  std::vector<double> energies;
  for (int j = 0; j < M; ++j) {
    const double t = static_cast<double>(j) / (M - 1);
    const StatePair<> raw{z1.u.scaled(std::sqrt(1.0 - t)), z2.v.scaled(std::sqrt(t))};
    path.push_back(f.project(raw, kTr).projected);
    energies.push_back(f.energy(path.back(), kTr));
  }

  MountainPassResult mp;
  mp.initial_path = energies;
  mp.initial_max = *std::max_element(energies.begin(), energies.end());
  mp.cmp_history.push_back(mp.initial_max);

  for (int round = 0; round < cfg.deform_rounds; ++round) {
    const double eta = cfg.step0 / (1.0 + round);
    for (int j = 1; j + 1 < M; ++j) {
      const Direction d = sobolev_direction(f, metric, path[j]);
      try {
        auto trial = f.project(clipped_step(path[j], d.du, d.dv, eta), kTr).projected;
        const double Et = f.energy(trial, kTr);
        if (Et < energies[j]) {
          path[j] = std::move(trial);
          energies[j] = Et;
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::ProjectionImpossible) throw;
      }
    }
    mp.cmp_history.push_back(*std::max_element(energies.begin(), energies.end()));
  }
  mp.final_path = energies;
  mp.c_mp = mp.cmp_history.back();
  mp.max_node = static_cast<int>(std::max_element(energies.begin(), energies.end()) - energies.begin());

  if (mp.max_node == 0 || mp.max_node == M - 1) {
    mp.bound_state = failed(f, path[mp.max_node]);
    return mp;
  }

  // Climbing image: descend along every direction except the path tangent, along which the node climbs.
  StatePair<> x = path[mp.max_node];
  const auto& prev = path[mp.max_node - 1];
  const auto& next = path[mp.max_node + 1];
  Eigen::ArrayXd tu = next.u.values - prev.u.values;
  Eigen::ArrayXd tv = next.v.values - prev.v.values;
  auto knorm = [&](const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
    return std::sqrt(f.lambda_norm_sq(0, a) + f.lambda_norm_sq(1, b));
  };
  const double tn = knorm(tu, tv);
  tu /= tn;
  tv /= tn;

  const double eta = cfg.step0 / (1.0 + cfg.deform_rounds);
  StatePair<> best = x;
  double best_g = std::sqrt(sobolev_direction(f, metric, x).norm_sq);
  std::vector<TraceEntry> trace;
  int it = 0;
  for (; it < cfg.refine_iters; ++it) {
    Direction d = sobolev_direction(f, metric, x);
    const double g = std::sqrt(d.norm_sq);
    trace.push_back({it, f.energy(x, kTr), g});
    if (g < best_g) {
      best_g = g;
      best = x;
    }
    if (g <= cfg.grad_tol * (1.0 + std::abs(trace.back().energy))) break;
    // K-inner product of the direction with the tangent
    const Eigen::VectorXd ku = f.stiffness(0) * d.du.matrix();
    const Eigen::VectorXd kv = f.stiffness(1) * d.dv.matrix();
    const double along = (ku.array() * tu).sum() + (kv.array() * tv).sum();
    d.du -= 2.0 * along * tu;
    d.dv -= 2.0 * along * tv;
    try {
      x = f.project(clipped_step(x, d.du, d.dv, eta), kTr).projected;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ProjectionImpossible) throw;
      break;
    }
  }
  mp.bound_state = finish(f, best, best_g);
  mp.bound_state.trace = std::move(trace);
  mp.bound_state.iters = it;
  mp.bound_state.converged = best_g <= cfg.grad_tol * (1.0 + std::abs(mp.bound_state.energy));
  return mp;
}

ConcentrationReport concentration_report(const StatePair<>& state, const ProblemParams& params, double r_lo,
                                         double r_hi) {
  if (!(r_lo < r_hi)) throw Error(ErrorKind::Domain, "concentration window needs r_lo < r_hi");
  const Functional<> f(params, state.u.grid);
  const auto& r = state.grid().radii();
  auto fractions = [&](int i, const Eigen::ArrayXd& u, double& lo, double& hi) {
    const Eigen::ArrayXd dens = f.critical_weights(i) * u.abs().pow(f.exponent(i));
    const double total = dens.sum();
    if (total == 0.0) {
      lo = hi = 0.0;
      return;
    }
    lo = (r < r_lo).select(dens, 0.0).sum() / total;
    hi = (r > r_hi).select(dens, 0.0).sum() / total;
  };
  ConcentrationReport rep;
  fractions(0, state.u.values, rep.rho_0_u, rep.rho_inf_u);
  fractions(1, state.v.values, rep.rho_0_v, rep.rho_inf_v);
  return rep;
}

}  // namespace hsys
