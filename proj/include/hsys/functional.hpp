#pragma once

// The coupled energy
//   J(u,v) = 1/2 ||u||_{λ1}^2 + 1/2 ||v||_{λ2}^2 - C_u/2*_{s1} - C_v/2*_{s2} - ν ∫ h |u|^α |v|^β |x|^{-s3}
// discretized on a RadialGrid, together with its derivative, the Nehari
// residual Ψ and the one-dimensional Nehari scaling.
//
// Each component is closed beyond the mesh window with the power-law tails
// of the Hardy operator with its own λ_i. The coupling integral carries no
// tail (h vanishes at both ends).

#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "hsys/closedform.hpp"
#include "hsys/errors.hpp"
#include "hsys/grid.hpp"

namespace hsys {

/// Full uses |u|, |v| in the nonlinear terms; PositivePart uses u+, v+.
enum class Truncation { Full, PositivePart };

template <typename Scalar = double>
struct EnergyBreakdown {
  Scalar dirichlet_u = 0;
  Scalar dirichlet_v = 0;
  Scalar hardy_u = 0;
  Scalar hardy_v = 0;
  Scalar crit_u = 0;
  Scalar crit_v = 0;
  Scalar coupling = 0;
  Scalar total = 0;

  std::array<std::pair<const char*, Scalar>, 8> items() const {
    return {{{"dirichlet_u", dirichlet_u},
             {"dirichlet_v", dirichlet_v},
             {"hardy_u", hardy_u},
             {"hardy_v", hardy_v},
             {"crit_u", crit_u},
             {"crit_v", crit_v},
             {"coupling", coupling},
             {"total", total}}};
  }
};

template <typename Scalar = double>
struct NehariProjection {
  Scalar t = 1;
  StatePair<Scalar> projected;
  Scalar residual = 0;  ///< Ψ at the projected state
};

/// The three algebraic expressions of J on the Nehari manifold.
template <typename Scalar = double>
struct ConstrainedForms {
  Scalar direct = 0;
  Scalar by_norm = 0;      ///< (1/2 - 1/(α+β))||·||^2 + (1/(α+β) - 1/2*_1) C_u + (1/(α+β) - 1/2*_2) C_v
  Scalar by_critical = 0;  ///< (1/2 - 1/2*_1) C_u + (1/2 - 1/2*_2) C_v + ν (α+β-2)/2 · coupling
};

template <typename Scalar = double>
struct HolderReport {
  Scalar coupling = 0;
  Scalar bound = 0;   ///< ||h/r^τ||_p · C_u^{α/2*_1} · C_v^{β/2*_2}
  Scalar h_norm = 0;  ///< ||h/r^τ||_p, or sup h/r^τ on the mesh in the critical regime
  Scalar slack = 1;   ///< coupling / bound
  bool holds = true;
};

namespace detail {

// sign(x)|x|^e, taken as 0 at x = 0.
template <typename Derived>
auto signed_pow(const Eigen::ArrayBase<Derived>& x, typename Derived::Scalar e) {
  using S = typename Derived::Scalar;
  return x.sign() * x.abs().pow(e) * (x != S(0)).template cast<S>();
}

}  // namespace detail

template <typename Scalar = double>
class Functional {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using Sparse = Eigen::SparseMatrix<Scalar>;

  Functional(const ProblemParams& params, GridPtr<Scalar> grid) : params_(params), grid_(std::move(grid)) {
    params_.h.sigma = coupling_calculus(params_).sigma;
    if (grid_->dimension() != params_.N) throw Error(ErrorKind::MismatchedGrids, "grid dimension differs from N");
    const auto& g = *grid_;
    setup(comp_[0], Scalar(params_.lambda1), Scalar(params_.s1));
    setup(comp_[1], Scalar(params_.lambda2), Scalar(params_.s2));
    const auto& r = g.radii();
    Array h(g.size());
    for (Eigen::Index k = 0; k < g.size(); ++k) h(k) = Scalar(params_.h(static_cast<double>(r(k))));
    coupling_w_ = g.sphere_area() * g.weights() * h * r.pow(-Scalar(params_.s3));
  }

  const ProblemParams& params() const { return params_; }
  const GridPtr<Scalar>& grid() const { return grid_; }
  Scalar exponent(int i) const { return comp_[i].p; }

  /// SPD matrix K_i with ||u||_{λ_i}^2 = uᵀ K_i u.
  const Sparse& stiffness(int i) const { return comp_[i].K; }
  /// W with C_i(u) = Σ W_k |u_k|^{2*_i}.
  const Array& critical_weights(int i) const { return comp_[i].crit_w; }

  Scalar lambda_norm_sq(int i, const Array& u) const {
    const auto& c = comp_[i];
    return dirichlet_form(c.dir, u) - c.lambda * (c.hardy_w * u.square()).sum();
  }

  /// ||(u,v)||_D^2 = ||u||_{λ1}^2 + ||v||_{λ2}^2.
  Scalar norm_sq(const StatePair<Scalar>& s) const {
    check(s);
    return lambda_norm_sq(0, s.u.values) + lambda_norm_sq(1, s.v.values);
  }

  Scalar critical(int i, const Array& u, Truncation tr = Truncation::Full) const {
    return (comp_[i].crit_w * magnitude(u, tr).pow(comp_[i].p)).sum();
  }

  Scalar coupling(const StatePair<Scalar>& s, Truncation tr = Truncation::Full) const {
    const Scalar a = Scalar(params_.alpha), b = Scalar(params_.beta);
    return (coupling_w_ * magnitude(s.u.values, tr).pow(a) * magnitude(s.v.values, tr).pow(b)).sum();
  }

  EnergyBreakdown<Scalar> breakdown(const StatePair<Scalar>& s, Truncation tr = Truncation::Full) const {
    check(s);
    EnergyBreakdown<Scalar> e;
    e.dirichlet_u = dirichlet_form(comp_[0].dir, s.u.values);
    e.dirichlet_v = dirichlet_form(comp_[1].dir, s.v.values);
    e.hardy_u = (comp_[0].hardy_w * s.u.values.square()).sum();
    e.hardy_v = (comp_[1].hardy_w * s.v.values.square()).sum();
    e.crit_u = critical(0, s.u.values, tr);
    e.crit_v = critical(1, s.v.values, tr);
    e.coupling = coupling(s, tr);
    e.total = (e.dirichlet_u + e.dirichlet_v) / 2 - comp_[0].lambda * e.hardy_u / 2 - comp_[1].lambda * e.hardy_v / 2 -
              e.crit_u / comp_[0].p - e.crit_v / comp_[1].p - Scalar(params_.nu) * e.coupling;
    return e;
  }

  Scalar energy(const StatePair<Scalar>& s, Truncation tr = Truncation::Full) const { return breakdown(s, tr).total; }

  /// Partial derivatives of the discrete energy with respect to the nodal values.
  std::pair<Array, Array> derivative(const StatePair<Scalar>& s, Truncation tr = Truncation::Full) const {
    check(s);
    const Scalar a = Scalar(params_.alpha), b = Scalar(params_.beta), nu = Scalar(params_.nu);
    const Array& u = s.u.values;
    const Array& v = s.v.values;
    const Array mu = magnitude(u, tr), mv = magnitude(v, tr);
    Array gu = (comp_[0].K * u.matrix()).array();
    Array gv = (comp_[1].K * v.matrix()).array();
    gu -= comp_[0].crit_w * odd_pow(u, comp_[0].p - 1, tr);
    gv -= comp_[1].crit_w * odd_pow(v, comp_[1].p - 1, tr);
    if (nu != 0) {
      gu -= nu * a * coupling_w_ * odd_pow(u, a - 1, tr) * mv.pow(b);
      gv -= nu * b * coupling_w_ * mu.pow(a) * odd_pow(v, b - 1, tr);
    }
    return {std::move(gu), std::move(gv)};
  }

  /// L^2(r^{N-1}dr)-representation G of J': pairing(G, δ) equals the directional derivative of the discrete energy.
  StatePair<Scalar> gradient(const StatePair<Scalar>& s, Truncation tr = Truncation::Full) const {
    auto [gu, gv] = derivative(s, tr);
    const Array m = grid_->sphere_area() * grid_->weights();
    return {RadialField<Scalar>(grid_, gu / m), RadialField<Scalar>(grid_, gv / m)};
  }

  Scalar pairing(const StatePair<Scalar>& a, const StatePair<Scalar>& b) const {
    const Array m = grid_->sphere_area() * grid_->weights();
    return (m * (a.u.values * b.u.values + a.v.values * b.v.values)).sum();
  }

  Scalar nehari_residual(const StatePair<Scalar>& s, Truncation tr = Truncation::Full) const {
    check(s);
    if (s.is_zero()) throw Error(ErrorKind::UndefinedState, "Nehari residual is undefined at the zero state");
    const Scalar ab = Scalar(params_.alpha + params_.beta);
    return norm_sq(s) - critical(0, s.u.values, tr) - critical(1, s.v.values, tr) -
           Scalar(params_.nu) * ab * coupling(s, tr);
  }

  /// Scales the state onto the Nehari manifold.
  NehariProjection<Scalar> project(const StatePair<Scalar>& s, Truncation tr = Truncation::Full) const {
    using std::abs;
    using std::pow;
    check(s);
    const Scalar D = norm_sq(s);
    const Scalar A = critical(0, s.u.values, tr);
    const Scalar B = critical(1, s.v.values, tr);
    const Scalar ab = Scalar(params_.alpha + params_.beta);
    const Scalar C = Scalar(params_.nu) * ab * coupling(s, tr);
    if (!(A > 0 || B > 0 || C > 0))
      throw Error(ErrorKind::ProjectionImpossible, "no positive nonlinear term along this direction");
    if (!(D > 0)) throw Error(ErrorKind::ProjectionImpossible, "non-positive quadratic form along this direction");

    const Scalar ea = comp_[0].p - 2, eb = comp_[1].p - 2, ec = ab - 2;
    auto defect = [&](Scalar t) { return A * pow(t, ea) + B * pow(t, eb) + C * pow(t, ec) - D; };
    auto slope = [&](Scalar t) {
      return ea * A * pow(t, ea - 1) + eb * B * pow(t, eb - 1) + ec * C * pow(t, ec - 1);
    };

    const Scalar tol = Scalar(1e-13) * D;
    Scalar lo = 1, hi = 1;
    while (defect(hi) < 0) hi *= 2;
    while (defect(lo) > 0) lo /= 2;
    Scalar t = 1;
    for (int it = 0; it < 200; ++it) {
      const Scalar f = defect(t);
      if (abs(f) <= tol) break;
      (f > 0 ? hi : lo) = t;
      Scalar next = t - f / slope(t);
      if (!(next > lo && next < hi)) next = (lo + hi) / 2;
      if (next == t) break;
      t = next;
    }
    NehariProjection<Scalar> out;
    out.t = t;
    out.projected = s.scaled(t);
    out.residual = nehari_residual(out.projected, tr);
    return out;
  }

  ConstrainedForms<Scalar> constrained_forms(const StatePair<Scalar>& s, Truncation tr = Truncation::Full) const {
    require_on_manifold(s, tr);
    const auto e = breakdown(s, tr);
    const Scalar ab = Scalar(params_.alpha + params_.beta);
    const Scalar p1 = comp_[0].p, p2 = comp_[1].p;
    const Scalar D = norm_sq(s);
    ConstrainedForms<Scalar> f;
    f.direct = e.total;
    f.by_norm = (Scalar(0.5) - 1 / ab) * D + (1 / ab - 1 / p1) * e.crit_u + (1 / ab - 1 / p2) * e.crit_v;
    f.by_critical = (Scalar(0.5) - 1 / p1) * e.crit_u + (Scalar(0.5) - 1 / p2) * e.crit_v +
                    Scalar(params_.nu) * (ab - 2) / 2 * e.coupling;
    return f;
  }

  /// <Ψ'(u,v) | (u,v)> on the Nehari manifold.
  Scalar natural_constraint_derivative(const StatePair<Scalar>& s, Truncation tr = Truncation::Full) const {
    require_on_manifold(s, tr);
    const Scalar ab = Scalar(params_.alpha + params_.beta);
    return (2 - comp_[0].p) * critical(0, s.u.values, tr) + (2 - comp_[1].p) * critical(1, s.v.values, tr) +
           Scalar(params_.nu) * ab * (2 - ab) * coupling(s, tr);
  }

  /// Norm of h/r^τ entering the Hölder bound of the coupling term.
  Scalar h_norm() const {
    using std::exp;
    using std::log;
    using std::pow;
    const auto cc = coupling_calculus(params_);
    const auto& r = grid_->radii();
    Array reduced(r.size());
    for (Eigen::Index k = 0; k < r.size(); ++k)
      reduced(k) = Scalar(params_.h(static_cast<double>(r(k)))) * pow(r(k), -Scalar(cc.tau));
    if (cc.regime == CouplingRegime::Critical) return reduced.maxCoeff();
    const Scalar P = Scalar(cc.frak_p);
    const Scalar integral = (grid_->sphere_area() * grid_->weights() * reduced.pow(P)).sum();
    return pow(integral, 1 / P);
  }

  HolderReport<Scalar> holder_check(const StatePair<Scalar>& s) const {
    using std::pow;
    check(s);
    HolderReport<Scalar> rep;
    rep.coupling = coupling(s);
    rep.h_norm = h_norm();
    rep.bound = rep.h_norm * pow(critical(0, s.u.values), Scalar(params_.alpha) / comp_[0].p) *
                pow(critical(1, s.v.values), Scalar(params_.beta) / comp_[1].p);
    rep.slack = rep.bound > 0 ? rep.coupling / rep.bound : Scalar(1);
    rep.holds = rep.coupling <= rep.bound * (1 + Scalar(64) * std::numeric_limits<Scalar>::epsilon());
    return rep;
  }

 private:
  struct Component {
    Scalar lambda = 0;
    Scalar s = 0;
    Scalar p = 2;
    DirichletStencil<Scalar> dir;
    Array hardy_w;
    Array crit_w;
    Sparse K;
  };

  void setup(Component& c, Scalar lambda, Scalar s) {
    const auto& g = *grid_;
    const Eigen::Index n = g.size();
    const auto tails = std::optional<TailModel<Scalar>>(TailModel<Scalar>::hardy(g.dimension(), lambda));
    c.lambda = lambda;
    c.s = s;
    c.p = critical_exponent(g.dimension(), s);
    c.dir = dirichlet_stencil(g, tails);
    c.hardy_w = power_weights(g, Scalar(2), Scalar(2), tails);
    c.crit_w = power_weights(g, c.p, s, tails);

    Array diag = -lambda * c.hardy_w;
    diag.head(n - 1) += c.dir.edge;
    diag.tail(n - 1) += c.dir.edge;
    diag(0) += c.dir.end0;
    diag(n - 1) += c.dir.end1;
    std::vector<Eigen::Triplet<Scalar>> trips;
    trips.reserve(3 * n);
    for (Eigen::Index k = 0; k < n; ++k) trips.emplace_back(k, k, diag(k));
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      trips.emplace_back(k, k + 1, -c.dir.edge(k));
      trips.emplace_back(k + 1, k, -c.dir.edge(k));
    }
    c.K.resize(n, n);
    c.K.setFromTriplets(trips.begin(), trips.end());
  }

  void check(const StatePair<Scalar>& s) const {
    if (!s.u.grid || !s.u.grid->same_as(*grid_) || !s.v.grid || !s.v.grid->same_as(*grid_))
      throw Error(ErrorKind::MismatchedGrids, "state lives on a different grid");
  }

  void require_on_manifold(const StatePair<Scalar>& s, Truncation tr) const {
    using std::abs;
    const Scalar psi = nehari_residual(s, tr);
    if (abs(psi) > Scalar(1e-8) * norm_sq(s))
      throw Error(ErrorKind::OffManifold, "state is not on the Nehari manifold");
  }

  static Array magnitude(const Array& u, Truncation tr) {
    return tr == Truncation::Full ? Array(u.abs()) : Array(u.max(Scalar(0)));
  }

  // d/du of |u|^{e+1}/(e+1) (or of (u+)^{e+1}/(e+1)).
  static Array odd_pow(const Array& u, Scalar e, Truncation tr) {
    if (tr == Truncation::Full) return detail::signed_pow(u, e);
    return u.max(Scalar(0)).pow(e);
  }

  ProblemParams params_;
  GridPtr<Scalar> grid_;
  Component comp_[2];
  Array coupling_w_;
};

// Free-function forms; each builds the discrete functional for the state's grid.

template <typename Scalar>
Scalar lambda_norm_sq(const RadialField<Scalar>& u, Scalar lambda) {
  detail::check_hardy_range(u.grid->dimension(), lambda);
  const auto tails = std::optional<TailModel<Scalar>>(TailModel<Scalar>::hardy(u.grid->dimension(), lambda));
  return dirichlet_energy(u, tails) - lambda * power_integral(u, Scalar(2), Scalar(2), tails);
}

template <typename Scalar>
EnergyBreakdown<Scalar> energy(const StatePair<Scalar>& s, const ProblemParams& params) {
  return Functional<Scalar>(params, s.u.grid).breakdown(s);
}

template <typename Scalar>
EnergyBreakdown<Scalar> energy_truncated(const StatePair<Scalar>& s, const ProblemParams& params) {
  return Functional<Scalar>(params, s.u.grid).breakdown(s, Truncation::PositivePart);
}

template <typename Scalar>
StatePair<Scalar> gradient(const StatePair<Scalar>& s, const ProblemParams& params) {
  return Functional<Scalar>(params, s.u.grid).gradient(s);
}

template <typename Scalar>
Scalar nehari_residual(const StatePair<Scalar>& s, const ProblemParams& params) {
  return Functional<Scalar>(params, s.u.grid).nehari_residual(s);
}

template <typename Scalar>
NehariProjection<Scalar> nehari_project(const StatePair<Scalar>& s, const ProblemParams& params) {
  return Functional<Scalar>(params, s.u.grid).project(s);
}

template <typename Scalar>
ConstrainedForms<Scalar> constrained_energy_forms(const StatePair<Scalar>& s, const ProblemParams& params) {
  return Functional<Scalar>(params, s.u.grid).constrained_forms(s);
}

template <typename Scalar>
HolderReport<Scalar> holder_bound_check(const StatePair<Scalar>& s, const ProblemParams& params) {
  return Functional<Scalar>(params, s.u.grid).holder_check(s);
}

}  // namespace hsys
