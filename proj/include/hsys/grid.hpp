#pragma once

// Log-radial discretization of radial functions in D^{1,2}(R^N).
//
// Nodes are r_k = r_min exp(k dy), k = 0..n-1. Integrals of radial
// functions against r^{N-1} dr are trapezoid sums in y = ln r with the
// Jacobian r^N folded into the weights. The Dirichlet energy is evaluated
// with differences across each cell, evaluated at the midpoints r_{k+1/2}.
//
// Beyond the window a field is either treated as contributing nothing
// (the default) or extended by power laws u ~ r^{-origin} near 0 and
// u ~ r^{-infinity} near infinity (TailModel), in which case the tail
// integrals are added in closed form.

#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include <Eigen/Core>

#include "hsys/closedform.hpp"
#include "hsys/errors.hpp"

namespace hsys {

inline constexpr double kDefaultRMin = 1e-6;
inline constexpr double kDefaultRMax = 1e6;
inline constexpr Eigen::Index kDefaultGridSize = 4096;
inline constexpr Eigen::Index kMinGridSize = 16;

template <typename Scalar = double>
class RadialGrid {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  RadialGrid(int N, Scalar r_min, Scalar r_max, Eigen::Index n) : N_(N) {
    using std::exp;
    using std::log;
    if (N < 3) throw Error(ErrorKind::InvalidDimension, "dimension N must be >= 3");
    if (!(r_min > 0)) throw Error(ErrorKind::InvalidGrid, "r_min must be positive");
    if (!(r_max > r_min)) throw Error(ErrorKind::InvalidGrid, "r_max must exceed r_min");
    if (n < kMinGridSize) throw Error(ErrorKind::InvalidGrid, "grid needs at least 16 nodes");

    const Scalar y0 = log(r_min);
    dy_ = (log(r_max) - y0) / Scalar(n - 1);
    y_ = Array::LinSpaced(n, y0, log(r_max));
    r_ = y_.exp();
    r_.coeffRef(0) = r_min;
    r_.coeffRef(n - 1) = r_max;
    mid_ = (Scalar(0.5) * (y_.head(n - 1) + y_.tail(n - 1))).exp();

    weights_ = (Scalar(N) * y_).exp() * dy_;
    weights_.coeffRef(0) /= 2;
    weights_.coeffRef(n - 1) /= 2;
    log_omega_ = log_sphere_area<Scalar>(N);
    omega_ = exp(log_omega_);
  }

  int dimension() const { return N_; }
  Eigen::Index size() const { return r_.size(); }
  Scalar log_step() const { return dy_; }
  Scalar r_min() const { return r_(0); }
  Scalar r_max() const { return r_(r_.size() - 1); }

  const Array& radii() const { return r_; }
  const Array& log_radii() const { return y_; }
  /// r_{k+1/2}, size n-1.
  const Array& midpoints() const { return mid_; }
  /// Trapezoid weights for \int_0^\infty f(r) r^{N-1} dr (sphere area not included).
  const Array& weights() const { return weights_; }
  /// Area of the unit sphere S^{N-1}.
  Scalar sphere_area() const { return omega_; }

  bool same_as(const RadialGrid& other) const {
    return this == &other || (N_ == other.N_ && size() == other.size() && r_min() == other.r_min() &&
                              r_max() == other.r_max());
  }

 private:
  int N_;
  Scalar dy_ = 0;
  Scalar omega_ = 0;
  Scalar log_omega_ = 0;
  Array y_;
  Array r_;
  Array mid_;
  Array weights_;
};

template <typename Scalar = double>
using GridPtr = std::shared_ptr<const RadialGrid<Scalar>>;

template <typename Scalar = double>
GridPtr<Scalar> build_grid(int N, Scalar r_min = Scalar(kDefaultRMin), Scalar r_max = Scalar(kDefaultRMax),
                           Eigen::Index n = kDefaultGridSize) {
  return std::make_shared<const RadialGrid<Scalar>>(N, r_min, r_max, n);
}

template <typename Scalar = double>
struct RadialField {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  GridPtr<Scalar> grid;
  Array values;

  RadialField() = default;
  explicit RadialField(GridPtr<Scalar> g) : grid(std::move(g)), values(Array::Zero(grid->size())) {}
  RadialField(GridPtr<Scalar> g, Array v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->size()) throw Error(ErrorKind::MismatchedGrids, "field size does not match grid");
  }

  Eigen::Index size() const { return values.size(); }
  bool is_zero() const { return (values == Scalar(0)).all(); }

  RadialField scaled(Scalar c) const { return RadialField(grid, values * c); }
  RadialField positive_part() const { return RadialField(grid, values.max(Scalar(0))); }
};

template <typename Scalar = double>
struct StatePair {
  RadialField<Scalar> u;
  RadialField<Scalar> v;

  StatePair() = default;
  StatePair(RadialField<Scalar> uu, RadialField<Scalar> vv) : u(std::move(uu)), v(std::move(vv)) {
    if (!u.grid || !v.grid || !u.grid->same_as(*v.grid))
      throw Error(ErrorKind::MismatchedGrids, "state components live on different grids");
  }

  const RadialGrid<Scalar>& grid() const { return *u.grid; }
  bool is_zero() const { return u.is_zero() && v.is_zero(); }
  bool nonnegative() const { return (u.values >= Scalar(0)).all() && (v.values >= Scalar(0)).all(); }

  StatePair scaled(Scalar t) const { return {u.scaled(t), v.scaled(t)}; }
  StatePair positive_part() const { return {u.positive_part(), v.positive_part()}; }
};

/// Power-law decay exponents of a field outside the mesh window.
template <typename Scalar = double>
struct TailModel {
  Scalar origin = 0;    ///< u ~ r^{-origin} for r < r_min
  Scalar infinity = 0;  ///< u ~ r^{-infinity} for r > r_max

  /// Decay of finite-energy solutions of -Δu - λu/|x|^2 = (lower order): r^{-a_λ} at 0, r^{-(N-2-a_λ)} at ∞.
  static TailModel hardy(int N, Scalar lambda) {
    using std::sqrt;
    const Scalar Lambda = hardy_constant<Scalar>(N);
    const Scalar a = sqrt(Lambda) - sqrt(Lambda - lambda);
    return {a, Scalar(N - 2) - a};
  }
};

/// Closed-form tail of \int |u|^p r^{-s} r^{N-1} dr given the end value; throws when the tail diverges.
template <typename Scalar>
Scalar tail_rate_origin(int N, Scalar p, Scalar s, const TailModel<Scalar>& t) {
  const Scalar rate = Scalar(N) - s - p * t.origin;
  if (!(rate > 0)) throw Error(ErrorKind::Domain, "tail integral diverges at the origin");
  return rate;
}

template <typename Scalar>
Scalar tail_rate_infinity(int N, Scalar p, Scalar s, const TailModel<Scalar>& t) {
  const Scalar rate = p * t.infinity - (Scalar(N) - s);
  if (!(rate > 0)) throw Error(ErrorKind::Domain, "tail integral diverges at infinity");
  return rate;
}

/// Quadrature weights W_k (sphere area included) with \int |u|^p |x|^{-s} dx ≈ Σ W_k |u_k|^p.
/// With tails the two end weights absorb the closed-form power-law tails.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> power_weights(const RadialGrid<Scalar>& g, Scalar p, Scalar s,
                                                      const std::optional<TailModel<Scalar>>& tails = std::nullopt) {
  using std::pow;
  const auto& r = g.radii();
  Eigen::Array<Scalar, Eigen::Dynamic, 1> W = g.sphere_area() * g.weights() * r.pow(-s);
  if (tails) {
    const int N = g.dimension();
    const Eigen::Index e = g.size() - 1;
    W(0) += g.sphere_area() * pow(r(0), Scalar(N) - s) / tail_rate_origin(N, p, s, *tails);
    W(e) += g.sphere_area() * pow(r(e), Scalar(N) - s) / tail_rate_infinity(N, p, s, *tails);
  }
  return W;
}

/// \int |∇u|^2 dx ≈ Σ_k edge_k (u_{k+1}-u_k)^2 + end0 u_0^2 + end1 u_{n-1}^2.
template <typename Scalar>
struct DirichletStencil {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> edge;
  Scalar end0 = 0;
  Scalar end1 = 0;
};

template <typename Scalar>
DirichletStencil<Scalar> dirichlet_stencil(const RadialGrid<Scalar>& g,
                                           const std::optional<TailModel<Scalar>>& tails = std::nullopt) {
  using std::pow;
  const int N = g.dimension();
  const Scalar n2 = Scalar(N - 2);
  DirichletStencil<Scalar> st;
  st.edge = g.sphere_area() * g.midpoints().pow(n2) / g.log_step();
  if (tails) {
    const auto& r = g.radii();
    const Scalar g0 = tails->origin, gi = tails->infinity;
    st.end0 = g.sphere_area() * g0 * g0 * pow(r(0), n2) / tail_rate_origin(N, Scalar(2), Scalar(2), *tails);
    st.end1 = g.sphere_area() * gi * gi * pow(r(g.size() - 1), n2) /
              tail_rate_infinity(N, Scalar(2), Scalar(2), *tails);
  }
  return st;
}

template <typename Scalar, typename Derived>
Scalar dirichlet_form(const DirichletStencil<Scalar>& st, const Eigen::ArrayBase<Derived>& u) {
  const Eigen::Index n = u.size();
  const Scalar inner = (st.edge * (u.tail(n - 1) - u.head(n - 1)).square()).sum();
  return inner + st.end0 * u(0) * u(0) + st.end1 * u(n - 1) * u(n - 1);
}

/// \int_{R^N} |u|^p |x|^{-s} dx, i.e. weighted_lp(u,p,s)^p.
template <typename Scalar>
Scalar power_integral(const RadialField<Scalar>& u, Scalar p, Scalar s,
                      const std::optional<TailModel<Scalar>>& tails = std::nullopt) {
  return (power_weights(*u.grid, p, s, tails) * u.values.abs().pow(p)).sum();
}

/// ||u||_{p,s} = (\int |u|^p / |x|^s)^{1/p}.
template <typename Scalar>
Scalar weighted_lp(const RadialField<Scalar>& u, Scalar p, Scalar s,
                   const std::optional<TailModel<Scalar>>& tails = std::nullopt) {
  using std::pow;
  if (!(p >= 1)) throw Error(ErrorKind::Domain, "weighted_lp needs p >= 1");
  return pow(power_integral(u, p, s, tails), 1 / p);
}

/// \int |∇u|^2 dx with midpoint differences in y.
template <typename Scalar>
Scalar dirichlet_energy(const RadialField<Scalar>& u, const std::optional<TailModel<Scalar>>& tails = std::nullopt) {
  return dirichlet_form(dirichlet_stencil(*u.grid, tails), u.values);
}

template <typename Scalar>
RadialField<Scalar> sample_profile(const ScalarProfile<Scalar>& p, const GridPtr<Scalar>& grid) {
  if (p.N != grid->dimension()) throw Error(ErrorKind::MismatchedGrids, "profile dimension differs from grid");
  RadialField<Scalar> f(grid);
  const auto& r = grid->radii();
  for (Eigen::Index k = 0; k < r.size(); ++k) f.values(k) = profile_eval(p, r(k));
  return f;
}

/// Two-column text dump: "# N=<N> n=<n>" then "r value" per line, 17 significant digits.
template <typename Scalar>
void write_field(std::ostream& os, const RadialField<Scalar>& u) {
  const auto& g = *u.grid;
  os << "# N=" << g.dimension() << " n=" << g.size() << '\n';
  char buf[96];
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.16e %.16e\n", static_cast<double>(g.radii()(k)),
                  static_cast<double>(u.values(k)));
    os << buf;
  }
}

}  // namespace hsys
