#pragma once

// Nehari-constrained descent for ground states, the semitrivial pairs, a
// path-deformation mountain-pass solver and concentration diagnostics.
//
// Descent directions are Sobolev gradients: the Riesz representative of J'
// in the ||·||_λ inner product, d_i = K_i^{-1} g_i. At a Nehari point d is
// K-orthogonal to the state, so it is already tangent to the scaling ray.

#include <cstdint>
#include <vector>

#include <Eigen/SparseCholesky>

#include "hsys/closedform.hpp"
#include "hsys/functional.hpp"
#include "hsys/grid.hpp"

namespace hsys {

struct SolverConfig {
  int max_iters = 2000;
  double step0 = 1.0;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  double grad_tol = 1e-6;
  double energy_tol = 1e-10;
  int path_points = 21;
  int deform_rounds = 20;
  /// Climbing-image iterations applied to the highest path node.
  int refine_iters = 200;
  /// Curvature pairs kept by ground_state (limited-memory BFGS on top of the Sobolev metric); 0 gives plain
  /// Sobolev-gradient steps.
  int memory = 8;

  /// Throws Config on a non-positive field or a tolerance below 1e-12.
  void validate() const;
};

enum class Classification { Coupled, SemitrivialU, SemitrivialV, Failed };

const char* to_string(Classification c);

/// Components whose λ-norm is below this fraction of the other one count as zero.
inline constexpr double kComponentThreshold = 1e-6;

struct TraceEntry {
  int iter = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
};

struct SolveResult {
  StatePair<> state;
  double energy = 0.0;
  double nehari_residual = 0.0;
  double grad_norm = 0.0;
  Classification classification = Classification::Failed;
  std::vector<TraceEntry> trace;
  double nu = 0.0;
  int iters = 0;
  bool converged = false;
  EnergyBreakdown<> breakdown;
};

struct MultiStartResult {
  SolveResult best;
  std::vector<SolveResult> runs;  ///< in start order: (z1,0), (0,z2), mixed c = 0.25, 0.5, 0.75
};

struct MountainPassResult {
  SolveResult bound_state;
  double initial_max = 0.0;
  std::vector<double> initial_path;  ///< node energies of the projected straight path
  std::vector<double> final_path;
  std::vector<double> cmp_history;  ///< path maximum after each deformation round, starting with initial_max
  double c_mp = 0.0;
  int max_node = 0;
};

struct ConcentrationReport {
  double rho_0_u = 0.0;
  double rho_inf_u = 0.0;
  double rho_0_v = 0.0;
  double rho_inf_v = 0.0;
};

enum class Semitrivial { First, Second };

/// Riesz map of the λ-norms: solves K_1 x = g_u and K_2 y = g_v.
class SobolevMetric {
 public:
  explicit SobolevMetric(const Functional<>& f);
  std::pair<Eigen::ArrayXd, Eigen::ArrayXd> riesz(const Eigen::ArrayXd& gu, const Eigen::ArrayXd& gv) const;

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_[2];
};

/// (z_mu^{(1)}, 0) or (0, z_mu^{(2)}) sampled on the grid.
StatePair<> semitrivial(Semitrivial which, double mu, const ProblemParams& params, const GridPtr<>& grid);

Classification classify(const StatePair<>& state, const Functional<>& f);

/// Descent of the truncated energy on the Nehari manifold: every trial point is clipped to be nonnegative and
/// rescaled onto the manifold, and accepted by an Armijo test on the rescaled energy.
SolveResult ground_state(const ProblemParams& params, const StatePair<>& init, const SolverConfig& cfg);
SolveResult ground_state(const Functional<>& f, const StatePair<>& init, const SolverConfig& cfg);

/// Runs ground_state from the five standard starts; scales are jittered from the seed.
MultiStartResult multistart_ground_state(const ProblemParams& params, const GridPtr<>& grid, const SolverConfig& cfg,
                                         std::uint64_t seed);

/// Throws RegimeViolation unless one of the mountain-pass level orderings holds with the matching exponent >= 2.
MountainPassResult mountain_pass(const ProblemParams& params, const GridPtr<>& grid, const SolverConfig& cfg);

ConcentrationReport concentration_report(const StatePair<>& state, const ProblemParams& params, double r_lo,
                                         double r_hi);

}  // namespace hsys
