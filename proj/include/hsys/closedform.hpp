#pragma once

// Exact quantities of the coupled Hardy-Sobolev system: Hardy and
// Hardy-Sobolev constants, the scalar extremal profiles, the semitrivial
// energy levels and the exponent bookkeeping for the coupling weight h.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "hsys/errors.hpp"

namespace hsys {

template <typename Scalar = double>
Scalar hardy_constant(int N) {
  if (N < 3) throw Error(ErrorKind::InvalidDimension, "dimension N must be >= 3, got " + std::to_string(N));
  const Scalar d = Scalar(N - 2);
  return d * d / 4;
}

/// 2*_s = 2(N-s)/(N-2), for s in [0, 2).
template <typename Scalar>
Scalar critical_exponent(int N, Scalar s) {
  if (N < 3) throw Error(ErrorKind::InvalidDimension, "dimension N must be >= 3, got " + std::to_string(N));
  if (!(s >= 0 && s < 2)) throw Error(ErrorKind::InvalidOrder, "singularity order s must lie in [0, 2)");
  return 2 * (Scalar(N) - s) / Scalar(N - 2);
}

/// log of the area of the unit sphere S^{N-1}.
template <typename Scalar = double>
Scalar log_sphere_area(int N) {
  using std::lgamma;
  using std::log;
  const Scalar half_n = Scalar(N) / 2;
  return log(Scalar(2)) + half_n * log(std::numbers::pi_v<Scalar>) - lgamma(half_n);
}

template <typename Scalar = double>
Scalar sphere_area(int N) {
  using std::exp;
  return exp(log_sphere_area<Scalar>(N));
}

namespace detail {

template <typename Scalar>
void check_hardy_range(int N, Scalar lambda) {
  const Scalar Lambda = hardy_constant<Scalar>(N);
  if (!(lambda >= 0)) throw Error(ErrorKind::Domain, "Hardy parameter lambda must be >= 0");
  if (!(lambda < Lambda))
    throw Error(ErrorKind::SupercriticalHardy, "Hardy parameter lambda must be below Lambda_N = (N-2)^2/4");
}

// log(1 + e^x) without overflow.
template <typename Scalar>
Scalar softplus(Scalar x) {
  using std::exp;
  using std::log1p;
  return x > 30 ? x + log1p(exp(-x)) : log1p(exp(x));
}

}  // namespace detail

/// Parameters of the extremal family z_mu^{lambda,s}.
template <typename Scalar = double>
struct ScalarProfile {
  int N = 3;
  Scalar lambda = 0;
  Scalar s = 0;
  Scalar mu = 1;
  Scalar a_lambda = 0;   ///< sqrt(Lambda_N) - sqrt(Lambda_N - lambda)
  Scalar amplitude = 0;  ///< A(N, lambda) = 2 (Lambda_N - lambda)(N - s) / sqrt(Lambda_N)

  /// Power-law exponent of the profile at infinity, N - 2 - a_lambda.
  Scalar decay_at_infinity() const { return Scalar(N - 2) - a_lambda; }
};

template <typename Scalar>
ScalarProfile<Scalar> make_profile(int N, Scalar lambda, Scalar s, Scalar mu = Scalar(1)) {
  using std::sqrt;
  const Scalar Lambda = hardy_constant<Scalar>(N);
  detail::check_hardy_range(N, lambda);
  critical_exponent(N, s);
  if (!(mu > 0)) throw Error(ErrorKind::Domain, "scale mu must be positive");
  ScalarProfile<Scalar> p;
  p.N = N;
  p.lambda = lambda;
  p.s = s;
  p.mu = mu;
  p.a_lambda = sqrt(Lambda) - sqrt(Lambda - lambda);
  p.amplitude = 2 * (Lambda - lambda) * (Scalar(N) - s) / sqrt(Lambda);
  return p;
}

/// log z_mu(r); evaluated in log space so both power-law ends stay finite.
template <typename Scalar>
Scalar log_profile_eval(const ScalarProfile<Scalar>& p, Scalar r) {
  using std::log;
  if (!(r > 0)) throw Error(ErrorKind::Domain, "profile evaluated at non-positive radius");
  const Scalar n2 = Scalar(p.N - 2);
  const Scalar two_minus_s = 2 - p.s;
  const Scalar log_rho = log(r) - log(p.mu);
  const Scalar b = two_minus_s * (1 - 2 * p.a_lambda / n2);
  return -n2 / 2 * log(p.mu) + n2 / (2 * two_minus_s) * log(p.amplitude) - p.a_lambda * log_rho -
         n2 / two_minus_s * detail::softplus(b * log_rho);
}

template <typename Scalar>
Scalar profile_eval(const ScalarProfile<Scalar>& p, Scalar r) {
  using std::exp;
  return exp(log_profile_eval(p, r));
}

/// log S(lambda, s), the best constant of the weighted Hardy-Sobolev inequality.
template <typename Scalar>
Scalar log_best_constant(int N, Scalar lambda, Scalar s) {
  using std::lgamma;
  using std::log;
  const Scalar Lambda = hardy_constant<Scalar>(N);
  detail::check_hardy_range(N, lambda);
  critical_exponent(N, s);
  const Scalar n = Scalar(N);
  const Scalar gap = Lambda - lambda;
  const Scalar x = (n - s) / (2 - s);
  const Scalar log_inner = log(n - 2) - log(2 * (2 - s)) - log(gap) / 2 + log_sphere_area<Scalar>(N) +
                           2 * lgamma(x) - lgamma(2 * x);
  return log(Scalar(4)) + log(gap) + log((n - s) / (n - 2)) + log_inner / x;
}

template <typename Scalar>
Scalar best_constant(int N, Scalar lambda, Scalar s) {
  using std::exp;
  return exp(log_best_constant(N, lambda, s));
}

/// S(lambda,s)^{(N-s)/(2-s)}: the common value of ||z||_lambda^2 and ||z||_{2*_s,s}^{2*_s}.
template <typename Scalar>
Scalar extremal_mass(int N, Scalar lambda, Scalar s) {
  using std::exp;
  return exp((Scalar(N) - s) / (2 - s) * log_best_constant(N, lambda, s));
}

/// Energy level C(lambda, s) of the semitrivial solutions.
template <typename Scalar>
Scalar critical_level(int N, Scalar lambda, Scalar s) {
  return (2 - s) / (2 * (Scalar(N) - s)) * extremal_mass(N, lambda, s);
}

// ---------------------------------------------------------------------------
// Problem parameters and the coupling-weight calculus.

/// h(r) = h0 r^{sigma+p} / (1+r)^{p+q}.
struct HWeight {
  double h0 = 1.0;
  double p = 1.0;
  double q = 6.0;
  double sigma = 0.0;

  double operator()(double r) const {
    return h0 * std::exp((sigma + p) * std::log(r) - (p + q) * std::log1p(r));
  }
  /// h(r) / r^sigma.
  double reduced(double r) const { return h0 * std::exp(p * std::log(r) - (p + q) * std::log1p(r)); }
};

struct ProblemParams {
  int N = 3;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  double alpha = 2.0;
  double beta = 2.0;
  double nu = 0.0;
  HWeight h;

  double crit1() const { return critical_exponent(N, s1); }
  double crit2() const { return critical_exponent(N, s2); }
  /// alpha/2*_{s1} + beta/2*_{s2}
  double coupling_ratio() const { return alpha / crit1() + beta / crit2(); }
};

enum class CouplingRegime { Subcritical, Critical };

struct CouplingCalculus {
  double tau = 0.0;
  double frak_p = std::numeric_limits<double>::infinity();  ///< +inf in the critical regime
  double sigma = 0.0;
  CouplingRegime regime = CouplingRegime::Subcritical;
};

/// Relative slack used when deciding alpha/2*_1 + beta/2*_2 == 1.
inline constexpr double kCriticalRatioTol = 1e-12;

/// Returns every violated invariant of ProblemParams as a readable string.
std::vector<std::string> parameter_violations(const ProblemParams& params);

/// Throws HypothesisViolation naming the first failing inequality.
void check_parameters(const ProblemParams& params);

CouplingCalculus coupling_calculus(const ProblemParams& params);

/// Validated parameters with h.sigma filled in from the coupling calculus.
ProblemParams make_params(int N, double lambda1, double lambda2, double s1, double s2, double s3, double alpha,
                          double beta, double nu, double h0 = 1.0, double h_p = 1.0, double h_q = 6.0);

struct HypothesisCheck {
  std::string name;
  bool passed = false;
  std::string note;
};

struct HValidation {
  CouplingCalculus calculus;
  std::vector<HypothesisCheck> checks;
  bool all_passed() const;
};

/// Symbolic check of the hypotheses on h for the built-in weight family.
HValidation validate_h(const ProblemParams& params, bool require_radial_monotone = false);

/// inf of {sigma > 0 : P sigma^{2/2*_1} + Q sigma^{2/2*_2} < (P+Q) sigma + R nu sigma^{alpha/2*_1 + beta/2*_2}}.
/// Returns +inf when the set is empty on the search window (1e-12, 1e6].
double sigma_inf(double P, double Q, double R, double nu, const ProblemParams& params);

/// Defect f(sigma) = P sigma^{2/2*_1} + Q sigma^{2/2*_2} - (P+Q) sigma - R nu sigma^{ratio}; sigma in the set iff f < 0.
double sigma_defect(double P, double Q, double R, double nu, const ProblemParams& params, double sigma);

}  // namespace hsys
