#include "hsys/closedform.hpp"

#include <cmath>
#include <sstream>

namespace hsys {

namespace {

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

bool in_open_0_2(double s) { return s > 0.0 && s < 2.0; }

}  // namespace

std::vector<std::string> parameter_violations(const ProblemParams& p) {
  std::vector<std::string> out;
  if (p.N < 3) {
    out.push_back("N >= 3");
    return out;
  }
  const double Lambda = hardy_constant(p.N);
  if (!(p.lambda1 > 0.0 && p.lambda1 < Lambda)) out.push_back("0 < lambda1 < Lambda_N");
  if (!(p.lambda2 > 0.0 && p.lambda2 < Lambda)) out.push_back("0 < lambda2 < Lambda_N");
  if (!in_open_0_2(p.s1)) out.push_back("s1 in (0,2)");
  if (!in_open_0_2(p.s2)) out.push_back("s2 in (0,2)");
  if (!in_open_0_2(p.s3)) out.push_back("s3 in (0,2)");
  if (!(p.alpha > 1.0)) out.push_back("alpha > 1");
  if (!(p.beta > 1.0)) out.push_back("beta > 1");
  if (!(p.nu >= 0.0)) out.push_back("nu >= 0");
  if (!out.empty()) return out;

  const double ratio = p.coupling_ratio();
  if (ratio > 1.0 + kCriticalRatioTol)
    out.push_back("alpha/2*_{s1}+beta/2*_{s2} ≤ 1 (got " + fmt_double(ratio) + ")");
  const double weighted = p.s1 * p.alpha / p.crit1() + p.s2 * p.beta / p.crit2();
  if (p.s3 < weighted - kCriticalRatioTol)
    out.push_back("s3 ≥ s1*alpha/2*_{s1}+s2*beta/2*_{s2} (need s3 >= " + fmt_double(weighted) + ")");
  if (!(p.h.h0 > 0.0)) out.push_back("h0 > 0");
  if (!(p.h.p > 0.0)) out.push_back("h_p > 0");
  if (!(p.h.q > 0.0)) out.push_back("h_q > 0");
  return out;
}

void check_parameters(const ProblemParams& params) {
  const auto violations = parameter_violations(params);
  if (!violations.empty())
    throw Error(ErrorKind::HypothesisViolation, "hypothesis violated: " + violations.front());
}

CouplingCalculus coupling_calculus(const ProblemParams& p) {
  check_parameters(p);
  CouplingCalculus c;
  const double ratio = p.coupling_ratio();
  c.tau = p.s3 - (p.s1 * p.alpha / p.crit1() + p.s2 * p.beta / p.crit2());
  if (std::abs(c.tau) <= kCriticalRatioTol) c.tau = 0.0;
  if (std::abs(1.0 - ratio) <= kCriticalRatioTol) {
    c.regime = CouplingRegime::Critical;
    c.frak_p = std::numeric_limits<double>::infinity();
    // h/|x|^tau must be bounded; tau is the exponent carried into h~.
    c.sigma = c.tau;
  } else {
    c.regime = CouplingRegime::Subcritical;
    c.frak_p = 1.0 / (1.0 - ratio);
    c.sigma = c.tau * c.frak_p;
  }
  return c;
}

ProblemParams make_params(int N, double lambda1, double lambda2, double s1, double s2, double s3, double alpha,
                          double beta, double nu, double h0, double h_p, double h_q) {
  ProblemParams p;
  p.N = N;
  p.lambda1 = lambda1;
  p.lambda2 = lambda2;
  p.s1 = s1;
  p.s2 = s2;
  p.s3 = s3;
  p.alpha = alpha;
  p.beta = beta;
  p.nu = nu;
  p.h.h0 = h0;
  p.h.p = h_p;
  p.h.q = h_q;
  p.h.sigma = coupling_calculus(p).sigma;
  return p;
}

bool HValidation::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

HValidation validate_h(const ProblemParams& params, bool require_radial_monotone) {
  HValidation report;
  report.calculus = coupling_calculus(params);
  const auto& cc = report.calculus;
  const HWeight& h = params.h;
  const double n = params.N;

  report.checks.push_back({"sigma < 2", cc.sigma < 2.0,
                           cc.sigma < 2.0 ? "" : "sigma = " + fmt_double(cc.sigma) + " leaves the admissible range (0,2)"});
  // h~ = h/r^sigma = h0 r^p / (1+r)^{p+q}
  report.checks.push_back({"h~(0) = 0", h.p > 0.0, "h~(r) ~ h0 r^p near 0"});
  report.checks.push_back({"h~(inf) = 0", h.q > 0.0, "h~(r) ~ h0 r^-q near infinity"});

  if (cc.regime == CouplingRegime::Subcritical) {
    // integrand h^P r^{-sigma} r^{N-1}: r^{P(sigma+p) - sigma + N - 1} at 0, r^{P(sigma-q) - sigma + N - 1} at infinity
    const double P = cc.frak_p;
    const double at_zero = P * (cc.sigma + h.p) - cc.sigma + n;
    const double at_inf = P * (cc.sigma - h.q) - cc.sigma + n;
    report.checks.push_back({"h in L^{p,sigma} near 0", at_zero > 0.0,
                             "integrand exponent + 1 = " + fmt_double(at_zero)});
    report.checks.push_back({"h in L^{p,sigma} near infinity", at_inf < 0.0,
                             "needs p*q > N + sigma*(p-1); integrand exponent + 1 = " + fmt_double(at_inf)});
  } else {
    // h/r^tau = h0 r^p / (1+r)^{p+q} with tau = sigma
    report.checks.push_back({"h/r^tau bounded", h.p >= 0.0 && h.q >= 0.0, "critical regime: boundedness only"});
  }

  if (require_radial_monotone) {
    report.checks.push_back(
        {"h radially non-increasing", false,
         "the weight family has h(0) = 0 and h > 0 elsewhere (sigma + p > 0), so it is never non-increasing"});
  }
  return report;
}

double sigma_defect(double P, double Q, double R, double nu, const ProblemParams& params, double sigma) {
  const double e1 = 2.0 / params.crit1();
  const double e2 = 2.0 / params.crit2();
  const double ec = params.coupling_ratio();
  return P * std::pow(sigma, e1) + Q * std::pow(sigma, e2) - (P + Q) * sigma - R * nu * std::pow(sigma, ec);
}

double sigma_inf(double P, double Q, double R, double nu, const ProblemParams& params) {
  if (!(P > 0 && Q > 0 && R > 0)) throw Error(ErrorKind::Domain, "sigma_inf needs P, Q, R > 0");
  if (!(nu >= 0)) throw Error(ErrorKind::Domain, "sigma_inf needs nu >= 0");
  if (!(params.alpha > 1 && params.beta > 1) || params.coupling_ratio() > 1.0 + kCriticalRatioTol)
    throw Error(ErrorKind::HypothesisViolation, "hypothesis violated: alpha/2*_{s1}+beta/2*_{s2} ≤ 1");

  auto in_set = [&](double s) { return sigma_defect(P, Q, R, nu, params, s) < 0.0; };

  constexpr double lo_exp = -12.0;
  constexpr double hi_exp = 6.0;
  constexpr int per_decade = 400;
  constexpr int steps = static_cast<int>((hi_exp - lo_exp) * per_decade);

  double prev = std::pow(10.0, lo_exp);
  if (in_set(prev)) return 0.0;
  for (int k = 1; k <= steps; ++k) {
    const double cur = std::pow(10.0, lo_exp + (hi_exp - lo_exp) * k / steps);
    if (in_set(cur)) {
      double lo = prev, hi = cur;
      while (hi - lo > 1e-14 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (in_set(mid) ? hi : lo) = mid;
      }
      return lo;
    }
    prev = cur;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace hsys
