#include "hsys/regime.hpp"

#include <algorithm>
#include <cmath>

namespace hsys {

const char* to_string(LevelOrder o) {
  switch (o) {
    case LevelOrder::C1Greater: return "C1Greater";
    case LevelOrder::C2Greater: return "C2Greater";
    case LevelOrder::Equal: return "Equal";
  }
  return "?";
}

const char* to_string(Applicability a) {
  switch (a) {
    case Applicability::No: return "no";
    case Applicability::Yes: return "yes";
    case Applicability::LargeNu: return "large-nu";
    case Applicability::SmallNu: return "small-nu";
  }
  return "?";
}

namespace {

// exponent < 2 -> Yes, == 2 -> LargeNu, > 2 -> No
Applicability below_two(double e) {
  if (e < 2.0) return Applicability::Yes;
  if (e == 2.0) return Applicability::LargeNu;
  return Applicability::No;
}

}  // namespace

RegimeReport classify_regime(const ProblemParams& params) {
  RegimeReport rep;
  const auto hv = validate_h(params);
  rep.calculus = hv.calculus;
  rep.h_hypotheses = hv.all_passed();
  rep.c1 = critical_level(params.N, params.lambda1, params.s1);
  rep.c2 = critical_level(params.N, params.lambda2, params.s2);
  const double scale = std::max(rep.c1, rep.c2);
  if (std::abs(rep.c1 - rep.c2) <= kLevelTieTol * scale)
    rep.order = LevelOrder::Equal;
  else
    rep.order = rep.c1 > rep.c2 ? LevelOrder::C1Greater : LevelOrder::C2Greater;

  if (!rep.h_hypotheses) return rep;

  const double a = params.alpha, b = params.beta;
  const bool c1_le_c2 = rep.order != LevelOrder::C1Greater;
  const bool c1_ge_c2 = rep.order != LevelOrder::C2Greater;

  rep.large_coupling_ground = Applicability::LargeNu;
  rep.ground_below_c1 = c1_le_c2 ? below_two(b) : Applicability::No;
  rep.ground_below_c2 = c1_ge_c2 ? below_two(a) : Applicability::No;
  rep.subquadratic_ground = below_two(std::max(a, b));

  rep.semitrivial_v_ground = (a >= 2.0 && rep.order == LevelOrder::C1Greater) ? Applicability::SmallNu : Applicability::No;
  rep.semitrivial_u_ground = (b >= 2.0 && rep.order == LevelOrder::C2Greater) ? Applicability::SmallNu : Applicability::No;
  rep.lower_semitrivial_ground = (a >= 2.0 && b >= 2.0) ? Applicability::SmallNu : Applicability::No;

  rep.mountain_pass_c1_above = (a >= 2.0 && 2.0 * rep.c2 > rep.c1 && rep.c1 > rep.c2) ? Applicability::SmallNu : Applicability::No;
  rep.mountain_pass_c2_above = (b >= 2.0 && 2.0 * rep.c1 > rep.c2 && rep.c2 > rep.c1) ? Applicability::SmallNu : Applicability::No;
  return rep;
}

}  // namespace hsys
