#pragma once

// Which of the existence statements for the coupled system apply to a
// parameter set, decided from the semitrivial levels c1 = C(λ1,s1),
// c2 = C(λ2,s2) and the exponents α, β.

#include <string>

#include "hsys/closedform.hpp"

namespace hsys {

enum class LevelOrder { C1Greater, C2Greater, Equal };

/// No: hypotheses fail. Yes: holds for every ν > 0. LargeNu / SmallNu: holds beyond / below an unquantified threshold.
enum class Applicability { No, Yes, LargeNu, SmallNu };

const char* to_string(LevelOrder o);
const char* to_string(Applicability a);

struct RegimeReport {
  double c1 = 0.0;
  double c2 = 0.0;
  LevelOrder order = LevelOrder::Equal;
  CouplingCalculus calculus;
  bool h_hypotheses = false;  ///< every validate_h check passed

  /// Large coupling: a positive ground state exists.
  Applicability large_coupling_ground = Applicability::No;
  /// Ground state from a saddle semitrivial: c1 <= c2 with β < 2 (or β = 2, ν large), and the mirror.
  Applicability ground_below_c1 = Applicability::No;
  Applicability ground_below_c2 = Applicability::No;
  /// max(α,β) < 2, or max(α,β) <= 2 with ν large.
  Applicability subquadratic_ground = Applicability::No;
  /// α >= 2, c1 > c2: (0, z2) is the ground state for small ν.
  Applicability semitrivial_v_ground = Applicability::No;
  /// β >= 2, c1 < c2: (z1, 0) is the ground state for small ν.
  Applicability semitrivial_u_ground = Applicability::No;
  /// α, β >= 2: the lower semitrivial is the ground state for small ν.
  Applicability lower_semitrivial_ground = Applicability::No;
  /// α >= 2 and 2 c2 > c1 > c2: mountain-pass bound state for small ν.
  Applicability mountain_pass_c1_above = Applicability::No;
  /// β >= 2 and 2 c1 > c2 > c1.
  Applicability mountain_pass_c2_above = Applicability::No;

  bool mountain_pass_applicable() const {
    return mountain_pass_c1_above != Applicability::No || mountain_pass_c2_above != Applicability::No;
  }
};

/// Relative tolerance under which c1 and c2 are reported Equal.
inline constexpr double kLevelTieTol = 1e-12;

RegimeReport classify_regime(const ProblemParams& params);

}  // namespace hsys
