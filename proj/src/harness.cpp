#include "hsys/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace hsys {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Unreadable, "cannot write '" + path.string() + "'");
  os << text;
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream os;
  fn(os);
  write_file(path, os.str());
}

ProblemParams finalize_params(ProblemParams p) {
  p.h.sigma = coupling_calculus(p).sigma;
  return p;
}

void require_h_hypotheses(const ProblemParams& p) {
  const auto rep = validate_h(p);
  for (const auto& c : rep.checks)
    if (!c.passed) throw Error(ErrorKind::HypothesisViolation, "hypothesis violated: " + c.name + " (" + c.note + ")");
}

void print_constants(const ProblemParams& p, std::ostream& out) {
  const auto cc = coupling_calculus(p);
  out << "Lambda_N      = " << num(hardy_constant(p.N)) << '\n';
  out << "2*_{s1}       = " << num(p.crit1()) << '\n';
  out << "2*_{s2}       = " << num(p.crit2()) << '\n';
  out << "S(lambda1,s1) = " << num(best_constant(p.N, p.lambda1, p.s1)) << '\n';
  out << "S(lambda2,s2) = " << num(best_constant(p.N, p.lambda2, p.s2)) << '\n';
  out << "c1            = " << num(critical_level(p.N, p.lambda1, p.s1)) << '\n';
  out << "c2            = " << num(critical_level(p.N, p.lambda2, p.s2)) << '\n';
  out << "ratio         = " << num(p.coupling_ratio()) << '\n';
  out << "tau           = " << num(cc.tau) << '\n';
  out << "frak_p        = " << (std::isinf(cc.frak_p) ? std::string("inf") : num(cc.frak_p)) << '\n';
  out << "sigma         = " << num(cc.sigma) << '\n';
  out << "regime        = " << (cc.regime == CouplingRegime::Critical ? "critical" : "subcritical") << '\n';
}

void write_state_files(const fs::path& dir, const SolveResult& r) {
  write_with(dir / "profile_u.dat", [&](std::ostream& os) { write_field(os, r.state.u); });
  write_with(dir / "profile_v.dat", [&](std::ostream& os) { write_field(os, r.state.v); });
  write_with(dir / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, r.trace); });
}

}  // namespace

int exit_status(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::UnknownKey: return kExitUnknownKey;
    case ErrorKind::MissingKey: return kExitMissingKey;
    case ErrorKind::Unreadable: return kExitUnreadable;
    case ErrorKind::HypothesisViolation: return kExitHypothesis;
    case ErrorKind::RegimeViolation: return kExitRegime;
    case ErrorKind::Config:
    case ErrorKind::InvalidDimension:
    case ErrorKind::InvalidOrder:
    case ErrorKind::SupercriticalHardy:
    case ErrorKind::InvalidGrid:
    case ErrorKind::Domain: return kExitBadValue;
    default: return kExitNumerical;
  }
}

SweepTable nu_sweep(const ProblemParams& params, const std::vector<double>& nus, const GridPtr<>& grid,
                    const SolverConfig& cfg, std::uint64_t seed) {
  if (nus.size() < 2) throw Error(ErrorKind::Config, "nu sweep needs at least two values");
  for (std::size_t i = 1; i < nus.size(); ++i)
    if (!(nus[i] > nus[i - 1])) throw Error(ErrorKind::Config, "nu sweep values must be strictly increasing");

  SweepTable t;
  t.c1 = critical_level(params.N, params.lambda1, params.s1);
  t.c2 = critical_level(params.N, params.lambda2, params.s2);
  const double cmin = std::min(t.c1, t.c2);
  for (double nu : nus) {
    ProblemParams p = params;
    p.nu = nu;
    const auto ms = multistart_ground_state(p, grid, cfg, seed);
    SweepRow row;
    row.nu = nu;
    row.energy = ms.best.energy;
    row.gap = cmin - ms.best.energy;
    row.classification = ms.best.classification;
    row.nehari_residual = ms.best.nehari_residual;
    row.grad_norm = ms.best.grad_norm;
    row.iters = ms.best.iters;
    t.rows.push_back(row);
  }
  return t;
}

std::optional<double> coupled_crossover(const SweepTable& t, double rel_gap) {
  const double cmin = std::min(t.c1, t.c2);
  for (const auto& r : t.rows)
    if (r.classification == Classification::Coupled && r.gap >= rel_gap * cmin) return r.nu;
  return std::nullopt;
}

void write_sweep_csv(std::ostream& os, const SweepTable& t) {
  os << "nu,energy,gap,classification,nehari_residual,grad_norm,iters\n";
  for (const auto& r : t.rows)
    os << num(r.nu) << ',' << num(r.energy) << ',' << num(r.gap) << ',' << to_string(r.classification) << ','
       << num(r.nehari_residual) << ',' << num(r.grad_norm) << ',' << r.iters << '\n';
}

void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace) {
  os << "iter,energy,grad_norm\n";
  for (const auto& e : trace) os << e.iter << ',' << num(e.energy) << ',' << num(e.grad_norm) << '\n';
}

std::string result_json(const SolveResult& r, double c1, double c2) {
  ojson j;
  j["energy"] = r.energy;
  j["energy_normalized"] = r.energy / std::min(c1, c2);
  j["nehari_residual"] = r.nehari_residual;
  j["grad_norm"] = r.grad_norm;
  j["classification"] = to_string(r.classification);
  j["nu"] = r.nu;
  j["iters"] = r.iters;
  j["converged"] = r.converged;
  for (const auto& [k, v] : r.breakdown.items()) j[k] = v;
  j["c1"] = c1;
  j["c2"] = c2;
  return j.dump(2) + "\n";
}

std::string regime_json(const RegimeReport& rep) {
  ojson j;
  j["c1"] = rep.c1;
  j["c2"] = rep.c2;
  j["order"] = to_string(rep.order);
  j["tau"] = rep.calculus.tau;
  j["frak_p"] = std::isinf(rep.calculus.frak_p) ? ojson("inf") : ojson(rep.calculus.frak_p);
  j["sigma"] = rep.calculus.sigma;
  j["coupling_regime"] = rep.calculus.regime == CouplingRegime::Critical ? "critical" : "subcritical";
  j["h_hypotheses"] = rep.h_hypotheses;
  j["large_coupling_ground"] = to_string(rep.large_coupling_ground);
  j["ground_below_c1"] = to_string(rep.ground_below_c1);
  j["ground_below_c2"] = to_string(rep.ground_below_c2);
  j["subquadratic_ground"] = to_string(rep.subquadratic_ground);
  j["semitrivial_v_ground"] = to_string(rep.semitrivial_v_ground);
  j["semitrivial_u_ground"] = to_string(rep.semitrivial_u_ground);
  j["lower_semitrivial_ground"] = to_string(rep.lower_semitrivial_ground);
  j["mountain_pass_c1_above"] = to_string(rep.mountain_pass_c1_above);
  j["mountain_pass_c2_above"] = to_string(rep.mountain_pass_c2_above);
  return j.dump(2) + "\n";
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const ProblemParams p = finalize_params(cfg.params);

    if (cfg.command == "constants") {
      print_constants(p, out);
      return kExitOk;
    }
    if (cfg.command == "validate") {
      const auto rep = validate_h(p);
      for (const auto& c : rep.checks)
        out << (c.passed ? "pass  " : "FAIL  ") << c.name << (c.note.empty() ? "" : "  [" + c.note + "]") << '\n';
      return rep.all_passed() ? kExitOk : kExitHypothesis;
    }

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);

    if (cfg.command == "regime") {
      const auto rep = classify_regime(p);
      write_file(dir / "regime.json", regime_json(rep));
      out << regime_json(rep);
      return kExitOk;
    }

    require_h_hypotheses(p);
    const auto grid = build_grid(p.N, cfg.r_min, cfg.r_max, cfg.grid_n);
    const double c1 = critical_level(p.N, p.lambda1, p.s1);
    const double c2 = critical_level(p.N, p.lambda2, p.s2);
    write_file(dir / "regime.json", regime_json(classify_regime(p)));

    if (cfg.command == "solve-ground") {
      const auto ms = multistart_ground_state(p, grid, cfg.solver, cfg.seed);
      write_file(dir / "result.json", result_json(ms.best, c1, c2));
      write_state_files(dir, ms.best);
      out << "energy " << num(ms.best.energy) << "  " << to_string(ms.best.classification) << '\n';
      return kExitOk;
    }
    if (cfg.command == "solve-mp") {
      const auto mp = mountain_pass(p, grid, cfg.solver);
      auto j = ojson::parse(result_json(mp.bound_state, c1, c2));
      j["initial_max"] = mp.initial_max;
      j["c_mp"] = mp.c_mp;
      j["max_node"] = mp.max_node;
      write_file(dir / "result.json", j.dump(2) + "\n");
      write_state_files(dir, mp.bound_state);
      write_with(dir / "mp_history.csv", [&](std::ostream& os) {
        os << "round,c_mp\n";
        for (std::size_t i = 0; i < mp.cmp_history.size(); ++i) os << i << ',' << num(mp.cmp_history[i]) << '\n';
      });
      out << "initial max " << num(mp.initial_max) << "  c_MP " << num(mp.c_mp) << '\n';
      return kExitOk;
    }
    if (cfg.command == "sweep") {
      const auto t = nu_sweep(p, cfg.nu_list, grid, cfg.solver, cfg.seed);
      write_with(dir / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, t); });
      const auto cross = coupled_crossover(t);
      out << "coupled crossover: " << (cross ? num(*cross) : std::string("none in sweep")) << '\n';
      return kExitOk;
    }
    throw Error(ErrorKind::Config, "key 'command': unknown command '" + cfg.command + "'");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_status(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run_key_values(const KeyValues& kv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = make_run_config(kv);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_status(e);
  }
  return run(cfg, out, err);
}

int run_config(const std::string& path, std::ostream& out, std::ostream& err) {
  KeyValues kv;
  try {
    kv = read_key_values_file(path);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_status(e);
  }
  return run_key_values(kv, out, err);
}

}  // namespace hsys
