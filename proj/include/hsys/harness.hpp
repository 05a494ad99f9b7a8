#pragma once

// Run configuration, ν-sweeps and file output for the command-line tool.
//
// Config files hold one `key = value` per line; `#` starts a comment.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hsys/closedform.hpp"
#include "hsys/errors.hpp"
#include "hsys/regime.hpp"
#include "hsys/solvers.hpp"

namespace hsys {

/// Process exit statuses of run_config.
enum ExitStatus : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUnknownKey = 2,
  kExitMissingKey = 3,
  kExitUnreadable = 4,
  kExitHypothesis = 5,
  kExitRegime = 6,
  kExitBadValue = 7,
  kExitNumerical = 8,
};

int exit_status(const Error& e);

/// Every key a config file may contain.
const std::vector<std::string>& config_keys();

using KeyValues = std::map<std::string, std::string>;

KeyValues read_key_values(std::istream& in, const std::string& origin = "<config>");
KeyValues read_key_values_file(const std::string& path);

struct RunConfig {
  std::string command;
  ProblemParams params;
  std::vector<double> nu_list;
  double r_min = kDefaultRMin;
  double r_max = kDefaultRMax;
  long grid_n = kDefaultGridSize;
  SolverConfig solver;
  std::uint64_t seed = 0;
  std::string out_dir;
};

/// Validates keys and values. Parameter hypotheses are checked later, by the command.
RunConfig make_run_config(const KeyValues& kv);

struct SweepRow {
  double nu = 0.0;
  double energy = 0.0;
  double gap = 0.0;  ///< min(c1, c2) - energy
  Classification classification = Classification::Failed;
  double nehari_residual = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
};

struct SweepTable {
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<SweepRow> rows;
};

SweepTable nu_sweep(const ProblemParams& params, const std::vector<double>& nus, const GridPtr<>& grid,
                    const SolverConfig& cfg, std::uint64_t seed);

/// Smallest swept ν whose ground state is Coupled with gap >= rel_gap · min(c1, c2).
std::optional<double> coupled_crossover(const SweepTable& t, double rel_gap = 1e-3);

void write_sweep_csv(std::ostream& os, const SweepTable& t);
void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace);
std::string result_json(const SolveResult& r, double c1, double c2);
std::string regime_json(const RegimeReport& rep);

/// Executes a parsed configuration; output files go to cfg.out_dir. Returns an ExitStatus.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Reads, validates and runs a config file; every failure maps to a distinct ExitStatus.
int run_config(const std::string& path, std::ostream& out, std::ostream& err);
int run_key_values(const KeyValues& kv, std::ostream& out, std::ostream& err);

}  // namespace hsys
