#pragma once

#include "pbf/audit.hpp"
#include "pbf/problems.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pbf {

enum class Solver { PbfOneCut, PbfTwoCut, PbfMultiCut, Ps };

std::string to_string(Solver s);
Solver parse_solver(const std::string& s);

/// Where the instance comes from: a JSON file or a generator.
struct InstanceSpec {
  std::string path;
  std::string generator;  // "phase_retrieval" or "hybrid_synthetic" when path is empty
  int n_samples = 50;
  int dim = 10;
  std::uint64_t seed = 1;
  double noise = 0.0;
  double smooth_weight = 1.0;
  int kink_count = 5;
  DomainSpec domain;
};

Instance load_or_generate(const InstanceSpec& spec);

struct RunConfig {
  InstanceSpec instance;
  Solver solver = Solver::PbfMultiCut;

  // tolerances: rho, or both eta_bar and eps_bar
  std::optional<double> rho;
  std::optional<double> eta_bar;
  std::optional<double> eps_bar;

  std::optional<double> lambda;
  std::optional<double> gamma_chi;
  std::optional<std::size_t> max_cuts;
  std::string reset = "fresh";
  std::optional<double> subproblem_tol;
  AuditMode audit = AuditMode::Warn;
  std::optional<std::uint64_t> max_iters;
  std::optional<double> phi_lower;  // overrides the instance's known lower bound

  // PS
  std::optional<std::uint64_t> ps_T;
  std::optional<double> ps_gamma;
  std::uint64_t ps_moreau_every = 0;
  std::uint64_t ps_audit_max_T = 200;

  bool verify_moreau = false;
  std::uint64_t cert_samples = 10000;
  std::uint64_t seed = 1;  // for the sampled certificate check
  bool timing = false;

  std::string out_dir;  // empty: $PBF_OUTPUT_DIR, else "."
  std::string tag;      // file prefix; default <instance>_<solver>
  bool write_files = true;
};

/// Throws InvalidArgument unless exactly one tolerance form is given.
void validate(const RunConfig& cfg);

/// One row of a comparison table.
struct RunSummaryRow {
  std::string label;
  std::string solver;
  std::string instance;
  std::string status;
  std::uint64_t iterations = 0;
  std::uint64_t serious_steps = 0;
  std::uint64_t oracle_calls = 0;
  double moreau_grad = kNaN;  // measured at the output point, when verified
  std::optional<std::uint64_t> budget;
  int exit_code = 0;
};

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 2 audit violation, 3 budget exhausted
  nlohmann::json summary;
  nlohmann::json audit;
  RunSummaryRow row;
  std::string trace_path;
  std::string summary_path;
  std::string audit_path;
};

std::string resolve_out_dir(const std::string& configured);

/// Runs one configuration, writing <tag>.trace.csv, <tag>.summary.json and
/// <tag>.audit.json unless write_files is off. The trace is also returned
/// through `trace_text` when non-null.
RunOutcome execute(const RunConfig& cfg, std::string* trace_text = nullptr);

/// Runs the configurations concurrently and returns their rows in order.
/// Rejects configurations that differ in instance or tolerance.
std::vector<RunSummaryRow> compare(const std::vector<RunConfig>& configs);

std::string comparison_csv(const std::vector<RunSummaryRow>& rows);

/// The command-line front end (verbs run, compare, gen, audit). Returns the
/// process exit code; 1 for malformed input.
int cli_main(int argc, const char* const* argv);

}  // namespace pbf
