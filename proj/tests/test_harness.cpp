#include "pbf/harness.hpp"
#include "pbf/trace.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pbf;
namespace fs = std::filesystem;

namespace {

RunConfig small_run(Solver solver) {
  RunConfig c;
  c.instance.generator = "phase_retrieval";
  c.instance.n_samples = 20;
  c.instance.dim = 4;
  c.instance.seed = 3;
  c.solver = solver;
  c.rho = 1.0;
  c.write_files = false;
  c.cert_samples = 2000;
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pbf_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pbf");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, SolverNames) {
  for (Solver s : {Solver::PbfOneCut, Solver::PbfTwoCut, Solver::PbfMultiCut, Solver::Ps})
    EXPECT_EQ(parse_solver(to_string(s)), s);
  EXPECT_THROW(parse_solver("bundle"), Error);
}

TEST(Config, ToleranceSpecIsRequired) {
  RunConfig c = small_run(Solver::PbfMultiCut);
  EXPECT_NO_THROW(validate(c));
  c.eta_bar = 0.1;
  EXPECT_THROW(validate(c), Error);  // both forms
  c.rho.reset();
  EXPECT_THROW(validate(c), Error);  // eta without eps
  c.eps_bar = 1e-3;
  EXPECT_NO_THROW(validate(c));
  c.eta_bar.reset();
  c.eps_bar.reset();
  EXPECT_THROW(validate(c), Error);
  c.solver = Solver::Ps;
  EXPECT_THROW(validate(c), Error);
  c.ps_T = 10;
  EXPECT_NO_THROW(validate(c));
}

TEST(Execute, PbfRunSummaryAndTrace) {
  std::string trace;
  RunConfig c = small_run(Solver::PbfMultiCut);
  c.verify_moreau = true;
  const RunOutcome out = execute(c, &trace);
  EXPECT_EQ(out.exit_code, 0);
  EXPECT_EQ(out.summary["status"], "converged");
  EXPECT_TRUE(out.summary["within_budget"].get<bool>());
  EXPECT_EQ(out.summary["certificate"]["source"], "terminal");
  EXPECT_LE(out.summary["measured_moreau"]["grad_norm"].get<double>(),
            out.summary["conversions"]["moreau_bound"].get<double>());
  EXPECT_TRUE(out.summary["measured_moreau"]["within_rho"].get<bool>());
  EXPECT_EQ(out.summary["inclusion_check"]["violations"], 0);
  for (const auto& check : out.audit) EXPECT_NE(check["status"], "fail") << check.dump();

  std::istringstream in(trace);
  const TraceFile tf = read_trace(in);
  for (const char* key : {"solver", "tau", "delta", "lambda", "chi", "alpha", "N", "m", "M", "L", "budget_K",
                          "budget_t_bar", "eta_bar", "eps_bar", "scheme", "max_cuts"})
    EXPECT_TRUE(tf.get(key).has_value()) << key;
  EXPECT_EQ(tf.rows.size(), out.summary["iterations"].get<std::size_t>());
  // the re-audit from the trace alone agrees, including the serious-step identity
  for (const CheckResult& r : audit_trace(tf)) EXPECT_EQ(r.violations, 0u) << r.name;
}

TEST(Execute, TraceIsByteIdentical) {
  for (Solver s : {Solver::PbfTwoCut, Solver::PbfMultiCut, Solver::Ps}) {
    RunConfig c = small_run(s);
    if (s == Solver::Ps) c.ps_T = 50;
    std::string a, b;
    const RunOutcome x = execute(c, &a);
    const RunOutcome y = execute(c, &b);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b) << to_string(s);
    EXPECT_EQ(x.summary.dump(), y.summary.dump());
  }
}

TEST(Execute, BudgetExhaustionExitCode) {
  RunConfig c = small_run(Solver::PbfMultiCut);
  c.rho = 0.05;
  c.max_iters = 5;
  const RunOutcome out = execute(c);
  EXPECT_EQ(out.summary["status"], "budget-exhausted");
  EXPECT_EQ(out.exit_code, 3);
  EXPECT_EQ(out.summary["serious_steps"], 0);
  EXPECT_TRUE(out.summary["certificate"].is_null());  // no cycle finished
}

TEST(Execute, PsAuditFlags) {
  RunConfig c = small_run(Solver::Ps);
  c.ps_T = 40;
  RunOutcome out = execute(c);
  ASSERT_EQ(out.audit.size(), 1u);
  EXPECT_EQ(out.audit[0]["status"], "pass");
  EXPECT_EQ(out.summary["iterations"], 41);

  c.instance.generator = "hybrid_synthetic";
  out = execute(c);
  EXPECT_EQ(out.audit[0]["status"], "inapplicable");
  EXPECT_EQ(out.audit[0]["note"], "inapplicable (L>0)");
  EXPECT_EQ(out.exit_code, 0);

  c = small_run(Solver::Ps);
  c.ps_T = 300;
  EXPECT_EQ(execute(c).audit[0]["status"], "skipped");
}

TEST(Execute, PsIterationCountFromRho) {
  RunConfig c = small_run(Solver::Ps);
  c.max_iters = 100;
  const RunOutcome out = execute(c);
  EXPECT_TRUE(out.summary["params"]["truncated"].get<bool>());
  EXPECT_EQ(out.summary["params"]["T"], 100);
}

TEST(Compare, RowsAndRejection) {
  const RunConfig a = small_run(Solver::PbfMultiCut);
  const std::vector<RunSummaryRow> same = compare({a, a});
  ASSERT_EQ(same.size(), 2u);
  EXPECT_EQ(same[0].iterations, same[1].iterations);
  EXPECT_EQ(same[0].oracle_calls, same[1].oracle_calls);

  RunConfig b = small_run(Solver::PbfTwoCut);
  RunConfig ps = small_run(Solver::Ps);
  ps.ps_T = 30;
  const std::vector<RunSummaryRow> rows = compare({a, b, ps});
  EXPECT_EQ(rows[0].solver, "pbf-multicut");
  EXPECT_EQ(rows[2].solver, "ps");
  EXPECT_EQ(rows[2].iterations, 31u);
  EXPECT_EQ(rows[0].instance, rows[1].instance);
  const std::string csv = comparison_csv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(csv.find("pbf-twocut"), std::string::npos);

  RunConfig other = b;
  other.instance.seed = 4;
  EXPECT_THROW(compare({a, other}), Error);
  RunConfig tol = b;
  tol.rho = 0.5;
  EXPECT_THROW(compare({a, tol}), Error);
  EXPECT_THROW(compare({a}), Error);
}

TEST(Cli, GenRunAuditRoundTrip) {
  const fs::path dir = scratch_dir("cli");
  const std::string inst = (dir / "pr.json").string();
  EXPECT_EQ(run_cli({"gen", "--generator", "phase_retrieval", "--n-samples", "20", "--dim", "4", "-o", inst}), 0);
  ASSERT_TRUE(fs::exists(inst));
  EXPECT_EQ(run_cli({"run", "--instance", inst, "--solver", "pbf-twocut", "--rho", "1", "--out-dir", dir.string(),
                     "--tag", "t1", "--cert-samples", "500"}),
            0);
  ASSERT_TRUE(fs::exists(dir / "t1.trace.csv"));
  ASSERT_TRUE(fs::exists(dir / "t1.summary.json"));
  ASSERT_TRUE(fs::exists(dir / "t1.audit.json"));
  EXPECT_EQ(run_cli({"audit", (dir / "t1.trace.csv").string()}), 0);

  // same config, same bytes
  EXPECT_EQ(run_cli({"run", "--instance", inst, "--solver", "pbf-twocut", "--rho", "1", "--out-dir", dir.string(),
                     "--tag", "t2", "--cert-samples", "500"}),
            0);
  EXPECT_EQ(slurp(dir / "t1.trace.csv"), slurp(dir / "t2.trace.csv"));
  fs::remove_all(dir);
}

TEST(Cli, ConfigFileAndCompare) {
  const fs::path dir = scratch_dir("cfg");
  const std::string inst = (dir / "pr.json").string();
  ASSERT_EQ(run_cli({"gen", "--n-samples", "20", "--dim", "4", "-o", inst}), 0);
  auto write_cfg = [&](const std::string& name, const std::string& solver) {
    std::ofstream out(dir / name);
    out << "[run]\ninstance = \"" << inst << "\"\nsolver = \"" << solver << "\"\nrho = 1.0\nout-dir = \""
        << dir.string() << "\"\ntag = \"" << solver << "\"\ncert-samples = 500\nps-T = 30\n";
  };
  write_cfg("a.toml", "pbf-multicut");
  write_cfg("b.toml", "ps");
  EXPECT_EQ(run_cli({"--config", (dir / "a.toml").string(), "run"}), 0);
  EXPECT_TRUE(fs::exists(dir / "pbf-multicut.summary.json"));

  const std::string table = (dir / "cmp.csv").string();
  EXPECT_EQ(run_cli({"compare", (dir / "a.toml").string(), (dir / "b.toml").string(), "-o", table}), 0);
  const std::string csv = slurp(table);
  EXPECT_NE(csv.find("pbf-multicut,pbf-multicut"), std::string::npos);
  EXPECT_NE(csv.find("ps,ps"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, MalformedInputExitsOne) {
  const fs::path dir = scratch_dir("bad");
  EXPECT_EQ(run_cli({"run", "--generator", "phase_retrieval", "--solver", "newton", "--rho", "1"}), 1);
  EXPECT_EQ(run_cli({"run", "--generator", "phase_retrieval", "--solver", "ps"}), 1);
  EXPECT_EQ(run_cli({"run", "--instance", (dir / "missing.json").string(), "--rho", "1"}), 1);
  EXPECT_EQ(run_cli({"run", "--rho", "abc"}), 1);
  EXPECT_EQ(run_cli({"frobnicate"}), 1);
  {
    std::ofstream out(dir / "bad.toml");
    out << "[run]\nrho = \"not a number\"\n";
  }
  EXPECT_EQ(run_cli({"--config", (dir / "bad.toml").string(), "run"}), 1);
  EXPECT_EQ(run_cli({"compare", (dir / "bad.toml").string(), (dir / "bad.toml").string()}), 1);
  EXPECT_EQ(run_cli({"audit", (dir / "nothing.csv").string()}), 1);
  fs::remove_all(dir);
}

TEST(Cli, OutputDirFromEnvironment) {
  const fs::path dir = scratch_dir("env");
  ::setenv("PBF_OUTPUT_DIR", dir.string().c_str(), 1);
  EXPECT_EQ(run_cli({"run", "--generator", "phase_retrieval", "--n-samples", "20", "--dim", "4", "--rho", "1",
                     "--tag", "envrun", "--cert-samples", "200"}),
            0);
  ::unsetenv("PBF_OUTPUT_DIR");
  EXPECT_TRUE(fs::exists(dir / "envrun.trace.csv"));
  fs::remove_all(dir);
}
