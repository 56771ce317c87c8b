#include "pbf/harness.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace pbf {

namespace {

void add_instance_options(CLI::App& app, InstanceSpec& spec) {
  const char* group = "Instance";
  app.add_option("--generator", spec.generator, "phase_retrieval or hybrid_synthetic")->group(group);
  app.add_option("--n-samples", spec.n_samples, "phase retrieval sample count")->group(group);
  app.add_option("--dim", spec.dim)->group(group);
  app.add_option("--gen-seed", spec.seed, "generator seed")->group(group);
  app.add_option("--noise", spec.noise)->group(group);
  app.add_option("--smooth-weight", spec.smooth_weight)->group(group);
  app.add_option("--kink-count", spec.kink_count)->group(group);
  app.add_option("--domain", spec.domain.kind, "ball or box")->group(group);
  app.add_option("--radius", spec.domain.radius)->group(group);
}

struct RunFlags {
  RunConfig cfg;
  std::string solver = "pbf-multicut";
  std::string audit = "warn";
};

void add_run_options(CLI::App& run, RunFlags& f) {
  RunConfig& c = f.cfg;
  run.add_option("--instance", c.instance.path, "instance JSON file");
  add_instance_options(run, c.instance);
  run.add_option("--solver", f.solver, "pbf-onecut, pbf-twocut, pbf-multicut or ps");
  run.add_option("--rho", c.rho, "target Moreau stationarity; sets eta_bar and eps_bar");
  run.add_option("--eta-bar", c.eta_bar);
  run.add_option("--eps-bar", c.eps_bar);
  run.add_option("--lambda", c.lambda)->group("Overrides");
  run.add_option("--gamma-chi", c.gamma_chi)->group("Overrides");
  run.add_option("--max-cuts", c.max_cuts)->group("Overrides");
  run.add_option("--reset", c.reset, "fresh or shifted-max")->group("Overrides");
  run.add_option("--subproblem-tol", c.subproblem_tol)->group("Overrides");
  run.add_option("--audit-mode", f.audit, "off, warn or fail")->group("Overrides");
  run.add_option("--max-iters", c.max_iters, "cap on total iterations (PS: on T)")->group("Overrides");
  run.add_option("--phi-lower", c.phi_lower, "lower bound on phi*")->group("Overrides");
  run.add_option("--ps-T", c.ps_T)->group("PS");
  run.add_option("--ps-gamma", c.ps_gamma)->group("PS");
  run.add_option("--ps-moreau-every", c.ps_moreau_every)->group("PS");
  run.add_option("--ps-audit-max-T", c.ps_audit_max_T)->group("PS");
  run.add_flag("--verify-moreau", c.verify_moreau, "measure the Moreau gradient at the output point");
  run.add_option("--cert-samples", c.cert_samples, "samples for the certificate inclusion check");
  run.add_option("--seed", c.seed, "seed for the sampled checks");
  run.add_flag("--timing", c.timing, "record wall time (traces are then not reproducible)");
  run.add_option("--out-dir", c.out_dir, "output directory (default $PBF_OUTPUT_DIR or .)");
  run.add_option("--tag", c.tag, "output file prefix");
}

RunConfig finish(RunFlags& f) {
  f.cfg.solver = parse_solver(f.solver);
  f.cfg.audit = parse_audit_mode(f.audit);
  validate(f.cfg);
  return f.cfg;
}

// A comparison entry is a config file with a [run] section.
RunConfig parse_config_file(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::Io, "config file not found: " + path);
  CLI::App app;
  app.set_config("--config");
  RunFlags f;
  add_run_options(*app.add_subcommand("run"), f);
  // CLI11 takes the arguments in reverse order
  std::vector<std::string> args = {"run", path, "--config"};
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    fail(ErrorKind::InvalidArgument, path + ": " + e.what());
  }
  return finish(f);
}

int exit_code_of(const std::vector<RunSummaryRow>& rows) {
  int code = 0;
  for (const RunSummaryRow& r : rows) {
    if (r.exit_code != 0 && (code == 0 || r.exit_code < code)) code = r.exit_code;
  }
  return code;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Proximal bundle framework for hybrid weakly convex problems"};
  app.set_config("--config", "", "config file (TOML/INI with [run], [gen] sections)");
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "solve one instance and write trace, summary and audit report");
  add_run_options(*run, run_flags);

  std::vector<std::string> compare_files;
  std::string compare_out;
  CLI::App* cmp = app.add_subcommand("compare", "run several configs on one instance and tabulate");
  cmp->add_option("configs", compare_files, "config files, each with a [run] section")->required()->expected(2, -1);
  cmp->add_option("-o,--out", compare_out, "CSV output path (default stdout)");

  InstanceSpec gen_spec;
  gen_spec.generator = "phase_retrieval";
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen", "generate an instance file");
  add_instance_options(*gen, gen_spec);
  gen->add_option("-o,--out", gen_out, "output path (default <out-dir>/<name>.json)");

  std::string trace_file;
  CLI::App* aud = app.add_subcommand("audit", "re-check the inequalities on a trace file");
  aud->add_option("trace", trace_file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      const RunOutcome out = execute(finish(run_flags));
      std::cout << out.summary.dump(2) << '\n';
      if (!out.trace_path.empty()) std::cerr << "trace: " << out.trace_path << '\n';
      return out.exit_code;
    }
    if (cmp->parsed()) {
      std::vector<RunConfig> configs;
      for (const std::string& p : compare_files) configs.push_back(parse_config_file(p));
      const std::vector<RunSummaryRow> rows = compare(configs);
      const std::string csv = comparison_csv(rows);
      if (compare_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(compare_out);
        if (!out) fail(ErrorKind::Io, "cannot write " + compare_out);
        out << csv;
      }
      return exit_code_of(rows);
    }
    if (gen->parsed()) {
      const Instance inst = load_or_generate(gen_spec);
      std::string path = gen_out;
      if (path.empty()) {
        const std::filesystem::path dir = resolve_out_dir("");
        std::filesystem::create_directories(dir);
        path = (dir / (inst.name + ".json")).string();
      }
      save_instance(inst, path);
      std::cout << path << '\n';
      return 0;
    }
    if (aud->parsed()) {
      const TraceFile trace = read_trace_file(trace_file);
      if (trace.get("solver").value_or("") == "ps") {
        std::cout << R"([{"check": "per-iteration", "status": "inapplicable", "note": "PS trace"}])" << '\n';
        return 0;
      }
      const std::vector<CheckResult> checks = audit_trace(trace);
      std::cout << checks_to_json(checks).dump(2) << '\n';
      for (const CheckResult& c : checks)
        if (c.violations > 0) return 2;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace pbf
