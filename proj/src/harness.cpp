#include "pbf/harness.hpp"

#include "pbf/baseline_ps.hpp"
#include "pbf/pbf.hpp"
#include "pbf/stationarity.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

namespace pbf {

namespace {

std::string fmt(double x) { return std::isnan(x) ? "" : format_double(x); }

template <typename T>
std::string fmt_opt(const std::optional<T>& x) {
  if (!x) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(*x);
  } else {
    return std::to_string(*x);
  }
}

nlohmann::json opt_json(const std::optional<double>& x) { return x ? nlohmann::json(*x) : nlohmann::json(); }

// Writes trace rows to the file and/or the capture string.
class TraceWriter {
 public:
  TraceWriter(const std::string& path, std::string* capture) : capture_(capture) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) fail(ErrorKind::Io, "cannot write " + path);
    }
  }
  ~TraceWriter() {
    if (capture_) *capture_ = buffer_.str();
  }

  void header(const TraceHeader& h) {
    if (file_.is_open()) write_trace_header(file_, h);
    if (capture_) write_trace_header(buffer_, h);
  }
  void row(const TraceRow& r) {
    if (file_.is_open()) write_trace_row(file_, r);
    if (capture_) write_trace_row(buffer_, r);
  }

 private:
  std::ofstream file_;
  std::ostringstream buffer_;
  std::string* capture_;
};

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << j.dump(2) << '\n';
}

// The envelope value at x0 is bounded above by both phi(x0) and the oracle's
// objective value at its approximate prox point.
double moreau_upper_bound(const Problem& problem, double lambda, const Vec& x0) {
  const double phi0 = problem.phi(x0);
  try {
    return std::min(phi0, moreau_oracle(problem, lambda, x0).envelope);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::MoreauNotConverged) throw;
    return phi0;
  }
}

TraceHeader common_header(const RunConfig& cfg, const Instance& inst, const Problem& prob) {
  return {{"solver", to_string(cfg.solver)},
          {"instance", inst.name},
          {"generator", inst.generator},
          {"instance_seed", std::to_string(inst.seed)},
          {"dim", std::to_string(prob.dimension())},
          {"h", prob.h().name()},
          {"m", format_double(prob.m())},
          {"M", format_double(prob.M())},
          {"L", format_double(prob.L())},
          {"phi_lower", fmt_opt(prob.phi_lower_hint())},
          {"rho", fmt_opt(cfg.rho)}};
}

nlohmann::json instance_json(const Instance& inst, const Problem& prob) {
  return {{"name", inst.name},
          {"generator", inst.generator},
          {"seed", inst.seed},
          {"dim", prob.dimension()},
          {"m", prob.m()},
          {"M", prob.M()},
          {"L", prob.L()},
          {"phi_lower", opt_json(prob.phi_lower_hint())}};
}

struct Measured {
  std::optional<MoreauCert> cert;
  std::string error;
};

Measured measure_moreau(const Problem& prob, const Vec& x) {
  Measured out;
  try {
    out.cert = moreau_oracle(prob, 1.0 / prob.m(), x);
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

RunOutcome execute_pbf(const RunConfig& cfg, const Instance& inst, const Problem& prob, const std::string& trace_path,
                       std::string* trace_text) {
  RunOutcome out;
  const Tolerances tol = cfg.rho ? corollary_preset(*cfg.rho, prob.m()) : Tolerances{*cfg.eta_bar, *cfg.eps_bar};
  const PbfParams params = derive_params(prob, tol.eta_bar, tol.eps_bar, cfg.lambda, cfg.gamma_chi);

  std::optional<ComplexityBudget> budget;
  if (prob.phi_lower_hint()) {
    budget = complexity_budget(params, prob, moreau_upper_bound(prob, params.lambda, inst.x0));
  }

  RunOptions opt;
  opt.scheme = cfg.solver == Solver::PbfOneCut ? BundleScheme::OneCut
               : cfg.solver == Solver::PbfTwoCut ? BundleScheme::TwoCut
                                                 : BundleScheme::MultiCut;
  opt.reset = parse_reset_policy(cfg.reset);
  if (cfg.max_cuts) opt.max_cuts = *cfg.max_cuts;
  opt.subproblem_tol = cfg.subproblem_tol;
  opt.max_total_iters = cfg.max_iters;
  opt.budget = budget;
  opt.audit = cfg.audit;
  opt.timing = cfg.timing;

  TraceHeader header = common_header(cfg, inst, prob);
  const std::pair<std::string, std::string> rest[] = {
      {"scheme", to_string(opt.scheme)},
      {"reset", to_string(opt.reset)},
      {"max_cuts", fmt_opt(opt.max_cuts)},
      {"subproblem_tol", fmt_opt(cfg.subproblem_tol)},
      {"audit_mode", to_string(cfg.audit)},
      {"lambda", format_double(params.lambda)},
      {"chi", format_double(params.chi)},
      {"tau", format_double(params.tau)},
      {"delta", format_double(params.delta)},
      {"eta_bar", format_double(params.eta_bar)},
      {"eps_bar", format_double(params.eps_bar)},
      {"m_tilde", format_double(params.m_tilde)},
      {"alpha", format_double(params.alpha)},
      {"N", format_double(params.N)},
      {"moreau_at_x0", budget ? format_double(budget->moreau_at_x0) : ""},
      {"budget_K", budget ? format_double(budget->K) : ""},
      {"budget_t_bar", budget ? format_double(budget->t_bar) : ""},
      {"budget_iterations", budget ? std::to_string(budget->iterations) : ""},
      {"max_iters", fmt_opt(cfg.max_iters)},
  };
  header.insert(header.end(), std::begin(rest), std::end(rest));

  TraceWriter writer(trace_path, trace_text);
  writer.header(header);
  opt.sink = [&](const TraceRow& r) { writer.row(r); };
  const RunResult res = run_pbf(prob, params, inst.x0, opt);

  nlohmann::json& s = out.summary;
  s["solver"] = to_string(cfg.solver);
  s["instance"] = instance_json(inst, prob);
  s["params"] = {{"lambda", params.lambda}, {"chi", params.chi},         {"tau", params.tau},
                 {"delta", params.delta},   {"eta_bar", params.eta_bar}, {"eps_bar", params.eps_bar},
                 {"m_tilde", params.m_tilde}, {"alpha", params.alpha},   {"N", params.N},
                 {"rho", opt_json(cfg.rho)}};
  if (budget) {
    s["budget"] = {{"moreau_at_x0", budget->moreau_at_x0}, {"phi_lower", budget->phi_lower},
                   {"K", budget->K},                       {"t_bar", budget->t_bar},
                   {"zeta", budget->zeta},                 {"beta1", budget->beta1},
                   {"beta2", budget->beta2},               {"iterations", budget->iterations}};
  } else {
    s["budget"] = nullptr;
  }
  s["status"] = to_string(res.status);
  s["iterations"] = res.iterations;
  s["serious_steps"] = res.serious_steps;
  s["oracle_calls"] = res.oracle_calls;
  s["max_total_iters"] = res.max_total_iters;
  if (budget) s["within_budget"] = res.iterations <= budget->iterations;

  nlohmann::json audit = checks_to_json(res.audit);
  bool violations = false;
  for (const CheckResult& c : res.audit) violations = violations || c.violations > 0;

  const std::optional<SeriousRecord>& rec = res.terminal ? res.terminal : res.best;
  double measured_grad = kNaN;
  if (rec) {
    const RegularizedCert cert{rec->y_hat, rec->w_hat, rec->eps_hat, prob.m()};
    nlohmann::json cj = to_json(cert);
    cj["source"] = res.terminal ? "terminal" : "best";
    cj["k"] = rec->k;
    cj["j"] = rec->j;
    s["certificate"] = cj;

    const double moreau_bound = regularized_to_moreau_bound(cert);
    nlohmann::json conv;
    conv["moreau_bound"] = moreau_bound;
    try {
      const DirectionalCert d = regularized_to_directional(prob, cert);
      conv["directional"] = to_json(d);
      conv["directional_moreau_bound"] = directional_to_moreau(d, 1.0 / prob.m(), prob.m());
    } catch (const Error& e) {
      conv["directional"] = {{"error", e.what()}};
    }
    s["conversions"] = conv;

    const InclusionCheck inc = check_regularized(prob, cert, cfg.cert_samples, cfg.seed);
    s["inclusion_check"] = {{"samples", inc.samples}, {"violations", inc.violations}, {"worst", inc.worst}};
    audit.push_back({{"check", "certificate-inclusion"},
                     {"status", inc.violations > 0 ? "fail" : "pass"},
                     {"checked", inc.samples},
                     {"violations", inc.violations}});
    violations = violations || inc.violations > 0;

    if (cfg.verify_moreau) {
      const Measured mm = measure_moreau(prob, cert.x);
      if (mm.cert) {
        measured_grad = mm.cert->grad_norm;
        s["measured_moreau"] = to_json(*mm.cert);
        // 5% slack absorbs the oracle's own error
        const bool ok = measured_grad <= moreau_bound * 1.05;
        audit.push_back({{"check", "moreau-bound"},
                         {"status", ok ? "pass" : "fail"},
                         {"measured", measured_grad},
                         {"bound", moreau_bound},
                         {"slack", 0.05}});
        violations = violations || !ok;
        if (cfg.rho) s["measured_moreau"]["within_rho"] = measured_grad <= *cfg.rho;
      } else {
        s["measured_moreau"] = {{"error", mm.error}};
      }
    }
  } else {
    s["certificate"] = nullptr;
  }

  out.audit = audit;
  out.exit_code = violations ? 2 : (res.status == RunStatus::Converged ? 0 : 3);
  if (res.status == RunStatus::AuditFailed) out.exit_code = 2;
  s["exit_code"] = out.exit_code;

  out.row.solver = to_string(cfg.solver);
  out.row.instance = inst.name;
  out.row.status = to_string(res.status);
  out.row.iterations = res.iterations;
  out.row.serious_steps = res.serious_steps;
  out.row.oracle_calls = res.oracle_calls;
  out.row.moreau_grad = measured_grad;
  if (budget) out.row.budget = budget->iterations;
  return out;
}

RunOutcome execute_ps(const RunConfig& cfg, const Instance& inst, const Problem& prob, const std::string& trace_path,
                      std::string* trace_text) {
  RunOutcome out;
  const double m = prob.m();
  const double gamma = cfg.ps_gamma.value_or(1.0 / (2.0 * m));
  std::optional<double> moreau0;
  std::uint64_t T = 0;
  bool truncated = false;
  if (cfg.ps_T) {
    T = *cfg.ps_T;
  } else {
    require(cfg.rho.has_value(), "ps needs ps_T or rho to fix the iteration count");
    moreau0 = moreau_upper_bound(prob, 1.0 / m, inst.x0);
    T = ps_iteration_count(prob, *cfg.rho, gamma, *moreau0);
  }
  if (cfg.max_iters && T > *cfg.max_iters) {
    T = *cfg.max_iters;
    truncated = true;
  }
  const PsParams params = make_ps_params(prob, T, gamma);

  TraceHeader header = common_header(cfg, inst, prob);
  const std::pair<std::string, std::string> rest[] = {
      {"gamma", format_double(params.gamma)},
      {"T", std::to_string(params.T)},
      {"m_bar", format_double(params.m_bar)},
      {"stepsize", format_double(params.stepsize())},
      {"moreau_at_x0", moreau0 ? format_double(*moreau0) : ""},
      {"truncated", truncated ? "1" : "0"},
  };
  header.insert(header.end(), std::begin(rest), std::end(rest));

  TraceWriter writer(trace_path, trace_text);
  writer.header(header);
  PsOptions opt;
  opt.moreau_every = cfg.ps_moreau_every;
  opt.sink = [&](const TraceRow& r) { writer.row(r); };
  const PsResult res = ps_run(prob, params, inst.x0, opt);

  nlohmann::json& s = out.summary;
  s["solver"] = to_string(cfg.solver);
  s["instance"] = instance_json(inst, prob);
  s["params"] = {{"gamma", params.gamma}, {"T", params.T}, {"m_bar", params.m_bar},
                 {"stepsize", params.stepsize()}, {"rho", opt_json(cfg.rho)}, {"truncated", truncated}};
  s["status"] = "completed";
  s["iterations"] = params.T + 1;
  s["serious_steps"] = nullptr;
  s["oracle_calls"] = res.oracle_calls;
  if (res.best_moreau_grad) s["best_sampled_moreau"] = {{"grad_norm", *res.best_moreau_grad}, {"t", *res.best_index}};

  const Vec& output = res.best_index ? res.iterates[*res.best_index] : res.iterates.back();
  double measured_grad = res.best_moreau_grad.value_or(kNaN);
  if (cfg.verify_moreau) {
    const Measured mm = measure_moreau(prob, output);
    if (mm.cert) {
      measured_grad = mm.cert->grad_norm;
      s["measured_moreau"] = to_json(*mm.cert);
      if (cfg.rho) s["measured_moreau"]["within_rho"] = measured_grad <= *cfg.rho;
    } else {
      s["measured_moreau"] = {{"error", mm.error}};
    }
  }

  nlohmann::json audit = nlohmann::json::array();
  bool violations = false;
  if (prob.L() > 0.0) {
    audit.push_back({{"check", "ps-averaged-moreau"}, {"status", "inapplicable"}, {"note", "inapplicable (L>0)"}});
  } else if (params.T > cfg.ps_audit_max_T) {
    audit.push_back({{"check", "ps-averaged-moreau"},
                     {"status", "skipped"},
                     {"note", "T above ps_audit_max_T = " + std::to_string(cfg.ps_audit_max_T)}});
  } else {
    const PsAudit a = ps_audit(prob, params, res.iterates);
    audit.push_back(to_json(a));
    violations = a.applicable && !a.passed;
  }
  out.audit = audit;
  out.exit_code = violations ? 2 : 0;
  s["exit_code"] = out.exit_code;

  out.row.solver = to_string(cfg.solver);
  out.row.instance = inst.name;
  out.row.status = "completed";
  out.row.iterations = params.T + 1;
  out.row.oracle_calls = res.oracle_calls;
  out.row.moreau_grad = measured_grad;
  return out;
}

std::string instance_key(const Instance& inst) { return to_json(inst).dump(); }

}  // namespace

std::string to_string(Solver s) {
  switch (s) {
    case Solver::PbfOneCut: return "pbf-onecut";
    case Solver::PbfTwoCut: return "pbf-twocut";
    case Solver::PbfMultiCut: return "pbf-multicut";
    case Solver::Ps: return "ps";
  }
  return "?";
}

Solver parse_solver(const std::string& s) {
  if (s == "pbf-onecut") return Solver::PbfOneCut;
  if (s == "pbf-twocut") return Solver::PbfTwoCut;
  if (s == "pbf-multicut") return Solver::PbfMultiCut;
  if (s == "ps") return Solver::Ps;
  fail(ErrorKind::InvalidArgument, "unknown solver '" + s + "' (expected pbf-onecut, pbf-twocut, pbf-multicut or ps)");
}

Instance load_or_generate(const InstanceSpec& spec) {
  if (!spec.path.empty()) return load_instance(spec.path);
  if (spec.generator == "phase_retrieval")
    return gen_phase_retrieval(spec.n_samples, spec.dim, spec.seed, spec.noise, spec.domain);
  if (spec.generator == "hybrid_synthetic")
    return gen_hybrid_synthetic(spec.dim, spec.seed, spec.smooth_weight, spec.kink_count, spec.domain);
  if (spec.generator.empty()) fail(ErrorKind::InvalidArgument, "no instance: give an instance file or a generator");
  fail(ErrorKind::InvalidArgument, "unknown generator '" + spec.generator + "'");
}

void validate(const RunConfig& cfg) {
  const bool pair = cfg.eta_bar.has_value() || cfg.eps_bar.has_value();
  if (cfg.rho && pair) fail(ErrorKind::InvalidArgument, "give either rho or (eta_bar, eps_bar), not both");
  if (pair && !(cfg.eta_bar && cfg.eps_bar)) fail(ErrorKind::InvalidArgument, "eta_bar and eps_bar go together");
  if (cfg.solver == Solver::Ps) {
    if (!cfg.rho && !cfg.ps_T) fail(ErrorKind::InvalidArgument, "ps needs rho or ps_T");
  } else if (!cfg.rho && !pair) {
    fail(ErrorKind::InvalidArgument, "missing tolerance: give rho or (eta_bar, eps_bar)");
  }
  if (cfg.rho) require(*cfg.rho > 0.0, "rho must be positive");
  if (cfg.eta_bar) require(*cfg.eta_bar > 0.0 && *cfg.eps_bar > 0.0, "tolerances must be positive");
}

std::string resolve_out_dir(const std::string& configured) {
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv("PBF_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

RunOutcome execute(const RunConfig& cfg, std::string* trace_text) {
  validate(cfg);
  const Instance inst = load_or_generate(cfg.instance);
  Problem prob = inst.problem;
  if (cfg.phi_lower) prob = Problem(prob.f_ptr(), prob.h(), prob.m(), prob.M(), prob.L(), *cfg.phi_lower);

  const std::string stem = cfg.tag.empty() ? inst.name + "_" + to_string(cfg.solver) : cfg.tag;
  std::string trace_path;
  std::filesystem::path dir;
  if (cfg.write_files) {
    dir = resolve_out_dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    trace_path = (dir / (stem + ".trace.csv")).string();
  }
  RunOutcome out = cfg.solver == Solver::Ps ? execute_ps(cfg, inst, prob, trace_path, trace_text)
                                            : execute_pbf(cfg, inst, prob, trace_path, trace_text);
  out.row.label = stem;
  out.row.exit_code = out.exit_code;
  if (cfg.write_files) {
    out.trace_path = trace_path;
    out.summary_path = (dir / (stem + ".summary.json")).string();
    out.audit_path = (dir / (stem + ".audit.json")).string();
    write_json(out.summary_path, out.summary);
    write_json(out.audit_path, out.audit);
  }
  return out;
}

std::vector<RunSummaryRow> compare(const std::vector<RunConfig>& configs) {
  require(configs.size() >= 2, "compare needs at least two configurations");
  const RunConfig& first = configs.front();
  const std::string key = instance_key(load_or_generate(first.instance));
  for (const RunConfig& c : configs) {
    validate(c);
    if (c.rho != first.rho || c.eta_bar != first.eta_bar || c.eps_bar != first.eps_bar)
      fail(ErrorKind::InvalidArgument, "compare: configurations use different tolerances");
    if (instance_key(load_or_generate(c.instance)) != key)
      fail(ErrorKind::InvalidArgument, "compare: configurations use different instances");
  }
  std::vector<std::future<RunOutcome>> jobs;
  jobs.reserve(configs.size());
  for (const RunConfig& c : configs) jobs.push_back(std::async(std::launch::async, [&c] { return execute(c); }));
  std::vector<RunSummaryRow> rows;
  for (auto& j : jobs) rows.push_back(j.get().row);
  return rows;
}

std::string comparison_csv(const std::vector<RunSummaryRow>& rows) {
  std::ostringstream out;
  out << "label,solver,instance,status,iterations,serious_steps,oracle_calls,moreau_grad,budget_iterations,"
         "within_budget\n";
  for (const RunSummaryRow& r : rows) {
    out << r.label << ',' << r.solver << ',' << r.instance << ',' << r.status << ',' << r.iterations << ','
        << (r.solver == "ps" ? "" : std::to_string(r.serious_steps)) << ',' << r.oracle_calls << ','
        << fmt(r.moreau_grad) << ',' << fmt_opt(r.budget) << ','
        << (r.budget ? (r.iterations <= *r.budget ? "1" : "0") : "") << '\n';
  }
  return out.str();
}

}  // namespace pbf
