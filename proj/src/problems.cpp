#include "pbf/problems.hpp"

#include "pbf/rng.hpp"

#include <cmath>
#include <fstream>

namespace pbf {

namespace {

nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec json_vec(const nlohmann::json& j) {
  const auto xs = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

nlohmann::json mat_json(const Mat& A) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(A.size()));
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) flat.push_back(A(i, j));
  return {{"rows", A.rows()}, {"cols", A.cols()}, {"data", flat}};
}

Mat json_mat(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto flat = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols) fail(ErrorKind::Io, "matrix data has the wrong length");
  Mat A(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) A(i, k) = flat[static_cast<std::size_t>(i * cols + k)];
  return A;
}

double bounded_radius(const SimpleTerm& h) {
  const double r = h.domain_radius();
  require(std::isfinite(r), "generated instances need a bounded domain (ball or box)");
  return r;
}

Vec random_point(Rng& rng, int dim, double norm) {
  Vec v = rng.normal_vec(dim);
  return v * (norm / v.norm());
}

void check_constant(const nlohmann::json& j, const char* key, double actual) {
  if (!j.contains(key)) return;
  const double declared = j.at(key).get<double>();
  if (std::abs(declared - actual) > 1e-9 * (1.0 + std::abs(actual)))
    fail(ErrorKind::Io, std::string("declared ") + key + " does not match the instance data");
}

}  // namespace

PhaseRetrievalOracle::PhaseRetrievalOracle(Mat A, Vec b) : A_(std::move(A)), b_(std::move(b)) {
  require(A_.rows() >= 1 && A_.cols() >= 1, "phase retrieval needs at least one sample and one dimension");
  require(b_.size() == A_.rows(), "phase retrieval: b must have one entry per row of A");
}

OracleAnswer PhaseRetrievalOracle::evaluate(const Vec& x) const {
  const Vec Ax = A_ * x;
  const Vec r = Ax.cwiseProduct(Ax) - b_;
  const double n = static_cast<double>(A_.rows());
  Vec s(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) s[i] = r[i] > 0.0 ? 1.0 : (r[i] < 0.0 ? -1.0 : 0.0);
  return {r.cwiseAbs().sum() / n, (2.0 / n) * (A_.transpose() * s.cwiseProduct(Ax))};
}

HybridSyntheticOracle::HybridSyntheticOracle(Mat P, double beta, double weight, Mat C, Vec e)
    : P_(std::move(P)), beta_(beta), weight_(weight), C_(std::move(C)), e_(std::move(e)) {
  require(P_.rows() >= 1 && P_.rows() == P_.cols(), "hybrid synthetic: P must be square");
  require((P_ - P_.transpose()).cwiseAbs().maxCoeff() == 0.0, "hybrid synthetic: P must be symmetric");
  require(C_.rows() == 0 || C_.cols() == P_.rows(), "hybrid synthetic: slope dimension mismatch");
  require(e_.size() == C_.rows(), "hybrid synthetic: one offset per affine piece");
  require(beta_ >= 0.0 && weight_ >= 0.0, "hybrid synthetic: beta and weight must be nonnegative");
}

OracleAnswer HybridSyntheticOracle::evaluate(const Vec& x) const {
  const Vec Px = P_ * x;
  double value = weight_ * (0.5 * x.dot(Px) - beta_ * x.array().cos().sum());
  Vec g = weight_ * (Px + beta_ * x.array().sin().matrix());
  if (C_.rows() > 0) {
    const Vec pieces = C_ * x + e_;
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < pieces.size(); ++j)
      if (pieces[j] > pieces[best]) best = j;
    value += pieces[best];
    g += C_.row(best).transpose();
  }
  return {value, g};
}

SimpleTerm make_domain(int dim, const DomainSpec& d) {
  require(d.radius > 0.0, "domain radius must be positive");
  if (d.kind == "ball") return SimpleTerm::ball(dim, d.radius);
  if (d.kind == "box") return SimpleTerm::box(dim, -d.radius, d.radius);
  fail(ErrorKind::InvalidArgument, "unknown domain kind '" + d.kind + "' (expected ball or box)");
}

Instance make_phase_retrieval(Mat A, Vec b, SimpleTerm h, Vec x0, std::optional<Vec> planted) {
  const double n = static_cast<double>(A.rows());
  const double R = bounded_radius(h);
  const double m = std::max(2.0 / n * A.rowwise().squaredNorm().sum(), kMinModulus);
  const double smax = Eigen::JacobiSVD<Mat>(A).singularValues()[0];
  const double M = 2.0 / n * smax * smax * R;
  auto f = std::make_shared<PhaseRetrievalOracle>(std::move(A), std::move(b));
  Instance inst{Problem(f, std::move(h), m, M, 0.0, 0.0), "", "phase_retrieval", 0, 0.0, std::move(x0),
                std::move(planted), nlohmann::json::object()};
  inst.problem.require_domain(inst.x0);
  inst.params["m_rule"] = "(2/n) sum ||a_i||^2";
  inst.params["M_rule"] = "(2/n) sigma_max(A)^2 sup ||x|| over dom h";
  return inst;
}

Instance gen_phase_retrieval(int n_samples, int dim, std::uint64_t seed, double noise, const DomainSpec& domain) {
  require(n_samples >= 1 && dim >= 1, "phase retrieval needs n_samples, dim >= 1");
  require(noise >= 0.0, "noise must be nonnegative");
  Rng rng(seed);
  Mat A(n_samples, dim);
  for (int i = 0; i < n_samples; ++i) A.row(i) = rng.normal_vec(dim).transpose();
  const Vec planted = random_point(rng, dim, 1.0);
  Vec b(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const double p = A.row(i).dot(planted);
    b[i] = p * p + (noise > 0.0 ? noise * rng.normal() : 0.0);
  }
  const Vec x0 = random_point(rng, dim, 1.0);
  SimpleTerm h = make_domain(dim, domain);
  Instance inst = make_phase_retrieval(std::move(A), std::move(b), std::move(h), x0, planted);
  inst.name = "phase_retrieval_n" + std::to_string(n_samples) + "_d" + std::to_string(dim) + "_s" +
              std::to_string(seed);
  inst.seed = seed;
  inst.params["n_samples"] = n_samples;
  inst.params["dim"] = dim;
  inst.params["noise"] = noise;
  inst.params["domain"] = {{"kind", domain.kind}, {"radius", domain.radius}};
  return inst;
}

Instance make_hybrid_synthetic(Mat P, double beta, double weight, Mat C, Vec e, SimpleTerm h, Vec x0) {
  const double R = bounded_radius(h);
  const Eigen::SelfAdjointEigenSolver<Mat> es(P, Eigen::EigenvaluesOnly);
  const double dmin = es.eigenvalues().minCoeff();
  const double dmax = es.eigenvalues().maxCoeff();
  // the Hessian of the smooth part lies in weight * [dmin - beta, dmax + beta]
  const double m = std::max(weight * std::max(0.0, beta - dmin), kMinModulus);
  const double L = weight * std::max(std::abs(dmin - beta), std::abs(dmax + beta));
  double M = 0.0;
  for (Eigen::Index j = 0; j < C.rows(); ++j)
    for (Eigen::Index k = j + 1; k < C.rows(); ++k) M = std::max(M, 0.5 * (C.row(j) - C.row(k)).norm());

  const auto dim = static_cast<double>(P.rows());
  double lower = weight * (0.5 * std::min(dmin, 0.0) * R * R - beta * dim);
  if (C.rows() > 0) {
    double piece = -kInf;
    for (Eigen::Index j = 0; j < C.rows(); ++j) piece = std::max(piece, e[j] - C.row(j).norm() * R);
    lower += piece;
  }

  auto f = std::make_shared<HybridSyntheticOracle>(std::move(P), beta, weight, std::move(C), std::move(e));
  Instance inst{Problem(f, std::move(h), m, M, L, lower), "", "hybrid_synthetic", 0, lower, std::move(x0),
                std::nullopt, nlohmann::json::object()};
  inst.problem.require_domain(inst.x0);
  inst.params["m_rule"] = "weight * max(0, beta - lambda_min(P)), floored at 1e-6";
  inst.params["L_rule"] = "weight * max(|lambda_min(P) - beta|, |lambda_max(P) + beta|)";
  inst.params["M_rule"] = "max_{j,k} ||c_j - c_k|| / 2";
  return inst;
}

Instance gen_hybrid_synthetic(int dim, std::uint64_t seed, double smooth_weight, int kink_count,
                              const DomainSpec& domain) {
  require(dim >= 1, "hybrid synthetic needs dim >= 1");
  require(kink_count >= 0 && smooth_weight >= 0.0, "kink_count and smooth_weight must be nonnegative");
  Rng rng(seed);
  Mat G(dim, dim);
  for (int i = 0; i < dim; ++i) G.row(i) = rng.normal_vec(dim).transpose();
  const Mat Q = Eigen::HouseholderQR<Mat>(G).householderQ();
  const Vec d = rng.uniform_vec(dim, -1.0, 1.0);
  const Mat QDQ = Q * d.asDiagonal() * Q.transpose();
  Mat P = 0.5 * (QDQ + QDQ.transpose());
  Mat C(kink_count, dim);
  Vec e(kink_count);
  for (int j = 0; j < kink_count; ++j) {
    C.row(j) = rng.normal_vec(dim).transpose() / std::sqrt(static_cast<double>(dim));
    e[j] = rng.uniform(-1.0, 1.0);
  }
  SimpleTerm h = make_domain(dim, domain);
  const Vec x0 = random_point(rng, dim, 0.5 * domain.radius);
  Instance inst = make_hybrid_synthetic(std::move(P), 1.0, smooth_weight, std::move(C), std::move(e), std::move(h), x0);
  inst.name = "hybrid_synthetic_d" + std::to_string(dim) + "_k" + std::to_string(kink_count) + "_s" +
              std::to_string(seed);
  inst.seed = seed;
  inst.params["dim"] = dim;
  inst.params["smooth_weight"] = smooth_weight;
  inst.params["kink_count"] = kink_count;
  inst.params["domain"] = {{"kind", domain.kind}, {"radius", domain.radius}};
  return inst;
}

nlohmann::json to_json(const Instance& inst) {
  nlohmann::json j;
  j["name"] = inst.name;
  j["seed"] = inst.seed;
  j["generator"] = inst.generator;
  j["params"] = inst.params;
  j["h"] = inst.problem.h().to_json();
  j["constants"] = {{"m", inst.problem.m()}, {"M", inst.problem.M()}, {"L", inst.problem.L()}};
  j["known_phi_star_lower"] = inst.known_phi_star_lower;
  j["x0"] = vec_json(inst.x0);
  if (inst.planted) j["planted"] = vec_json(*inst.planted);

  nlohmann::json data;
  if (const auto* pr = dynamic_cast<const PhaseRetrievalOracle*>(&inst.problem.f())) {
    data["A"] = mat_json(pr->A());
    data["b"] = vec_json(pr->b());
  } else if (const auto* hs = dynamic_cast<const HybridSyntheticOracle*>(&inst.problem.f())) {
    data["P"] = mat_json(hs->P());
    data["beta"] = hs->beta();
    data["weight"] = hs->weight();
    data["C"] = mat_json(hs->C());
    data["e"] = vec_json(hs->e());
  } else {
    fail(ErrorKind::InvalidArgument, "instance oracle cannot be serialized");
  }
  j["data"] = data;
  return j;
}

Instance instance_from_json(const nlohmann::json& j) {
  try {
    const std::string gen = j.at("generator").get<std::string>();
    const nlohmann::json& data = j.at("data");
    SimpleTerm h = SimpleTerm::from_json(j.at("h"));
    Vec x0 = json_vec(j.at("x0"));
    std::optional<Instance> inst;
    if (gen == "phase_retrieval") {
      std::optional<Vec> planted;
      if (j.contains("planted")) planted = json_vec(j.at("planted"));
      inst = make_phase_retrieval(json_mat(data.at("A")), json_vec(data.at("b")), std::move(h), std::move(x0),
                                  std::move(planted));
    } else if (gen == "hybrid_synthetic") {
      inst = make_hybrid_synthetic(json_mat(data.at("P")), data.at("beta").get<double>(),
                                   data.at("weight").get<double>(), json_mat(data.at("C")), json_vec(data.at("e")),
                                   std::move(h), std::move(x0));
    } else {
      fail(ErrorKind::Io, "unknown instance generator '" + gen + "'");
    }
    inst->name = j.value("name", "");
    inst->seed = j.value("seed", std::uint64_t{0});
    if (j.contains("params")) inst->params = j.at("params");
    if (j.contains("constants")) {
      const auto& c = j.at("constants");
      check_constant(c, "m", inst->problem.m());
      check_constant(c, "M", inst->problem.M());
      check_constant(c, "L", inst->problem.L());
    }
    if (j.contains("known_phi_star_lower")) {
      // the file's bound replaces the generic one
      inst->known_phi_star_lower = j.at("known_phi_star_lower").get<double>();
      const Problem& p = inst->problem;
      inst->problem = Problem(p.f_ptr(), p.h(), p.m(), p.M(), p.L(), inst->known_phi_star_lower);
    }
    return std::move(*inst);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Io, std::string("malformed instance file: ") + e.what());
  }
}

void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << to_json(inst).dump(1) << '\n';
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Io, "malformed instance file " + path + ": " + e.what());
  }
  return instance_from_json(j);
}

ConstantCheck verify_instance(const Instance& inst, std::size_t pairs, std::uint64_t seed) {
  const double R = inst.problem.h().domain_radius();
  return check_declared_constants(inst.problem, Vec::Zero(inst.problem.dimension()), R, pairs, seed);
}

}  // namespace pbf
