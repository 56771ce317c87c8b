#include "pbf/simple_terms.hpp"

#include <algorithm>
#include <cmath>

namespace pbf {

namespace {

constexpr double kMembershipTol = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

nlohmann::json bound_to_json(const Vec& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      arr.push_back(v[i]);
    } else {
      arr.push_back(nullptr);  // +-inf, sign implied by lower/upper
    }
  }
  return arr;
}

Vec bound_from_json(const nlohmann::json& arr, double infinite_value) {
  Vec v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = arr[i].is_null() ? infinite_value : arr[i].get<double>();
  }
  return v;
}

Vec vec_from_json(const nlohmann::json& arr) {
  Vec v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

}  // namespace

SimpleTerm SimpleTerm::zero(int dim) {
  require(dim > 0, "dimension must be positive");
  return SimpleTerm(dim, Zero{});
}

SimpleTerm SimpleTerm::l1(int dim, double weight) {
  require(dim > 0, "dimension must be positive");
  require(weight >= 0.0 && std::isfinite(weight), "L1 weight must be finite and nonnegative");
  return SimpleTerm(dim, L1{weight});
}

SimpleTerm SimpleTerm::box(Vec lower, Vec upper) {
  require(lower.size() > 0 && lower.size() == upper.size(), "box bounds must have equal positive size");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    require(!std::isnan(lower[i]) && !std::isnan(upper[i]), "box bounds must not be NaN");
    require(lower[i] <= upper[i], "box requires lower <= upper");
    require(lower[i] < kInf && upper[i] > -kInf, "box bounds make the domain empty");
  }
  const int dim = static_cast<int>(lower.size());
  return SimpleTerm(dim, Box{std::move(lower), std::move(upper)});
}

SimpleTerm SimpleTerm::box(int dim, double lower, double upper) {
  require(dim > 0, "dimension must be positive");
  return box(Vec::Constant(dim, lower), Vec::Constant(dim, upper));
}

SimpleTerm SimpleTerm::ball(Vec center, double radius) {
  require(center.size() > 0, "ball center must be nonempty");
  require(radius > 0.0 && std::isfinite(radius), "ball radius must be positive and finite");
  const int dim = static_cast<int>(center.size());
  return SimpleTerm(dim, Ball{std::move(center), radius});
}

SimpleTerm SimpleTerm::ball(int dim, double radius) {
  require(dim > 0, "dimension must be positive");
  return ball(Vec::Zero(dim), radius);
}

bool SimpleTerm::is_indicator() const {
  return std::holds_alternative<Box>(term_) || std::holds_alternative<Ball>(term_);
}

std::string SimpleTerm::name() const {
  return std::visit(overloaded{[](const Zero&) { return std::string("zero"); },
                               [](const L1&) { return std::string("l1"); },
                               [](const Box&) { return std::string("box"); },
                               [](const Ball&) { return std::string("ball"); }},
                    term_);
}

bool SimpleTerm::contains(const Vec& u) const {
  if (u.size() != dim_) return false;
  return std::visit(overloaded{[](const Zero&) { return true; }, [](const L1&) { return true; },
                               [&](const Box& b) {
                                 for (Eigen::Index i = 0; i < u.size(); ++i) {
                                   const double slack = kMembershipTol * (1.0 + std::abs(u[i]));
                                   if (u[i] < b.lower[i] - slack || u[i] > b.upper[i] + slack) return false;
                                 }
                                 return true;
                               },
                               [&](const Ball& b) {
                                 return (u - b.center).norm() <= b.radius * (1.0 + kMembershipTol);
                               }},
                    term_);
}

double SimpleTerm::eval(const Vec& u) const {
  require(u.size() == dim_, "dimension mismatch in h evaluation");
  return std::visit(overloaded{[](const Zero&) { return 0.0; },
                               [&](const L1& l) { return l.weight * u.lpNorm<1>(); },
                               [&](const Box&) { return contains(u) ? 0.0 : kInf; },
                               [&](const Ball&) { return contains(u) ? 0.0 : kInf; }},
                    term_);
}

Vec SimpleTerm::prox(double t, const Vec& v) const {
  require(t > 0.0, "prox step must be positive");
  require(v.size() == dim_, "dimension mismatch in prox");
  return std::visit(overloaded{[&](const Zero&) -> Vec { return v; },
                               [&](const L1& l) -> Vec {
                                 const double thr = t * l.weight;
                                 Vec out(v.size());
                                 for (Eigen::Index i = 0; i < v.size(); ++i) {
                                   const double a = std::abs(v[i]) - thr;
                                   out[i] = a > 0.0 ? std::copysign(a, v[i]) : 0.0;
                                 }
                                 return out;
                               },
                               [&](const Box&) -> Vec { return project_domain(v); },
                               [&](const Ball&) -> Vec { return project_domain(v); }},
                    term_);
}

Vec SimpleTerm::project_domain(const Vec& v) const {
  require(v.size() == dim_, "dimension mismatch in projection");
  return std::visit(overloaded{[&](const Zero&) -> Vec { return v; }, [&](const L1&) -> Vec { return v; },
                               [&](const Box& b) -> Vec { return v.cwiseMax(b.lower).cwiseMin(b.upper); },
                               [&](const Ball& b) -> Vec {
                                 const Vec d = v - b.center;
                                 const double nd = d.norm();
                                 if (nd <= b.radius) return v;
                                 return b.center + (b.radius / nd) * d;
                               }},
                    term_);
}

double SimpleTerm::domain_radius() const {
  return std::visit(overloaded{[](const Zero&) { return kInf; }, [](const L1&) { return kInf; },
                               [](const Box& b) {
                                 double s = 0.0;
                                 for (Eigen::Index i = 0; i < b.lower.size(); ++i) {
                                   const double a = std::max(std::abs(b.lower[i]), std::abs(b.upper[i]));
                                   if (!std::isfinite(a)) return kInf;
                                   s += a * a;
                                 }
                                 return std::sqrt(s);
                               },
                               [](const Ball& b) { return b.center.norm() + b.radius; }},
                    term_);
}

nlohmann::json SimpleTerm::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  std::visit(overloaded{[&](const Zero&) { j["type"] = "zero"; },
                        [&](const L1& l) {
                          j["type"] = "l1";
                          j["weight"] = l.weight;
                        },
                        [&](const Box& b) {
                          j["type"] = "box";
                          j["lower"] = bound_to_json(b.lower);
                          j["upper"] = bound_to_json(b.upper);
                        },
                        [&](const Ball& b) {
                          j["type"] = "ball";
                          j["center"] = bound_to_json(b.center);
                          j["radius"] = b.radius;
                        }},
             term_);
  return j;
}

SimpleTerm SimpleTerm::from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "zero") return zero(j.at("dim").get<int>());
  if (type == "l1") return l1(j.at("dim").get<int>(), j.at("weight").get<double>());
  if (type == "box") return box(bound_from_json(j.at("lower"), -kInf), bound_from_json(j.at("upper"), kInf));
  if (type == "ball") return ball(vec_from_json(j.at("center")), j.at("radius").get<double>());
  fail(ErrorKind::InvalidArgument, "unknown simple term type '" + type + "'");
}

double eval_h(const SimpleTerm& term, const Vec& u) { return term.eval(u); }

Vec prox_h(const SimpleTerm& term, double t, const Vec& v) { return term.prox(t, v); }

}  // namespace pbf
