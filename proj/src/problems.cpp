#include "opsplit/problems.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace opsplit {

namespace {

constexpr double kPi = std::numbers::pi;

double sq(double v) { return v * v; }

// Sine-ramp regularization g_delta of the indicator boundary data, applied on
// each side of the unit square via the coordinate running along that side.
double indicator_profile(double t, double delta) {
  if (t <= 0.25 - delta || t >= 0.75 + delta) return 1.0;
  if (t >= 0.25 + delta && t <= 0.75 - delta) return 0.0;
  if (t < 0.5) return 0.5 * (1.0 - std::sin(0.5 * kPi * (t - 0.25) / delta));
  return 0.5 * (1.0 + std::sin(0.5 * kPi * (t - 0.75) / delta));
}

double indicator_g(Point p, double delta) {
  const double d_bottom = p.y, d_top = 1.0 - p.y;
  const double d_left = p.x, d_right = 1.0 - p.x;
  const double dmin = std::min(std::min(d_bottom, d_top), std::min(d_left, d_right));
  double t;
  if (dmin == d_bottom || dmin == d_top)
    t = p.x;
  else
    t = p.y;
  return indicator_profile(t, delta);
}

}  // namespace

NodalField semilinear_rhs(const NodalField& w, const ProblemSpec& spec,
                          const Triangulation& mesh) {
  NodalField rhs(mesh.n_total());
  for (int j = 0; j < mesh.n_total(); ++j)
    rhs[j] = spec.semilinear_f(mesh.nodes[j], w[j]);
  return rhs;
}

MongeAmpereRhs monge_ampere_rhs(const HessianField& hessian, const ProblemSpec& spec,
                                const Triangulation& mesh) {
  MongeAmpereRhs out{NodalField::Zero(mesh.n_total()), 0};
  for (int j = 0; j < mesh.n_interior; ++j) {
    const auto p = hessian_pointwise(hessian, j);
    double radicand = sq(p.laplacian) - 4.0 * p.determinant + 4.0 * spec.source_f(mesh.nodes[j]);
    if (radicand < 0.0) {
      radicand = 0.0;
      ++out.clamped;
    }
    out.values[j] = -std::sqrt(radicand);
  }
  return out;
}

NodalField pucci_rhs(const HessianField& hessian, const ProblemSpec& spec,
                     const Triangulation& mesh) {
  NodalField rhs = NodalField::Zero(mesh.n_total());
  const double factor = (spec.alpha - 1.0) / (spec.alpha + 1.0);
  for (int j = 0; j < mesh.n_interior; ++j) {
    const double d11 = hessian.d11[j], d12 = hessian.d12[j], d22 = hessian.d22[j];
    rhs[j] = factor * std::sqrt(sq(d11 - d22) + 4.0 * sq(d12));
  }
  return rhs;
}

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names = {
      "semilinear-cos", "ma-quadratic", "ma-exp",          "ma-obstacle",
      "ma-singular",    "ma-no-classical", "pucci-smooth", "pucci-indicator"};
  return names;
}

ProblemSpec make_problem(const std::string& name, const ProblemParams& params) {
  ProblemSpec spec;
  spec.name = name;

  if (name == "semilinear-cos") {
    const double L = params.L;
    auto g = [](Point p) { return std::cos(kPi * p.x) * std::cos(kPi * p.y); };
    spec.kind = ProblemKind::Semilinear;
    spec.lipschitz = L;
    // f(x,u) = L|u| - (Laplacian g) - L|g| with -Laplacian g = 2 pi^2 g.
    spec.semilinear_f = [L, g](Point p, double u) {
      const double gp = g(p);
      return L * std::abs(u) + 2.0 * kPi * kPi * gp - L * std::abs(gp);
    };
    spec.g = g;
    spec.exact = g;
    spec.domains = {DomainTag::UnitSquare, DomainTag::External};
    return spec;
  }

  if (name == "ma-quadratic") {
    const double beta = params.beta;
    if (beta <= 0.0) throw std::invalid_argument("ma-quadratic needs beta > 0");
    auto g = [beta](Point p) {
      return 8.0 * (beta * sq(p.x - 0.5) + sq(p.y - 0.5) / beta) - 1.0;
    };
    spec.kind = ProblemKind::MongeAmpere;
    spec.source_f = [](Point) { return 256.0; };
    spec.g = g;
    spec.exact = g;
    spec.domains = {DomainTag::UnitSquare, DomainTag::External};
    return spec;
  }

  if (name == "ma-exp") {
    auto exact = [](Point p) { return std::exp(0.5 * (sq(p.x) + sq(p.y))); };
    spec.kind = ProblemKind::MongeAmpere;
    spec.source_f = [](Point p) {
      const double r2 = sq(p.x) + sq(p.y);
      return (1.0 + r2) * std::exp(r2);
    };
    spec.g = exact;
    spec.exact = exact;
    spec.domains = {DomainTag::UnitSquare, DomainTag::HalfUnitDisk, DomainTag::External};
    return spec;
  }

  if (name == "ma-obstacle") {
    const Point x0{0.5, 0.5};
    auto exact = [x0](Point p) {
      return 0.5 * sq(std::max(norm(p - x0) - 0.2, 0.0));
    };
    spec.kind = ProblemKind::MongeAmpere;
    spec.source_f = [x0](Point p) {
      const double r = norm(p - x0);
      return r == 0.0 ? 0.0 : std::max(1.0 - 0.2 / r, 0.0);
    };
    spec.g = exact;
    spec.exact = exact;
    spec.domains = {DomainTag::UnitSquare, DomainTag::External};
    return spec;
  }

  if (name == "ma-singular") {
    const Point x0{0.5, 0.5};
    auto exact = [x0](Point p) {
      const double r2 = sq(p.x - x0.x) + sq(p.y - x0.y);
      return -0.5 * std::sqrt(std::max(1.0 - 4.0 * r2, 0.0));
    };
    spec.kind = ProblemKind::MongeAmpere;
    spec.source_f = [x0](Point p) {
      const double r2 = sq(p.x - x0.x) + sq(p.y - x0.y);
      return 4.0 / sq(1.0 - 4.0 * r2);
    };
    spec.g = [](Point) { return 0.0; };
    spec.exact = exact;
    spec.domains = {DomainTag::HalfUnitDisk, DomainTag::External};
    return spec;
  }

  if (name == "ma-no-classical") {
    spec.kind = ProblemKind::MongeAmpere;
    spec.source_f = [](Point) { return 1.0; };
    spec.g = [](Point) { return 0.0; };
    spec.domains = {DomainTag::UnitSquare, DomainTag::EyeShaped, DomainTag::External};
    return spec;
  }

  if (name == "pucci-smooth") {
    const double alpha = params.alpha;
    if (alpha <= 1.0) throw std::invalid_argument("pucci-smooth needs alpha > 1");
    auto exact = [alpha](Point p) {
      const double rho = std::sqrt(sq(p.x + 1.0) + sq(p.y + 1.0));
      return -std::pow(rho, 1.0 - alpha);
    };
    spec.kind = ProblemKind::Pucci;
    spec.alpha = alpha;
    spec.g = exact;
    spec.exact = exact;
    spec.domains = {DomainTag::UnitSquare, DomainTag::External};
    return spec;
  }

  if (name == "pucci-indicator") {
    const double alpha = params.alpha;
    const double delta = params.delta;
    if (alpha <= 1.0) throw std::invalid_argument("pucci-indicator needs alpha > 1");
    if (delta <= 0.0 || delta > 0.25)
      throw std::invalid_argument("pucci-indicator needs delta in (0, 1/4]");
    spec.kind = ProblemKind::Pucci;
    spec.alpha = alpha;
    spec.g = [delta](Point p) { return indicator_g(p, delta); };
    spec.domains = {DomainTag::UnitSquare, DomainTag::External};
    return spec;
  }

  std::ostringstream msg;
  msg << "unknown problem '" << name << "'; valid names:";
  for (const auto& n : problem_names()) msg << " " << n;
  throw std::invalid_argument(msg.str());
}

}  // namespace opsplit
