#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "opsplit/problems.hpp"
#include "opsplit/splitting.hpp"

using namespace opsplit;

namespace {
constexpr double kPi = std::numbers::pi;

HessianField constant_field(const Triangulation& mesh, double d11, double d12, double d22) {
  return {d11 * NodalField::Ones(mesh.n_total()), d12 * NodalField::Ones(mesh.n_total()),
          d22 * NodalField::Ones(mesh.n_total())};
}
}  // namespace

TEST_CASE("registry lists exactly the eight instances") {
  CHECK(problem_names().size() == 8);
  for (const auto& name : problem_names()) CHECK_NOTHROW(make_problem(name));
  CHECK_THROWS_WITH_AS(make_problem("ma-typo"), doctest::Contains("semilinear-cos"),
                       std::invalid_argument);
}

TEST_CASE("semilinear rhs: hand-checked values") {
  const auto mesh = generate_regular_square(2);
  ProblemParams params;
  params.L = 0.5;
  const auto spec = make_problem("semilinear-cos", params);

  // f(x,u) at x=(0,0), u=1: L|u| + 2 pi^2 g - L|g| with g(0,0)=1.
  CHECK(spec.semilinear_f({0.0, 0.0}, 1.0) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-14));

  // At the exact solution the L-terms cancel: f(x, g) = 2 pi^2 g pointwise.
  NodalField g_nodal(mesh.n_total());
  for (int j = 0; j < mesh.n_total(); ++j) g_nodal[j] = spec.g(mesh.nodes[j]);
  const NodalField rhs = semilinear_rhs(g_nodal, spec, mesh);
  for (int j = 0; j < mesh.n_total(); ++j)
    CHECK(rhs[j] == doctest::Approx(2.0 * kPi * kPi * g_nodal[j]).epsilon(1e-13));

  ProblemSpec linear;
  linear.kind = ProblemKind::Semilinear;
  linear.semilinear_f = [](Point, double u) { return u; };
  linear.g = [](Point) { return 0.0; };
  linear.domains = {DomainTag::UnitSquare};
  CHECK(semilinear_rhs(NodalField::Zero(mesh.n_total()), linear, mesh).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("semilinear rhs is Lipschitz in w with constant exactly L") {
  const auto spec = make_problem("semilinear-cos", {.L = 7.0});
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> coord(0.0, 1.0), val(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Point x{coord(rng), coord(rng)};
    const double a = val(rng), b = val(rng);
    CHECK(std::abs(spec.semilinear_f(x, a) - spec.semilinear_f(x, b)) <=
          7.0 * std::abs(a - b) + 1e-12);
  }
}

TEST_CASE("Monge-Ampere rhs: quadratic, flat, and saddle Hessians") {
  const auto mesh = generate_regular_square(4);
  const auto quad = make_problem("ma-quadratic");  // f = 256

  auto eval = monge_ampere_rhs(constant_field(mesh, 16.0, 0.0, 16.0), quad, mesh);
  for (int j = 0; j < mesh.n_interior; ++j) CHECK(eval.values[j] == doctest::Approx(-32.0));
  CHECK(eval.clamped == 0);

  ProblemSpec unit = make_problem("ma-no-classical");  // f = 1
  eval = monge_ampere_rhs(constant_field(mesh, 0.0, 0.0, 0.0), unit, mesh);
  for (int j = 0; j < mesh.n_interior; ++j) CHECK(eval.values[j] == doctest::Approx(-2.0));

  ProblemSpec degenerate = unit;
  degenerate.source_f = [](Point) { return 0.0; };
  eval = monge_ampere_rhs(constant_field(mesh, 1.0, 0.0, -1.0), degenerate, mesh);
  for (int j = 0; j < mesh.n_interior; ++j) CHECK(eval.values[j] == doctest::Approx(-2.0));
}

TEST_CASE("Monge-Ampere rhs clamps negative radicands and counts them") {
  const auto mesh = generate_regular_square(4);
  ProblemSpec spec = make_problem("ma-no-classical");
  spec.source_f = [](Point) { return -1.0; };  // forces trace^2 - 4 det + 4f < 0
  const auto eval = monge_ampere_rhs(constant_field(mesh, 0.0, 0.0, 0.0), spec, mesh);
  CHECK(eval.clamped == mesh.n_interior);
  CHECK(eval.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Pucci rhs: prefactor and radicand form") {
  const auto mesh = generate_regular_square(4);

  auto spec = make_problem("pucci-smooth", {.alpha = 3.0});
  NodalField rhs = pucci_rhs(constant_field(mesh, 2.0, 0.0, 0.0), spec, mesh);
  for (int j = 0; j < mesh.n_interior; ++j) CHECK(rhs[j] == doctest::Approx(1.0));

  rhs = pucci_rhs(constant_field(mesh, 1.3, 0.0, 1.3), spec, mesh);
  CHECK(rhs.cwiseAbs().maxCoeff() < 1e-14);  // isotropic Hessian

  spec = make_problem("pucci-smooth", {.alpha = 1.000001});
  rhs = pucci_rhs(constant_field(mesh, 2.0, 1.0, -1.0), spec, mesh);
  CHECK(rhs.cwiseAbs().maxCoeff() < 1e-5);  // alpha -> 1 reduces to Poisson

  CHECK_THROWS_AS(make_problem("pucci-smooth", {.alpha = 1.0}), std::invalid_argument);
}

TEST_CASE("registry data points") {
  const auto singular = make_problem("ma-singular");
  CHECK(singular.source_f({0.5, 0.5}) == doctest::Approx(4.0));

  const auto pucci = make_problem("pucci-smooth", {.alpha = 2.0});
  CHECK(pucci.g({0.0, 0.0}) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));

  const auto obstacle = make_problem("ma-obstacle");
  CHECK(obstacle.source_f({0.7, 0.5}) == doctest::Approx(0.0));  // |x-x0| = 0.2 exactly
  CHECK(obstacle.source_f({0.5, 0.5}) == 0.0);
  CHECK((*obstacle.exact)({0.9, 0.5}) == doctest::Approx(0.5 * 0.2 * 0.2));

  const auto quad = make_problem("ma-quadratic", {.beta = 4.0});
  CHECK(quad.g({0.5, 0.5}) == doctest::Approx(-1.0));
  CHECK(quad.g({0.0, 0.5}) == doctest::Approx(8.0 * 4.0 * 0.25 - 1.0));

  const auto indicator = make_problem("pucci-indicator");
  CHECK(indicator.g({0.0, 0.0}) == doctest::Approx(1.0));   // corner
  CHECK(indicator.g({0.5, 0.0}) == doctest::Approx(0.0));   // middle of an edge
  CHECK(indicator.g({0.25, 0.0}) == doctest::Approx(0.5));  // ramp midpoint
  CHECK(indicator.g({0.0, 0.5}) == doctest::Approx(0.0));   // same profile on the left side
}

TEST_CASE("exact-solution residual decreases under refinement") {
  // Substituting the exact nodal values into one splitting step measures the
  // scheme's consistency; the first increment must shrink as h decreases.
  for (const std::string name :
       {std::string("semilinear-cos"), std::string("ma-exp"), std::string("pucci-smooth")}) {
    double previous = std::numeric_limits<double>::max();
    for (int n : {10, 20, 40}) {
      const auto mesh = generate_regular_square(n);
      const auto geo = compute_node_geometry(mesh);
      const auto spec = make_problem(name);
      NodalField exact(mesh.n_total());
      for (int j = 0; j < mesh.n_total(); ++j) exact[j] = (*spec.exact)(mesh.nodes[j]);

      SplittingConfig config;
      config.gamma = 10.0;
      NodalField rhs;
      if (spec.kind == ProblemKind::Semilinear) {
        rhs = semilinear_rhs(exact, spec, mesh);
      } else {
        HessianRecovery recover(mesh, geo, config.hessian);
        if (spec.kind == ProblemKind::MongeAmpere)
          rhs = monge_ampere_rhs(recover(exact), spec, mesh).values;
        else
          rhs = pucci_rhs(recover(exact), spec, mesh);
      }
      const NodalField next = substep_u(exact, rhs, config, mesh, geo, exact);
      const double residual = lumped_l2_norm(next - exact, geo);
      CHECK(residual < previous);
      previous = residual;
    }
  }
}
