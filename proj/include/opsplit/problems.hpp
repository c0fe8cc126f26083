#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "opsplit/hessian.hpp"

namespace opsplit {

enum class ProblemKind { Semilinear, MongeAmpere, Pucci };

/// One Dirichlet problem instance: the equation family, its data, and the
/// exact solution when one is known.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::Semilinear;
  std::string name;

  std::function<double(Point, double)> semilinear_f;  // f(x, u), Semilinear only
  double lipschitz = 0.0;                             // Lipschitz constant of f in u
  std::function<double(Point)> source_f;              // f(x) > 0, Monge-Ampere only
  double alpha = 2.0;                                 // Pucci only, > 1

  std::function<double(Point)> g;                     // Dirichlet boundary data
  std::optional<std::function<double(Point)>> exact;

  std::vector<DomainTag> domains;  // domains the instance is posed on; first is canonical
  DomainTag domain_tag() const { return domains.front(); }
};

/// Nodal values of f(x, w) for the current relaxation iterate.
NodalField semilinear_rhs(const NodalField& w, const ProblemSpec& spec,
                          const Triangulation& mesh);

/// Right-hand side -sqrt(|trace|^2 - 4 det + 4f) at interior nodes; negative
/// radicands are clamped to zero and counted. Boundary entries are zero (the
/// substep never reads them).
struct MongeAmpereRhs {
  NodalField values;
  long clamped = 0;
};
MongeAmpereRhs monge_ampere_rhs(const HessianField& hessian, const ProblemSpec& spec,
                                const Triangulation& mesh);

/// Right-hand side (alpha-1)/(alpha+1) * sqrt((d11-d22)^2 + 4 d12^2) at
/// interior nodes; the radicand is algebraically nonnegative.
NodalField pucci_rhs(const HessianField& hessian, const ProblemSpec& spec,
                     const Triangulation& mesh);

struct ProblemParams {
  double L = 0.5;          // semilinear Lipschitz constant
  double alpha = 2.0;      // Pucci exponent
  double beta = 1.0;       // quadratic anisotropy
  double delta = 1.0 / 16; // indicator boundary regularization width
};

/// Instantiates a registered problem by name. Unknown names raise an error
/// listing the valid ones.
ProblemSpec make_problem(const std::string& name, const ProblemParams& params = {});

const std::vector<std::string>& problem_names();

}  // namespace opsplit
