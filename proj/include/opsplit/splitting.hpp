#pragma once

#include <iosfwd>
#include <optional>

#include "opsplit/problems.hpp"

namespace opsplit {

struct SplittingConfig {
  double tau = 1.0;
  std::optional<double> gamma;  // defaults to the smallest Laplacian eigenvalue
  double stop_tol = 1e-9;
  int max_iterations = 10000;
  HessianConfig hessian;
};

enum class RunStatus { Converged, MaxIterations, Diverged };

std::string to_string(RunStatus status);
RunStatus run_status_from_string(const std::string& s);

struct IterationRecord {
  int n = 0;
  double increment_l2 = 0.0;
  std::optional<double> err_l2;
  std::optional<double> err_linf;
  long clamped = 0;
};

struct IterationLog {
  std::vector<IterationRecord> records;
  RunStatus status = RunStatus::MaxIterations;
  int iterations() const { return static_cast<int>(records.size()); }
};

/// CSV columns: n, increment_l2, err_l2, err_linf (error cells blank when no
/// exact solution is attached).
void write_csv(const IterationLog& log, std::ostream& out);

struct ContractionDiagnostic {
  double c = 0.0;   // contraction constant
  double C1 = 0.0;  // Poincare constant estimate
  double L = 0.0;   // Lipschitz constant
  bool satisfied = false;  // 4L < gamma < 1/C1^2 and tau < 1/gamma
};

ContractionDiagnostic contraction_diagnostic(const SplittingConfig& config, double C1, double L);

/// Initial iterate: discrete harmonic extension of g (semilinear, Pucci) or
/// the solve of the discrete Laplace(u0) = f with u0 = g on the boundary
/// (Monge-Ampere); w0 = u0 in both cases.
std::pair<NodalField, NodalField> initialize(const ProblemSpec& problem,
                                             const Triangulation& mesh,
                                             const NodeGeometry& geometry);

/// One diffusion substep: solves the lumped backward-Euler system
/// (M + tau K) u = M u_n + tau M rhs with u = g on the boundary. The
/// factorization is owned by the caller via SubstepSolver for reuse.
class SubstepSolver {
 public:
  SubstepSolver(const Triangulation& mesh, const NodeGeometry& geometry,
                const NodalField& boundary_values, double tau);
  NodalField step(const NodalField& u_n, const NodalField& rhs_field) const;

 private:
  double tau_;
  Eigen::VectorXd mass_;
  NodalField boundary_values_;
  DirichletSolver solver_;
};

NodalField substep_u(const NodalField& u_n, const NodalField& rhs_field,
                     const SplittingConfig& config, const Triangulation& mesh,
                     const NodeGeometry& geometry, const NodalField& boundary_values);

/// Exponential relaxation: w = exp(-gamma tau) w_n + (1 - exp(-gamma tau)) u.
NodalField substep_w(const NodalField& w_n, const NodalField& u_np1, double gamma, double tau);

struct RunResult {
  NodalField u;
  NodalField w;
  IterationLog log;
  double gamma_used = 0.0;
  long clamp_events_final = 0;  // clamp count in the last iteration
  long clamp_events_total = 0;
};

/// Alternates the two substeps until ||u^{n+1} - u^n||_0 < stop_tol or the
/// iteration budget runs out; increments above 1e6 flag divergence.
RunResult run(const ProblemSpec& problem, const Triangulation& mesh,
              const NodeGeometry& geometry, const SplittingConfig& config);

}  // namespace opsplit
