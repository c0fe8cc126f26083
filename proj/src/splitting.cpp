#include "opsplit/splitting.hpp"

#include <cmath>
#include <ostream>

#include "opsplit/csv.hpp"

namespace opsplit {

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxIterations: return "max-iterations";
    case RunStatus::Diverged: return "diverged";
  }
  return "unknown";
}

RunStatus run_status_from_string(const std::string& s) {
  if (s == "converged") return RunStatus::Converged;
  if (s == "max-iterations") return RunStatus::MaxIterations;
  if (s == "diverged") return RunStatus::Diverged;
  throw std::invalid_argument("unknown run status '" + s + "'");
}

void write_csv(const IterationLog& log, std::ostream& out) {
  out << "n,increment_l2,err_l2,err_linf\n";
  for (const auto& rec : log.records) {
    out << rec.n << ',' << csv::format(rec.increment_l2) << ','
        << csv::format(rec.err_l2) << ',' << csv::format(rec.err_linf) << '\n';
  }
}

ContractionDiagnostic contraction_diagnostic(const SplittingConfig& config, double C1, double L) {
  if (C1 <= 0.0) throw std::invalid_argument("contraction diagnostic needs C1 > 0");
  if (L < 0.0) throw std::invalid_argument("contraction diagnostic needs L >= 0");
  const double tau = config.tau;
  const double gamma = config.gamma.value_or(0.0);
  if (tau <= 0.0 || gamma <= 0.0)
    throw std::invalid_argument("contraction diagnostic needs tau > 0 and gamma > 0");
  const double decay = std::exp(-gamma * tau);
  const double first = (2.0 - decay) / (1.0 + tau / (C1 * C1));
  const double second = decay + first * L * tau;
  ContractionDiagnostic diag;
  diag.c = std::max(first, second);
  diag.C1 = C1;
  diag.L = L;
  diag.satisfied = (4.0 * L < gamma) && (gamma < 1.0 / (C1 * C1)) && (tau < 1.0 / gamma);
  return diag;
}

std::pair<NodalField, NodalField> initialize(const ProblemSpec& problem,
                                             const Triangulation& mesh,
                                             const NodeGeometry& geometry) {
  const int n = mesh.n_total();
  NodalField boundary_values(n);
  for (int j = 0; j < n; ++j) boundary_values[j] = problem.g(mesh.nodes[j]);

  const SparseOperator K = assemble_stiffness(mesh);
  NodalField rhs = NodalField::Zero(n);
  if (problem.kind == ProblemKind::MongeAmpere) {
    // Laplace(u0) = f, i.e. K u0 = -M f on the interior.
    for (int j = 0; j < mesh.n_interior; ++j)
      rhs[j] = -geometry.support_area[j] / 3.0 * problem.source_f(mesh.nodes[j]);
  }
  NodalField u0 = solve_dirichlet(K, rhs, boundary_values, mesh);
  return {u0, u0};
}

SubstepSolver::SubstepSolver(const Triangulation& mesh, const NodeGeometry& geometry,
                             const NodalField& boundary_values, double tau)
    : tau_(tau),
      mass_(mesh.n_total()),
      boundary_values_(boundary_values),
      solver_([&] {
        if (tau <= 0.0) throw SolveError("substep needs tau > 0");
        SparseOperator A = tau * assemble_stiffness(mesh);
        for (int j = 0; j < mesh.n_total(); ++j)
          A.coeffRef(j, j) += geometry.support_area[j] / 3.0;
        return DirichletSolver(A, mesh);
      }()) {
  for (int j = 0; j < mesh.n_total(); ++j) mass_[j] = geometry.support_area[j] / 3.0;
}

NodalField SubstepSolver::step(const NodalField& u_n, const NodalField& rhs_field) const {
  const NodalField load = mass_.asDiagonal() * (u_n + tau_ * rhs_field);
  return solver_.solve(load, boundary_values_);
}

NodalField substep_u(const NodalField& u_n, const NodalField& rhs_field,
                     const SplittingConfig& config, const Triangulation& mesh,
                     const NodeGeometry& geometry, const NodalField& boundary_values) {
  return SubstepSolver(mesh, geometry, boundary_values, config.tau).step(u_n, rhs_field);
}

NodalField substep_w(const NodalField& w_n, const NodalField& u_np1, double gamma, double tau) {
  if (w_n.size() != u_np1.size()) throw SolveError("substep_w: field lengths differ");
  const double decay = std::exp(-gamma * tau);
  return decay * w_n + (1.0 - decay) * u_np1;
}

RunResult run(const ProblemSpec& problem, const Triangulation& mesh,
              const NodeGeometry& geometry, const SplittingConfig& config) {
  if (config.tau <= 0.0 || config.stop_tol <= 0.0 || config.max_iterations < 1)
    throw SolveError("run needs tau > 0, stop_tol > 0, max_iterations >= 1");
  if (config.gamma && *config.gamma <= 0.0) throw SolveError("run needs gamma > 0");
  const int n = mesh.n_total();
  const double gamma = config.gamma ? *config.gamma : smallest_laplacian_eigenvalue(mesh);

  NodalField exact_values;
  if (problem.exact) {
    exact_values.resize(n);
    for (int j = 0; j < n; ++j) exact_values[j] = (*problem.exact)(mesh.nodes[j]);
  }

  auto [u, w] = initialize(problem, mesh, geometry);
  const NodalField boundary_values = u;  // initialize already pinned u = g on the boundary
  SubstepSolver substep(mesh, geometry, boundary_values, config.tau);

  std::optional<HessianRecovery> recovery;
  if (problem.kind != ProblemKind::Semilinear)
    recovery.emplace(mesh, geometry, config.hessian);

  RunResult result;
  result.gamma_used = gamma;
  result.log.status = RunStatus::MaxIterations;

  for (int it = 1; it <= config.max_iterations; ++it) {
    NodalField rhs;
    long clamped = 0;
    switch (problem.kind) {
      case ProblemKind::Semilinear:
        rhs = semilinear_rhs(w, problem, mesh);
        break;
      case ProblemKind::MongeAmpere: {
        auto eval = monge_ampere_rhs((*recovery)(w), problem, mesh);
        rhs = std::move(eval.values);
        clamped = eval.clamped;
        break;
      }
      case ProblemKind::Pucci:
        rhs = pucci_rhs((*recovery)(w), problem, mesh);
        break;
    }

    const NodalField u_next = substep.step(u, rhs);
    w = substep_w(w, u_next, gamma, config.tau);
    const double increment = lumped_l2_norm(u_next - u, geometry);
    u = u_next;

    IterationRecord rec;
    rec.n = it;
    rec.increment_l2 = increment;
    rec.clamped = clamped;
    if (exact_values.size() > 0) {
      const NodalField err = u - exact_values;
      rec.err_l2 = lumped_l2_norm(err, geometry);
      rec.err_linf = err.cwiseAbs().maxCoeff();
    }
    result.log.records.push_back(rec);
    result.clamp_events_total += clamped;
    result.clamp_events_final = clamped;

    if (!std::isfinite(increment) || increment > 1e6) {
      result.log.status = RunStatus::Diverged;
      break;
    }
    if (increment < config.stop_tol) {
      result.log.status = RunStatus::Converged;
      break;
    }
  }

  result.u = std::move(u);
  result.w = std::move(w);
  return result;
}

}  // namespace opsplit
