#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <stdexcept>

#include "opsplit/mesh.hpp"

namespace opsplit {

/// Coefficient vector of a piecewise-linear function on V_h, one entry per
/// mesh node (interior-first ordering).
using NodalField = Eigen::VectorXd;

using SparseOperator = Eigen::SparseMatrix<double>;

class SolveError : public std::runtime_error {
 public:
  explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

/// Area and constant P1 basis gradients of one triangle.
struct ElementGeometry {
  double area;
  Point grad[3];
};

ElementGeometry element_geometry(const Triangulation& mesh, int t);

/// Stiffness operator: entry (a,b) = integral of grad(phi_a) . grad(phi_b),
/// exact for P1 elements. Symmetric, positive semidefinite, zero row sums.
SparseOperator assemble_stiffness(const Triangulation& mesh);

/// Trapezoidal (vertex-rule) mass operator: diagonal with entry |theta_j|/3.
SparseOperator assemble_lumped_mass(const Triangulation& mesh, const NodeGeometry& geometry);

/// Solves A u = rhs on the interior block with u fixed to boundary_values on
/// boundary nodes. The interior factorization is reused across solve() calls,
/// which is what makes the splitting iteration cheap.
class DirichletSolver {
 public:
  DirichletSolver(const SparseOperator& A, const Triangulation& mesh);

  /// rhs and boundary_values are full-length nodal fields; only interior
  /// entries of rhs and boundary entries of boundary_values are read.
  NodalField solve(const NodalField& rhs, const NodalField& boundary_values) const;

 private:
  int n_interior_;
  int n_total_;
  SparseOperator interior_;   // A restricted to interior x interior
  SparseOperator coupling_;   // A interior x boundary block
  Eigen::SimplicialLDLT<SparseOperator> ldlt_;
  bool use_cg_ = false;
};

NodalField solve_dirichlet(const SparseOperator& A, const NodalField& rhs,
                           const NodalField& boundary_values, const Triangulation& mesh);

/// Smallest eigenvalue of (stiffness) x = lambda (lumped mass) x on the
/// interior nodes, by inverse power iteration (relative tolerance 1e-8,
/// at most 1000 iterations).
double smallest_laplacian_eigenvalue(const Triangulation& mesh);

struct FieldNorms {
  double l2;
  double linf;
  double h1_semi;
};

/// Trapezoidal L2, max norm, and the H1 seminorm sqrt(e^T K e).
FieldNorms field_norms(const NodalField& e, const Triangulation& mesh,
                       const NodeGeometry& geometry);

/// Trapezoidal L2 norm alone; the per-iteration stopping criterion.
double lumped_l2_norm(const NodalField& e, const NodeGeometry& geometry);

}  // namespace opsplit
