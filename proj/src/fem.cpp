#include "opsplit/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <vector>

namespace opsplit {

namespace {

// Splits a full operator into interior/interior and interior/boundary blocks.
void split_blocks(const SparseOperator& A, int n_interior, SparseOperator& interior,
                  SparseOperator& coupling) {
  const int n = A.rows();
  std::vector<Eigen::Triplet<double>> ii, ib;
  for (int col = 0; col < A.outerSize(); ++col) {
    for (SparseOperator::InnerIterator it(A, col); it; ++it) {
      if (it.row() >= n_interior) continue;
      if (it.col() < n_interior)
        ii.emplace_back(it.row(), it.col(), it.value());
      else
        ib.emplace_back(it.row(), it.col() - n_interior, it.value());
    }
  }
  interior.resize(n_interior, n_interior);
  interior.setFromTriplets(ii.begin(), ii.end());
  coupling.resize(n_interior, n - n_interior);
  coupling.setFromTriplets(ib.begin(), ib.end());
}

}  // namespace

ElementGeometry element_geometry(const Triangulation& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Point p0 = mesh.nodes[tri[0]], p1 = mesh.nodes[tri[1]], p2 = mesh.nodes[tri[2]];
  ElementGeometry geo;
  geo.area = signed_area(p0, p1, p2);
  const double inv2a = 1.0 / (2.0 * geo.area);
  auto rot90 = [](Point v) { return Point{-v.y, v.x}; };
  geo.grad[0] = inv2a * rot90(p2 - p1);
  geo.grad[1] = inv2a * rot90(p0 - p2);
  geo.grad[2] = inv2a * rot90(p1 - p0);
  return geo;
}

SparseOperator assemble_stiffness(const Triangulation& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.triangles.size() * 9);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto geo = element_geometry(mesh, static_cast<int>(t));
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        trips.emplace_back(tri[a], tri[b], geo.area * dot(geo.grad[a], geo.grad[b]));
  }
  SparseOperator K(mesh.n_total(), mesh.n_total());
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

SparseOperator assemble_lumped_mass(const Triangulation& mesh, const NodeGeometry& geometry) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.n_total());
  for (int j = 0; j < mesh.n_total(); ++j)
    trips.emplace_back(j, j, geometry.support_area[j] / 3.0);
  SparseOperator M(mesh.n_total(), mesh.n_total());
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

DirichletSolver::DirichletSolver(const SparseOperator& A, const Triangulation& mesh)
    : n_interior_(mesh.n_interior), n_total_(mesh.n_total()) {
  if (A.rows() != n_total_ || A.cols() != n_total_)
    throw SolveError("operator dimension does not match mesh");
  if (n_interior_ == 0) throw SolveError("mesh has no interior nodes");
  split_blocks(A, n_interior_, interior_, coupling_);
  ldlt_.compute(interior_);
  if (ldlt_.info() != Eigen::Success) use_cg_ = true;
}

NodalField DirichletSolver::solve(const NodalField& rhs, const NodalField& boundary_values) const {
  if (rhs.size() != n_total_ || boundary_values.size() != n_total_)
    throw SolveError("field length does not match mesh");
  const Eigen::VectorXd gb = boundary_values.tail(n_total_ - n_interior_);
  const Eigen::VectorXd b = rhs.head(n_interior_) - coupling_ * gb;

  Eigen::VectorXd x;
  if (!use_cg_) {
    x = ldlt_.solve(b);
    x += ldlt_.solve(b - interior_ * x);  // one refinement pass
  }
  const double scale = b.norm();
  if (use_cg_ || !x.allFinite() || (interior_ * x - b).norm() > 1e-12 * scale + 1e-300) {
    Eigen::ConjugateGradient<SparseOperator, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-13);
    cg.setMaxIterations(20 * n_interior_);
    cg.compute(interior_);
    if (use_cg_)
      x = cg.solve(b);
    else
      x = cg.solveWithGuess(b, x);
    if (cg.info() != Eigen::Success || !x.allFinite() ||
        (interior_ * x - b).norm() > 1e-12 * scale + 1e-300)
      throw SolveError("interior system is singular or could not be solved to tolerance");
  }

  NodalField u(n_total_);
  u.head(n_interior_) = x;
  u.tail(n_total_ - n_interior_) = gb;
  return u;
}

NodalField solve_dirichlet(const SparseOperator& A, const NodalField& rhs,
                           const NodalField& boundary_values, const Triangulation& mesh) {
  return DirichletSolver(A, mesh).solve(rhs, boundary_values);
}

double smallest_laplacian_eigenvalue(const Triangulation& mesh) {
  if (mesh.n_interior < 1) throw SolveError("eigenvalue needs at least one interior node");
  const auto geometry = compute_node_geometry(mesh);
  const SparseOperator K = assemble_stiffness(mesh);
  const int ni = mesh.n_interior;

  SparseOperator kii, kib;
  split_blocks(K, ni, kii, kib);
  Eigen::VectorXd mass(ni);
  for (int j = 0; j < ni; ++j) mass[j] = geometry.support_area[j] / 3.0;

  Eigen::SimplicialLDLT<SparseOperator> ldlt(kii);
  if (ldlt.info() != Eigen::Success)
    throw SolveError("stiffness factorization failed in eigenvalue iteration");

  Eigen::VectorXd x = Eigen::VectorXd::Ones(ni);
  x /= std::sqrt(x.dot(mass.asDiagonal() * x));
  double lambda = x.dot(kii * x);
  for (int it = 0; it < 1000; ++it) {
    Eigen::VectorXd y = ldlt.solve(mass.asDiagonal() * x);
    const double m_norm = std::sqrt(y.dot(mass.asDiagonal() * y));
    y /= m_norm;
    const double next = y.dot(kii * y);
    const bool done = std::abs(next - lambda) <= 1e-8 * std::abs(next);
    lambda = next;
    x = y;
    if (done) return lambda;
  }
  throw SolveError("eigenvalue iteration did not converge; last iterate " + std::to_string(lambda));
}

FieldNorms field_norms(const NodalField& e, const Triangulation& mesh,
                       const NodeGeometry& geometry) {
  FieldNorms norms{};
  norms.l2 = lumped_l2_norm(e, geometry);
  norms.linf = e.size() > 0 ? e.cwiseAbs().maxCoeff() : 0.0;
  const SparseOperator K = assemble_stiffness(mesh);
  norms.h1_semi = std::sqrt(std::max(0.0, e.dot(K * e)));
  return norms;
}

double lumped_l2_norm(const NodalField& e, const NodeGeometry& geometry) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < e.size(); ++j)
    acc += geometry.support_area[j] / 3.0 * e[j] * e[j];
  return std::sqrt(acc);
}

}  // namespace opsplit
