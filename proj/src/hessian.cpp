#include "opsplit/hessian.hpp"

#include <cmath>
#include <vector>

namespace opsplit {

HessianField recover_interior(const NodalField& psi, const Triangulation& mesh,
                              const NodeGeometry& geometry) {
  const int n = mesh.n_total();
  if (psi.size() != n) throw SolveError("field length does not match mesh");
  HessianField out{NodalField::Zero(n), NodalField::Zero(n), NodalField::Zero(n)};

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto geo = element_geometry(mesh, static_cast<int>(t));
    const auto& tri = mesh.triangles[t];
    double gx = 0.0, gy = 0.0;  // grad(psi) on this triangle
    for (int v = 0; v < 3; ++v) {
      gx += psi[tri[v]] * geo.grad[v].x;
      gy += psi[tri[v]] * geo.grad[v].y;
    }
    for (int v = 0; v < 3; ++v) {
      const int k = tri[v];
      if (mesh.is_boundary(k)) continue;
      const double ax = geo.area * geo.grad[v].x;
      const double ay = geo.area * geo.grad[v].y;
      out.d11[k] -= gx * ax;
      out.d12[k] -= 0.5 * (gx * ay + gy * ax);
      out.d22[k] -= gy * ay;
    }
  }
  for (int k = 0; k < mesh.n_interior; ++k) {
    const double scale = 3.0 / geometry.support_area[k];
    out.d11[k] *= scale;
    out.d12[k] *= scale;
    out.d22[k] *= scale;
  }
  return out;
}

BoundaryRepairer::BoundaryRepairer(const Triangulation& mesh, const NodeGeometry& geometry)
    : mesh_(mesh) {
  const int ni = mesh.n_interior;
  const int nb = mesh.n_boundary();
  if (nb == 0) throw SolveError("mesh has no boundary nodes");

  // Row k (one per boundary node): sum_j coef(k,j) P_j = 0 where
  // coef(k,j) = n(Q_k) . (3/|theta_k|) * sum_{T contains k,j} grad(phi_j)|_T * |T|/3.
  std::vector<Eigen::Triplet<double>> bb, bi;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto geo = element_geometry(mesh, static_cast<int>(t));
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a) {
      const int k = tri[a];
      if (!mesh.is_boundary(k)) continue;
      const Point nrm = geometry.normal_at(mesh, k);
      const double row_scale = 1.0 / geometry.support_area[k];
      for (int b = 0; b < 3; ++b) {
        const int j = tri[b];
        const double coef = row_scale * geo.area * dot(nrm, geo.grad[b]);
        if (mesh.is_boundary(j))
          bb.emplace_back(k - ni, j - ni, coef);
        else
          bi.emplace_back(k - ni, j, coef);
      }
    }
  }
  boundary_block_.resize(nb, nb);
  boundary_block_.setFromTriplets(bb.begin(), bb.end());
  interior_block_.resize(nb, ni);
  interior_block_.setFromTriplets(bi.begin(), bi.end());

  lu_.compute(boundary_block_);
  if (lu_.info() != Eigen::Success) {
    double max_diag = 0.0;
    for (int j = 0; j < nb; ++j) max_diag = std::max(max_diag, std::abs(boundary_block_.coeff(j, j)));
    SparseOperator shifted = boundary_block_;
    for (int j = 0; j < nb; ++j) shifted.coeffRef(j, j) += 1e-10 * max_diag;
    lu_.compute(shifted);
    shifted_ = true;
    if (lu_.info() != Eigen::Success)
      throw SolveError("boundary repair system is singular");
  }
}

NodalField BoundaryRepairer::repair(const NodalField& component) const {
  const int ni = mesh_.n_interior;
  const Eigen::VectorXd rhs = -(interior_block_ * component.head(ni));
  Eigen::VectorXd pb = lu_.solve(rhs);
  if (!pb.allFinite() ||
      (boundary_block_ * pb - rhs).norm() > 1e-8 * (rhs.norm() + 1.0)) {
    if (shifted_) throw SolveError("boundary repair solve failed");
    throw SolveError("boundary repair system is ill-conditioned");
  }
  NodalField out = component;
  out.tail(mesh_.n_boundary()) = pb;
  return out;
}

HessianField BoundaryRepairer::repair(const HessianField& field) const {
  return {repair(field.d11), repair(field.d12), repair(field.d22)};
}

HessianField repair_boundary(const HessianField& field, const Triangulation& mesh,
                             const NodeGeometry& geometry) {
  return BoundaryRepairer(mesh, geometry).repair(field);
}

TikhonovSmoother::TikhonovSmoother(const Triangulation& mesh, const NodeGeometry& geometry,
                                   double epsilon)
    : epsilon_(epsilon) {
  if (epsilon < 0.0) throw SolveError("negative Tikhonov parameter");
  mass_.resize(mesh.n_total());
  for (int j = 0; j < mesh.n_total(); ++j) mass_[j] = geometry.support_area[j] / 3.0;
  if (epsilon_ == 0.0) return;
  SparseOperator A = epsilon_ * assemble_stiffness(mesh);
  for (int j = 0; j < mesh.n_total(); ++j) A.coeffRef(j, j) += mass_[j];
  ldlt_.compute(A);
  if (ldlt_.info() != Eigen::Success)
    throw SolveError("Tikhonov operator factorization failed");
}

NodalField TikhonovSmoother::apply(const NodalField& component) const {
  if (epsilon_ == 0.0) return component;
  return ldlt_.solve(mass_.asDiagonal() * component);
}

HessianField TikhonovSmoother::apply(const HessianField& field) const {
  return {apply(field.d11), apply(field.d12), apply(field.d22)};
}

HessianField tikhonov_regularize(const HessianField& field, const HessianConfig& config,
                                 const Triangulation& mesh, const NodeGeometry& geometry) {
  return TikhonovSmoother(mesh, geometry, config.epsilon).apply(field);
}

HessianPointwise hessian_pointwise(const HessianField& field, int node) {
  const double d11 = field.d11[node], d12 = field.d12[node], d22 = field.d22[node];
  HessianPointwise p{};
  p.laplacian = d11 + d22;
  p.determinant = d11 * d22 - d12 * d12;
  // (d11-d22)^2 + 4 d12^2 is the nonnegative form of trace^2 - 4 det.
  const double root = std::sqrt((d11 - d22) * (d11 - d22) + 4.0 * d12 * d12);
  p.lambda1 = 0.5 * (p.laplacian + root);
  p.lambda2 = 0.5 * (p.laplacian - root);
  return p;
}

HessianRecovery::HessianRecovery(const Triangulation& mesh, const NodeGeometry& geometry,
                                 const HessianConfig& config)
    : mesh_(mesh), geometry_(geometry), config_(config) {
  if (config_.epsilon == 0.0 && config_.boundary_repair)
    throw SolveError("boundary repair without regularization is not a supported mode");
  if (config_.boundary_repair)
    repairer_ = std::make_unique<BoundaryRepairer>(mesh_, geometry_);
  if (config_.epsilon > 0.0)
    smoother_ = std::make_unique<TikhonovSmoother>(mesh_, geometry_, config_.epsilon);
}

HessianField HessianRecovery::operator()(const NodalField& psi) const {
  HessianField field = recover_interior(psi, mesh_, geometry_);
  if (repairer_) field = repairer_->repair(field);
  if (smoother_) field = smoother_->apply(field);
  return field;
}

}  // namespace opsplit
