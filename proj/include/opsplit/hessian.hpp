#pragma once

#include <Eigen/SparseLU>
#include <memory>

#include "opsplit/fem.hpp"

namespace opsplit {

/// Recovered symmetric discrete Hessian: d21 == d12 by construction.
struct HessianField {
  NodalField d11, d12, d22;
};

struct HessianConfig {
  double epsilon = 0.0;         // Tikhonov parameter; h^2 on unstructured meshes
  bool boundary_repair = false; // zero-Neumann recomputation of boundary values
};

/// Weak-form recovery of the second derivatives at interior nodes from the
/// trapezoidal-lumped integration-by-parts identity; boundary entries are 0.
HessianField recover_interior(const NodalField& psi, const Triangulation& mesh,
                              const NodeGeometry& geometry);

/// Recomputes boundary values so the discrete normal derivative of each
/// component vanishes at every boundary node; interior values are unchanged.
/// The boundary system couples only adjacent boundary nodes and is solved
/// directly, with one diagonally shifted retry if it is near singular.
class BoundaryRepairer {
 public:
  BoundaryRepairer(const Triangulation& mesh, const NodeGeometry& geometry);
  NodalField repair(const NodalField& component) const;
  HessianField repair(const HessianField& field) const;

 private:
  const Triangulation& mesh_;
  SparseOperator boundary_block_;   // coefficients of the unknown boundary values
  SparseOperator interior_block_;   // coefficients of the known interior values
  Eigen::SparseLU<SparseOperator> lu_;
  bool shifted_ = false;
};

HessianField repair_boundary(const HessianField& field, const Triangulation& mesh,
                             const NodeGeometry& geometry);

/// Smoothing solve (eps K + M) D~ = M D over all nodes (natural boundary
/// conditions); eps = 0 returns the input unchanged.
class TikhonovSmoother {
 public:
  TikhonovSmoother(const Triangulation& mesh, const NodeGeometry& geometry, double epsilon);
  NodalField apply(const NodalField& component) const;
  HessianField apply(const HessianField& field) const;

 private:
  double epsilon_;
  Eigen::VectorXd mass_;
  Eigen::SimplicialLDLT<SparseOperator> ldlt_;
};

HessianField tikhonov_regularize(const HessianField& field, const HessianConfig& config,
                                 const Triangulation& mesh, const NodeGeometry& geometry);

struct HessianPointwise {
  double laplacian;
  double determinant;
  double lambda1;  // larger eigenvalue
  double lambda2;
};

HessianPointwise hessian_pointwise(const HessianField& field, int node);

/// Full recovery pipeline with the per-mesh solvers built once and reused
/// across iterations.
class HessianRecovery {
 public:
  HessianRecovery(const Triangulation& mesh, const NodeGeometry& geometry,
                  const HessianConfig& config);
  HessianField operator()(const NodalField& psi) const;
  const HessianConfig& config() const { return config_; }

 private:
  const Triangulation& mesh_;
  const NodeGeometry& geometry_;
  HessianConfig config_;
  std::unique_ptr<BoundaryRepairer> repairer_;
  std::unique_ptr<TikhonovSmoother> smoother_;
};

}  // namespace opsplit
