#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace opsplit {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }

/// Signed area of triangle (a, b, c); positive for counterclockwise order.
inline double signed_area(Point a, Point b, Point c) {
  return 0.5 * cross(b - a, c - a);
}

enum class DomainTag { UnitSquare, HalfUnitDisk, EyeShaped, External };

std::string to_string(DomainTag tag);

class MeshError : public std::runtime_error {
 public:
  explicit MeshError(const std::string& what) : std::runtime_error(what) {}
};

/// Conforming triangulation with interior-first node ordering: nodes
/// 0..n_interior-1 are interior, n_interior..n_total-1 lie on the boundary.
/// Triangles are counterclockwise. Immutable after construction.
struct Triangulation {
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;
  int n_interior = 0;
  double h = 0.0;  // grid spacing for generated meshes, max edge length for loaded ones
  DomainTag domain_tag = DomainTag::External;

  int n_total() const { return static_cast<int>(nodes.size()); }
  int n_boundary() const { return n_total() - n_interior; }
  bool is_boundary(int node) const { return node >= n_interior; }
};

/// Per-node geometric quantities: |theta_j| (area of the basis-function
/// support) for every node and the unit outward normal for boundary nodes.
struct NodeGeometry {
  std::vector<double> support_area;    // size n_total
  std::vector<Point> boundary_normal;  // size n_boundary, indexed by node - n_interior

  Point normal_at(const Triangulation& mesh, int node) const {
    return boundary_normal.at(static_cast<std::size_t>(node - mesh.n_interior));
  }
};

/// Result of loading an external mesh: the reordered triangulation plus the
/// original file index of each node (original_index[new_id] == file_id).
struct LoadedMesh {
  Triangulation mesh;
  std::vector<int> original_index;
};

/// Uniform mesh of the unit square: (n+1)^2 grid nodes, every cell split
/// along the same diagonal. h = 1/n.
Triangulation generate_regular_square(int n_subdivisions);

/// Criss-cross mesh of the unit square: every grid cell gets a center node
/// and four triangles. h = 1/n.
Triangulation generate_cross_square(int n_subdivisions);

/// Polar-fan mesh of the disk of radius 1/2 centered at (0.5, 0.5); ring i
/// carries 6i nodes, boundary nodes lie exactly on the circle. h = 0.5/n.
Triangulation generate_half_unit_disk(int n_radial);

/// Mapped-strip mesh of the eye-shaped region |x2| < x1(1-x1); column node
/// counts taper toward the cusps (0,0) and (1,0), which are single nodes.
Triangulation generate_eye_domain(int n_subdivisions);

/// Reads the native text format (header `N_nodes N_triangles`, then node and
/// triangle lines, `#` comments allowed), validates, and reorders the nodes
/// interior-first.
LoadedMesh load_mesh(const std::string& path);
LoadedMesh parse_mesh(std::istream& in, const std::string& origin);

NodeGeometry compute_node_geometry(const Triangulation& mesh);

/// Structural checks shared by the loader and the generators' tests: positive
/// areas, manifold edges, no dangling nodes, boundary flags consistent with
/// the boundary edges. Throws MeshError on the first violation.
void validate_triangulation(const Triangulation& mesh);

double triangle_area(const Triangulation& mesh, int t);
double total_area(const Triangulation& mesh);
double max_edge_length(const Triangulation& mesh);
double min_edge_length(const Triangulation& mesh);

}  // namespace opsplit
