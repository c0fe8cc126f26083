#include "opsplit/mesh.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace opsplit {

namespace {

struct RawMesh {
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<bool> boundary_flag;
};

// Applies the interior-first ordering. The relative order inside each class
// is preserved so generators stay deterministic.
Triangulation finalize(RawMesh raw, double h, DomainTag tag,
                       std::vector<int>* original_index = nullptr) {
  const int n = static_cast<int>(raw.nodes.size());
  std::vector<int> new_id(n, -1);
  std::vector<int> order;
  order.reserve(n);
  for (int i = 0; i < n; ++i)
    if (!raw.boundary_flag[i]) order.push_back(i);
  const int n_interior = static_cast<int>(order.size());
  for (int i = 0; i < n; ++i)
    if (raw.boundary_flag[i]) order.push_back(i);
  for (int k = 0; k < n; ++k) new_id[order[k]] = k;

  Triangulation mesh;
  mesh.nodes.resize(raw.nodes.size());
  for (int i = 0; i < n; ++i) mesh.nodes[new_id[i]] = raw.nodes[i];
  mesh.triangles.reserve(raw.triangles.size());
  for (auto t : raw.triangles)
    mesh.triangles.push_back({new_id[t[0]], new_id[t[1]], new_id[t[2]]});
  mesh.n_interior = n_interior;
  mesh.h = h;
  mesh.domain_tag = tag;
  if (original_index) *original_index = order;
  return mesh;
}

// Boundary edge (a -> b) in triangle traversal order; for counterclockwise
// triangles the outward normal is the direction rotated by -90 degrees.
struct BoundaryEdge {
  int from, to;
};

std::vector<BoundaryEdge> boundary_edges(const Triangulation& mesh) {
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      edge_count[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  std::vector<BoundaryEdge> edges;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      if (edge_count.at({std::min(a, b), std::max(a, b)}) == 1)
        edges.push_back({a, b});
    }
  }
  return edges;
}

// Triangulates the band between two node loops/chains ordered by a
// normalized parameter in [0,1]. `circular` wraps both sequences.
void stitch_band(const std::vector<int>& inner, const std::vector<double>& inner_t,
                 const std::vector<int>& outer, const std::vector<double>& outer_t,
                 bool circular, std::vector<std::array<int, 3>>& triangles) {
  const int na = static_cast<int>(inner.size());
  const int nb = static_cast<int>(outer.size());
  if (na == 1 && nb == 1) return;

  auto param = [](const std::vector<double>& t, int i, int n, bool wrap) {
    if (static_cast<int>(t.size()) == 1) return 2.0;  // lone node never advances
    if (wrap) return (i >= n) ? t[i - n] + 1.0 : t[i];
    return t[i];
  };

  int ia = 0, ib = 0;
  const int steps_a = (na == 1) ? 0 : (circular ? na : na - 1);
  const int steps_b = (nb == 1) ? 0 : (circular ? nb : nb - 1);
  while (ia < steps_a || ib < steps_b) {
    const bool can_a = ia < steps_a;
    const bool can_b = ib < steps_b;
    bool advance_a;
    if (!can_b)
      advance_a = true;
    else if (!can_a)
      advance_a = false;
    else
      advance_a = param(inner_t, ia + 1, na, circular) <= param(outer_t, ib + 1, nb, circular);
    if (advance_a) {
      triangles.push_back({inner[ia % na], outer[ib % nb], inner[(ia + 1) % na]});
      ++ia;
    } else {
      triangles.push_back({inner[ia % na], outer[ib % nb], outer[(ib + 1) % nb]});
      ++ib;
    }
  }
}

int parse_int(const std::string& tok, const std::string& origin, int line_no) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw MeshError(origin + ":" + std::to_string(line_no) + ": expected integer, got '" + tok + "'");
  }
}

double parse_double(const std::string& tok, const std::string& origin, int line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw MeshError(origin + ":" + std::to_string(line_no) + ": expected number, got '" + tok + "'");
  }
}

}  // namespace

std::string to_string(DomainTag tag) {
  switch (tag) {
    case DomainTag::UnitSquare: return "unit-square";
    case DomainTag::HalfUnitDisk: return "half-unit-disk";
    case DomainTag::EyeShaped: return "eye-shaped";
    case DomainTag::External: return "external";
  }
  return "unknown";
}

Triangulation generate_regular_square(int n) {
  if (n < 2) throw MeshError("generate_regular_square: need n_subdivisions >= 2");
  RawMesh raw;
  const double h = 1.0 / n;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      raw.nodes.push_back({i * h, j * h});
      raw.boundary_flag.push_back(i == 0 || i == n || j == 0 || j == n);
    }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      raw.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      raw.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return finalize(std::move(raw), h, DomainTag::UnitSquare);
}

Triangulation generate_cross_square(int n) {
  if (n < 2) throw MeshError("generate_cross_square: need n_subdivisions >= 2");
  RawMesh raw;
  const double h = 1.0 / n;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      raw.nodes.push_back({i * h, j * h});
      raw.boundary_flag.push_back(i == 0 || i == n || j == 0 || j == n);
    }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int center = static_cast<int>(raw.nodes.size());
      raw.nodes.push_back({(i + 0.5) * h, (j + 0.5) * h});
      raw.boundary_flag.push_back(false);
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      raw.triangles.push_back({a, b, center});
      raw.triangles.push_back({b, c, center});
      raw.triangles.push_back({c, d, center});
      raw.triangles.push_back({d, a, center});
    }
  return finalize(std::move(raw), h, DomainTag::UnitSquare);
}

Triangulation generate_half_unit_disk(int n_radial) {
  if (n_radial < 2) throw MeshError("generate_half_unit_disk: need n_radial >= 2");
  const Point center{0.5, 0.5};
  const double radius = 0.5;
  RawMesh raw;
  raw.nodes.push_back(center);
  raw.boundary_flag.push_back(false);

  std::vector<std::vector<int>> rings(n_radial + 1);
  std::vector<std::vector<double>> ring_t(n_radial + 1);
  rings[0] = {0};
  ring_t[0] = {0.0};
  for (int i = 1; i <= n_radial; ++i) {
    const int count = 6 * i;
    const double r = radius * i / n_radial;
    for (int k = 0; k < count; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / count;
      raw.nodes.push_back({center.x + r * std::cos(theta), center.y + r * std::sin(theta)});
      raw.boundary_flag.push_back(i == n_radial);
      rings[i].push_back(static_cast<int>(raw.nodes.size()) - 1);
      ring_t[i].push_back(static_cast<double>(k) / count);
    }
  }
  for (int i = 0; i < n_radial; ++i)
    stitch_band(rings[i], ring_t[i], rings[i + 1], ring_t[i + 1], true, raw.triangles);
  return finalize(std::move(raw), radius / n_radial, DomainTag::HalfUnitDisk);
}

Triangulation generate_eye_domain(int n) {
  if (n < 4) throw MeshError("generate_eye_domain: need n_subdivisions >= 4");
  const double h = 1.0 / n;
  RawMesh raw;
  std::vector<std::vector<int>> columns(n + 1);
  std::vector<std::vector<double>> column_t(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    const double half_width = x * (1.0 - x);
    if (i == 0 || i == n) {
      raw.nodes.push_back({x, 0.0});
      raw.boundary_flag.push_back(true);  // cusp
      columns[i] = {static_cast<int>(raw.nodes.size()) - 1};
      column_t[i] = {0.5};
      continue;
    }
    // Number of vertical intervals tapers with the local width so edge
    // lengths stay comparable to h near the cusps.
    const int m = 2 * std::max(1, static_cast<int>(std::lround(half_width / h)));
    for (int j = 0; j <= m; ++j) {
      const double y = -half_width + 2.0 * half_width * j / m;
      raw.nodes.push_back({x, y});
      raw.boundary_flag.push_back(j == 0 || j == m);
      columns[i].push_back(static_cast<int>(raw.nodes.size()) - 1);
      column_t[i].push_back(static_cast<double>(j) / m);
    }
  }
  for (int i = 0; i < n; ++i)
    stitch_band(columns[i], column_t[i], columns[i + 1], column_t[i + 1], false, raw.triangles);
  return finalize(std::move(raw), h, DomainTag::EyeShaped);
}

LoadedMesh parse_mesh(std::istream& in, const std::string& origin) {
  std::vector<std::pair<int, std::string>> data_lines;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    data_lines.emplace_back(line_no, line);
  }
  if (data_lines.empty()) throw MeshError(origin + ": empty mesh file");

  std::size_t cursor = 0;
  auto next_tokens = [&](std::size_t expect) {
    if (cursor >= data_lines.size())
      throw MeshError(origin + ": unexpected end of file");
    auto [no, text] = data_lines[cursor++];
    std::istringstream ss(text);
    std::vector<std::string> toks;
    std::string tok;
    while (ss >> tok) toks.push_back(tok);
    if (toks.size() != expect)
      throw MeshError(origin + ":" + std::to_string(no) + ": expected " +
                      std::to_string(expect) + " fields, got " + std::to_string(toks.size()));
    return std::make_pair(no, toks);
  };

  auto [hdr_no, hdr] = next_tokens(2);
  const int n_nodes = parse_int(hdr[0], origin, hdr_no);
  const int n_tris = parse_int(hdr[1], origin, hdr_no);
  if (n_nodes < 3 || n_tris < 1)
    throw MeshError(origin + ":" + std::to_string(hdr_no) + ": implausible mesh size");

  RawMesh raw;
  for (int i = 0; i < n_nodes; ++i) {
    auto [no, toks] = next_tokens(3);
    raw.nodes.push_back({parse_double(toks[0], origin, no), parse_double(toks[1], origin, no)});
    const int flag = parse_int(toks[2], origin, no);
    if (flag != 0 && flag != 1)
      throw MeshError(origin + ":" + std::to_string(no) + ": node flag must be 0 or 1");
    raw.boundary_flag.push_back(flag == 1);
  }
  for (int t = 0; t < n_tris; ++t) {
    auto [no, toks] = next_tokens(3);
    std::array<int, 3> tri;
    for (int e = 0; e < 3; ++e) {
      tri[e] = parse_int(toks[e], origin, no);
      if (tri[e] < 0 || tri[e] >= n_nodes)
        throw MeshError(origin + ":" + std::to_string(no) + ": node index " +
                        std::to_string(tri[e]) + " out of range");
    }
    const double area = signed_area(raw.nodes[tri[0]], raw.nodes[tri[1]], raw.nodes[tri[2]]);
    if (area < 0.0) std::swap(tri[1], tri[2]);  // orientation repair
    raw.triangles.push_back(tri);
  }

  std::vector<int> incidence(n_nodes, 0);
  for (const auto& tri : raw.triangles)
    for (int v : tri) incidence[v]++;
  for (int v = 0; v < n_nodes; ++v)
    if (incidence[v] == 0)
      throw MeshError(origin + ": node " + std::to_string(v) + " is used by no triangle");

  LoadedMesh loaded;
  loaded.mesh = finalize(std::move(raw), 0.0, DomainTag::External, &loaded.original_index);
  validate_triangulation(loaded.mesh);
  loaded.mesh.h = max_edge_length(loaded.mesh);
  return loaded;
}

LoadedMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  return parse_mesh(in, path);
}

void validate_triangulation(const Triangulation& mesh) {
  const int n = mesh.n_total();
  if (mesh.n_interior < 0 || mesh.n_interior > n)
    throw MeshError("invalid interior node count");

  std::vector<int> incidence(n, 0);
  double min_area = std::numeric_limits<double>::max();
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int v : tri) {
      if (v < 0 || v >= n)
        throw MeshError("triangle " + std::to_string(t) + " references node " + std::to_string(v));
      incidence[v]++;
    }
    const double area = triangle_area(mesh, static_cast<int>(t));
    min_area = std::min(min_area, area);
    if (!(area > 0.0))
      throw MeshError("triangle " + std::to_string(t) + " has non-positive area " + std::to_string(area));
  }
  for (int v = 0; v < n; ++v)
    if (incidence[v] == 0)
      throw MeshError("node " + std::to_string(v) + " is used by no triangle");

  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& tri : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      int c = ++edge_count[{std::min(a, b), std::max(a, b)}];
      if (c > 2)
        throw MeshError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                        ") is shared by more than two triangles");
    }

  std::vector<bool> on_boundary_edge(n, false);
  for (const auto& [edge, count] : edge_count)
    if (count == 1) {
      on_boundary_edge[edge.first] = true;
      on_boundary_edge[edge.second] = true;
    }
  for (int v = 0; v < n; ++v) {
    if (v < mesh.n_interior && on_boundary_edge[v])
      throw MeshError("node " + std::to_string(v) + " is classified interior but lies on a boundary edge");
    if (v >= mesh.n_interior && !on_boundary_edge[v])
      throw MeshError("node " + std::to_string(v) + " is classified boundary but lies on no boundary edge");
  }
}

NodeGeometry compute_node_geometry(const Triangulation& mesh) {
  NodeGeometry geo;
  geo.support_area.assign(mesh.n_total(), 0.0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const double area = triangle_area(mesh, static_cast<int>(t));
    for (int v : mesh.triangles[t]) geo.support_area[v] += area;
  }

  geo.boundary_normal.assign(mesh.n_boundary(), Point{0.0, 0.0});
  if (mesh.domain_tag == DomainTag::HalfUnitDisk) {
    const Point center{0.5, 0.5};
    for (int k = mesh.n_interior; k < mesh.n_total(); ++k) {
      Point d = mesh.nodes[k] - center;
      geo.boundary_normal[k - mesh.n_interior] = (1.0 / norm(d)) * d;
    }
    return geo;
  }
  if (mesh.domain_tag == DomainTag::EyeShaped) {
    for (int k = mesh.n_interior; k < mesh.n_total(); ++k) {
      const Point p = mesh.nodes[k];
      Point nrm;
      if (std::abs(p.y) < 1e-14 && (p.x < 0.5 ? p.x < 1e-14 : p.x > 1.0 - 1e-14)) {
        nrm = {p.x < 0.5 ? -1.0 : 1.0, 0.0};  // cusp: mean of the two arc normals
      } else {
        nrm = {-(1.0 - 2.0 * p.x), p.y > 0.0 ? 1.0 : -1.0};
        nrm = (1.0 / norm(nrm)) * nrm;
      }
      geo.boundary_normal[k - mesh.n_interior] = nrm;
    }
    return geo;
  }

  // Polygonal boundary: average the outward normals of the adjacent boundary
  // edges at each node, then renormalize.
  for (const auto& e : boundary_edges(mesh)) {
    Point d = mesh.nodes[e.to] - mesh.nodes[e.from];
    Point nrm{d.y, -d.x};
    nrm = (1.0 / norm(nrm)) * nrm;
    for (int v : {e.from, e.to}) {
      if (!mesh.is_boundary(v))
        throw MeshError("boundary edge touches interior node " + std::to_string(v));
      geo.boundary_normal[v - mesh.n_interior] =
          geo.boundary_normal[v - mesh.n_interior] + nrm;
    }
  }
  for (auto& nrm : geo.boundary_normal) {
    const double len = norm(nrm);
    if (len < 1e-14) throw MeshError("degenerate boundary normal (antipodal edge normals)");
    nrm = (1.0 / len) * nrm;
  }
  return geo;
}

double triangle_area(const Triangulation& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  return signed_area(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
}

double total_area(const Triangulation& mesh) {
  double area = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    area += triangle_area(mesh, static_cast<int>(t));
  return area;
}

double max_edge_length(const Triangulation& mesh) {
  double len = 0.0;
  for (const auto& tri : mesh.triangles)
    for (int e = 0; e < 3; ++e)
      len = std::max(len, norm(mesh.nodes[tri[e]] - mesh.nodes[tri[(e + 1) % 3]]));
  return len;
}

double min_edge_length(const Triangulation& mesh) {
  double len = std::numeric_limits<double>::max();
  for (const auto& tri : mesh.triangles)
    for (int e = 0; e < 3; ++e)
      len = std::min(len, norm(mesh.nodes[tri[e]] - mesh.nodes[tri[(e + 1) % 3]]));
  return len;
}

}  // namespace opsplit
