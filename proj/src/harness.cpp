#include "opsplit/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "opsplit/csv.hpp"

namespace opsplit {

namespace {

std::string h_label(double h) {
  const double inv = 1.0 / h;
  const long n = std::lround(inv);
  if (n >= 1 && std::abs(inv - n) < 1e-9 * inv) return "1_" + std::to_string(n);
  std::ostringstream ss;
  ss << h;
  std::string s = ss.str();
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

}  // namespace

bool operator==(const LevelReport& a, const LevelReport& b) {
  return a.h == b.h && a.iterations == b.iterations && a.err_l2 == b.err_l2 &&
         a.err_linf == b.err_linf && a.rate_l2 == b.rate_l2 && a.rate_linf == b.rate_linf &&
         a.min_value == b.min_value && a.cpu_seconds == b.cpu_seconds &&
         a.clamp_events == b.clamp_events && a.gamma == b.gamma && a.status == b.status;
}

bool operator==(const RunReport& a, const RunReport& b) {
  return a.problem == b.problem && a.mesh_family == b.mesh_family &&
         a.params.L == b.params.L && a.params.alpha == b.params.alpha &&
         a.params.beta == b.params.beta && a.params.delta == b.params.delta &&
         a.tau == b.tau && a.stop_tol == b.stop_tol && a.levels == b.levels;
}

double parse_h(const std::string& text) {
  const auto slash = text.find('/');
  double value;
  if (slash != std::string::npos) {
    const double num = std::stod(text.substr(0, slash));
    const double den = std::stod(text.substr(slash + 1));
    if (den == 0.0) throw std::invalid_argument("mesh size '" + text + "' divides by zero");
    value = num / den;
  } else {
    value = std::stod(text);
  }
  if (!(value > 0.0) || value >= 1.0)
    throw std::invalid_argument("mesh size '" + text + "' out of range (0,1)");
  return value;
}

Triangulation build_mesh(const std::string& mesh_family, double h) {
  const int n = static_cast<int>(std::lround(1.0 / h));
  if (mesh_family == "regular") return generate_regular_square(n);
  if (mesh_family == "cross") return generate_cross_square(n);
  if (mesh_family == "disk") return generate_half_unit_disk(static_cast<int>(std::lround(0.5 / h)));
  if (mesh_family == "eye") return generate_eye_domain(n);
  if (mesh_family.rfind("file:", 0) == 0) {
    std::string path = mesh_family.substr(5);
    const std::string token = "{n}";
    if (const auto pos = path.find(token); pos != std::string::npos)
      path.replace(pos, token.size(), std::to_string(n));
    return load_mesh(path).mesh;
  }
  throw std::invalid_argument("unknown mesh family '" + mesh_family +
                              "' (expected regular, cross, disk, eye, or file:PATH)");
}

HessianConfig default_hessian_config(const std::string& mesh_family, double h) {
  if (mesh_family == "regular" || mesh_family == "cross") return HessianConfig{0.0, false};
  return HessianConfig{h * h, true};
}

double compute_rate(double err_coarse, double err_fine, double h_coarse, double h_fine) {
  if (!(err_coarse > 0.0) || !(err_fine > 0.0))
    throw std::invalid_argument("compute_rate needs positive errors");
  if (!(h_coarse > h_fine) || !(h_fine > 0.0))
    throw std::invalid_argument("compute_rate needs h_coarse > h_fine > 0");
  return std::log(err_coarse / err_fine) / std::log(h_coarse / h_fine);
}

RunReport run_study(const StudyPlan& plan) {
  if (plan.h_values.empty()) throw std::invalid_argument("study needs at least one h value");
  for (std::size_t i = 1; i < plan.h_values.size(); ++i)
    if (!(plan.h_values[i] < plan.h_values[i - 1]))
      throw std::invalid_argument("study h values must be strictly decreasing");

  RunReport report;
  report.problem = plan.problem;
  report.mesh_family = plan.mesh_family;
  report.params = plan.params;
  report.tau = plan.config.tau;
  report.stop_tol = plan.config.stop_tol;

  const ProblemSpec probe = make_problem(plan.problem, plan.params);  // validates the name early

  for (double h : plan.h_values) {
    LevelReport level;
    level.h = h;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      Triangulation mesh = build_mesh(plan.mesh_family, h);
      if (std::find(probe.domains.begin(), probe.domains.end(), mesh.domain_tag) ==
          probe.domains.end())
        throw std::invalid_argument("problem '" + plan.problem + "' is not posed on " +
                                    to_string(mesh.domain_tag));
      const NodeGeometry geometry = compute_node_geometry(mesh);
      const ProblemSpec problem = make_problem(plan.problem, plan.params);

      SplittingConfig config = plan.config;
      config.hessian = plan.hessian_override
                           ? *plan.hessian_override
                           : default_hessian_config(plan.mesh_family, h);

      const RunResult result = run(problem, mesh, geometry, config);

      level.iterations = result.log.iterations();
      level.gamma = result.gamma_used;
      level.clamp_events = result.clamp_events_final;
      level.min_value = result.u.minCoeff();
      level.status = to_string(result.log.status);
      if (problem.exact) {
        NodalField err(mesh.n_total());
        for (int j = 0; j < mesh.n_total(); ++j)
          err[j] = result.u[j] - (*problem.exact)(mesh.nodes[j]);
        level.err_l2 = lumped_l2_norm(err, geometry);
        level.err_linf = err.cwiseAbs().maxCoeff();
      }
      level.cpu_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

      if (!plan.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(plan.out_dir);
        const std::string stem = plan.problem + "_" + h_label(h);
        std::ofstream hist(fs::path(plan.out_dir) / (stem + "_history.csv"));
        write_csv(result.log, hist);
        std::ofstream field(fs::path(plan.out_dir) / (stem + "_field.csv"));
        write_field_csv(mesh, result.u, result.w, field);
        if (!hist || !field)
          throw std::runtime_error("cannot write outputs under '" + plan.out_dir + "'");
      }
    } catch (const std::exception& e) {
      level.status = std::string("failed: ") + e.what();
    }
    report.levels.push_back(level);
  }

  // Rates between consecutive non-failed levels with positive errors.
  for (std::size_t i = 1; i < report.levels.size(); ++i) {
    auto& fine = report.levels[i];
    const auto& coarse = report.levels[i - 1];
    if (fine.failed() || coarse.failed()) continue;
    if (coarse.err_l2 && fine.err_l2 && *coarse.err_l2 > 0.0 && *fine.err_l2 > 0.0)
      fine.rate_l2 = compute_rate(*coarse.err_l2, *fine.err_l2, coarse.h, fine.h);
    if (coarse.err_linf && fine.err_linf && *coarse.err_linf > 0.0 && *fine.err_linf > 0.0)
      fine.rate_linf = compute_rate(*coarse.err_linf, *fine.err_linf, coarse.h, fine.h);
  }

  if (!plan.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(plan.out_dir);
    std::ofstream out(fs::path(plan.out_dir) /
                      (plan.problem + "_" + plan.mesh_family + "_study.csv"));
    write_report_csv(report, out);
    if (!out) throw std::runtime_error("cannot write report under '" + plan.out_dir + "'");
  }
  return report;
}

std::vector<SectionSample> cross_section(const NodalField& u, const Triangulation& mesh,
                                         Point point, Point direction, int n_samples) {
  if (n_samples < 1) throw std::invalid_argument("cross_section needs n_samples >= 1");
  const double dlen = norm(direction);
  if (dlen == 0.0) throw std::invalid_argument("cross_section needs a nonzero direction");
  const Point dir = (1.0 / dlen) * direction;

  // Intersection range of the line with the mesh: collect the parameters of
  // every edge crossing.
  double t_min = std::numeric_limits<double>::max();
  double t_max = std::numeric_limits<double>::lowest();
  const double scale = std::max(max_edge_length(mesh), 1.0);
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const Point a = mesh.nodes[tri[e]];
      const Point b = mesh.nodes[tri[(e + 1) % 3]];
      const double fa = cross(dir, a - point);
      const double fb = cross(dir, b - point);
      const double tol = 1e-14 * scale;
      if (std::abs(fa) <= tol) {
        const double t = dot(dir, a - point);
        t_min = std::min(t_min, t);
        t_max = std::max(t_max, t);
      }
      if ((fa < -tol && fb > tol) || (fa > tol && fb < -tol)) {
        const double s = fa / (fa - fb);
        const Point x = a + s * (b - a);
        const double t = dot(dir, x - point);
        t_min = std::min(t_min, t);
        t_max = std::max(t_max, t);
      }
    }
  }
  std::vector<SectionSample> samples;
  if (t_min > t_max) return samples;  // line misses the mesh

  auto locate = [&](Point p) -> std::optional<double> {
    for (const auto& tri : mesh.triangles) {
      const Point p0 = mesh.nodes[tri[0]], p1 = mesh.nodes[tri[1]], p2 = mesh.nodes[tri[2]];
      const double area = signed_area(p0, p1, p2);
      const double b0 = signed_area(p, p1, p2) / area;
      const double b1 = signed_area(p0, p, p2) / area;
      const double b2 = signed_area(p0, p1, p) / area;
      const double tol = -1e-10;
      if (b0 >= tol && b1 >= tol && b2 >= tol)
        return b0 * u[tri[0]] + b1 * u[tri[1]] + b2 * u[tri[2]];
    }
    return std::nullopt;
  };

  for (int k = 0; k < n_samples; ++k) {
    const double t =
        n_samples == 1 ? 0.5 * (t_min + t_max)
                       : t_min + (t_max - t_min) * static_cast<double>(k) / (n_samples - 1);
    const Point p = point + t * dir;
    if (auto value = locate(p)) samples.push_back({t - t_min, *value});
  }
  return samples;
}

void write_report_csv(const RunReport& report, std::ostream& out) {
  out << "# problem = " << report.problem << '\n';
  out << "# mesh = " << report.mesh_family << '\n';
  out << "# L = " << csv::format(report.params.L) << '\n';
  out << "# alpha = " << csv::format(report.params.alpha) << '\n';
  out << "# beta = " << csv::format(report.params.beta) << '\n';
  out << "# delta = " << csv::format(report.params.delta) << '\n';
  out << "# tau = " << csv::format(report.tau) << '\n';
  out << "# tol = " << csv::format(report.stop_tol) << '\n';
  const bool with_rates = report.levels.size() > 1;
  out << "h,iterations,err_l2,err_linf";
  if (with_rates) out << ",rate_l2,rate_linf";
  out << ",min_value,cpu_seconds,clamp_events,gamma,status\n";
  for (const auto& lvl : report.levels) {
    out << csv::format(lvl.h) << ',' << lvl.iterations << ',' << csv::format(lvl.err_l2) << ','
        << csv::format(lvl.err_linf);
    if (with_rates) out << ',' << csv::format(lvl.rate_l2) << ',' << csv::format(lvl.rate_linf);
    std::string status = lvl.status;
    std::replace(status.begin(), status.end(), ',', ';');
    out << ',' << csv::format(lvl.min_value) << ',' << csv::format(lvl.cpu_seconds) << ','
        << lvl.clamp_events << ',' << csv::format(lvl.gamma) << ',' << status << '\n';
  }
}

RunReport read_report_csv(std::istream& in) {
  RunReport report;
  std::string line;
  bool with_rates = false;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      std::string value = line.substr(eq + 1);
      auto trim = [](std::string& s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
      };
      trim(key);
      trim(value);
      if (key == "problem") report.problem = value;
      else if (key == "mesh") report.mesh_family = value;
      else if (key == "L") report.params.L = std::strtod(value.c_str(), nullptr);
      else if (key == "alpha") report.params.alpha = std::strtod(value.c_str(), nullptr);
      else if (key == "beta") report.params.beta = std::strtod(value.c_str(), nullptr);
      else if (key == "delta") report.params.delta = std::strtod(value.c_str(), nullptr);
      else if (key == "tau") report.tau = std::strtod(value.c_str(), nullptr);
      else if (key == "tol") report.stop_tol = std::strtod(value.c_str(), nullptr);
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      with_rates = line.find(",rate_l2,") != std::string::npos;
      continue;
    }
    const auto cells = csv::split_line(line);
    const std::size_t expect = with_rates ? 11 : 9;
    if (cells.size() != expect)
      throw std::runtime_error("report row has " + std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(expect));
    LevelReport lvl;
    std::size_t c = 0;
    lvl.h = std::strtod(cells[c++].c_str(), nullptr);
    lvl.iterations = std::atoi(cells[c++].c_str());
    lvl.err_l2 = csv::parse_optional(cells[c++]);
    lvl.err_linf = csv::parse_optional(cells[c++]);
    if (with_rates) {
      lvl.rate_l2 = csv::parse_optional(cells[c++]);
      lvl.rate_linf = csv::parse_optional(cells[c++]);
    }
    lvl.min_value = std::strtod(cells[c++].c_str(), nullptr);
    lvl.cpu_seconds = std::strtod(cells[c++].c_str(), nullptr);
    lvl.clamp_events = std::atol(cells[c++].c_str());
    lvl.gamma = std::strtod(cells[c++].c_str(), nullptr);
    lvl.status = cells[c++];
    report.levels.push_back(lvl);
  }
  if (!header_seen) throw std::runtime_error("report CSV has no header row");
  return report;
}

void write_field_csv(const Triangulation& mesh, const NodalField& u, const NodalField& w,
                     std::ostream& out) {
  out << "node_index,x,y,u,w\n";
  for (int j = 0; j < mesh.n_total(); ++j)
    out << j << ',' << csv::format(mesh.nodes[j].x) << ',' << csv::format(mesh.nodes[j].y) << ','
        << csv::format(u[j]) << ',' << csv::format(w[j]) << '\n';
}

std::pair<NodalField, NodalField> read_field_csv(std::istream& in, const Triangulation& mesh) {
  NodalField u = NodalField::Zero(mesh.n_total());
  NodalField w = NodalField::Zero(mesh.n_total());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("field CSV is empty");
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = csv::split_line(line);
    if (cells.size() != 5) throw std::runtime_error("field CSV row needs 5 cells");
    const int j = std::atoi(cells[0].c_str());
    if (j < 0 || j >= mesh.n_total())
      throw std::runtime_error("field CSV node index out of range");
    u[j] = std::strtod(cells[3].c_str(), nullptr);
    w[j] = std::strtod(cells[4].c_str(), nullptr);
    ++rows;
  }
  if (rows != mesh.n_total())
    throw std::runtime_error("field CSV has " + std::to_string(rows) + " rows for a mesh with " +
                             std::to_string(mesh.n_total()) + " nodes");
  return {u, w};
}

}  // namespace opsplit
