#pragma once

#include <iosfwd>

#include "opsplit/splitting.hpp"

namespace opsplit {

/// A mesh-refinement study: one problem, one mesh family, several h levels.
struct StudyPlan {
  std::string problem;
  ProblemParams params;
  std::string mesh_family = "regular";  // regular | disk | eye | file:PATH
  std::vector<double> h_values;         // strictly decreasing
  SplittingConfig config;
  std::optional<HessianConfig> hessian_override;  // default: by mesh family, eps = h^2
  std::string out_dir;                            // empty: no files written
};

struct LevelReport {
  double h = 0.0;
  int iterations = 0;
  std::optional<double> err_l2, err_linf;
  std::optional<double> rate_l2, rate_linf;
  double min_value = 0.0;
  double cpu_seconds = 0.0;
  long clamp_events = 0;  // clamp count in the final iteration
  double gamma = 0.0;
  std::string status;  // converged | max-iterations | diverged | failed: <msg>
  bool failed() const { return status.rfind("failed", 0) == 0; }
};

struct RunReport {
  std::string problem;
  std::string mesh_family;
  ProblemParams params;
  double tau = 1.0;
  double stop_tol = 1e-9;
  std::vector<LevelReport> levels;
};

bool operator==(const LevelReport& a, const LevelReport& b);
bool operator==(const RunReport& a, const RunReport& b);

/// Runs every level (failures are recorded, not fatal), fills the empirical
/// convergence rates, and writes the report plus per-level history and field
/// files when an output directory is set.
RunReport run_study(const StudyPlan& plan);

/// Empirical order of convergence log(err_coarse/err_fine)/log(h_coarse/h_fine).
double compute_rate(double err_coarse, double err_fine, double h_coarse, double h_fine);

struct SectionSample {
  double arc_length;  // measured from the first point of the mesh intersection
  double value;
};

/// P1 samples of u at n_samples equispaced points along the intersection of
/// the line (point + t * direction) with the mesh; points that land outside
/// every triangle are omitted. An empty result means the line missed the mesh.
std::vector<SectionSample> cross_section(const NodalField& u, const Triangulation& mesh,
                                         Point point, Point direction, int n_samples);

void write_report_csv(const RunReport& report, std::ostream& out);
RunReport read_report_csv(std::istream& in);

/// Field dump: node_index, x, y, u, w.
void write_field_csv(const Triangulation& mesh, const NodalField& u, const NodalField& w,
                     std::ostream& out);
/// Reads u and w back from a field dump; validates the node count.
std::pair<NodalField, NodalField> read_field_csv(std::istream& in, const Triangulation& mesh);

/// Builds the mesh for one study level. For `file:PATH` meshes, PATH may
/// contain `{n}`, replaced by round(1/h).
Triangulation build_mesh(const std::string& mesh_family, double h);

/// Default Hessian treatment: plain interior recovery on the regular square,
/// boundary repair plus Tikhonov eps = h^2 everywhere else.
HessianConfig default_hessian_config(const std::string& mesh_family, double h);

/// Parses "1/80" or "0.0125".
double parse_h(const std::string& text);

int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace opsplit
