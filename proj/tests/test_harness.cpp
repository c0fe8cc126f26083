#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "opsplit/harness.hpp"

using namespace opsplit;
namespace fs = std::filesystem;

namespace {

// Runs the CLI with std::cout redirected; assertions stay outside the capture
// so doctest's own reporting is not swallowed.
int cli(const std::vector<std::string>& args, std::string* captured = nullptr) {
  std::ostringstream buffer;
  std::streambuf* saved = std::cout.rdbuf(buffer.rdbuf());
  int code = -1;
  try {
    code = run_cli(args);
  } catch (...) {
    std::cout.rdbuf(saved);
    throw;
  }
  std::cout.rdbuf(saved);
  if (captured) *captured = buffer.str();
  return code;
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("opsplit_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("compute_rate") {
  CHECK(compute_rate(2.08e-3, 5.21e-4, 1.0 / 10, 1.0 / 20) == doctest::Approx(2.00).epsilon(0.005));
  CHECK(compute_rate(3.0e-5, 3.0e-5, 0.2, 0.1) == doctest::Approx(0.0));
  CHECK(compute_rate(4.0e-2, 1.0e-2, 0.2, 0.1) == doctest::Approx(2.0));
  CHECK_THROWS_AS(compute_rate(0.0, 1e-3, 0.2, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(compute_rate(1e-3, 1e-4, 0.1, 0.2), std::invalid_argument);
}

TEST_CASE("cross_section: linear reproduction and arc length") {
  const auto mesh = generate_regular_square(8);
  NodalField x1(mesh.n_total());
  for (int j = 0; j < mesh.n_total(); ++j) x1[j] = mesh.nodes[j].x;

  const auto horizontal = cross_section(x1, mesh, {0.0, 0.5}, {1.0, 0.0}, 11);
  REQUIRE(horizontal.size() == 11);
  for (const auto& s : horizontal) CHECK(s.value == doctest::Approx(s.arc_length).epsilon(1e-12));

  const NodalField c = 0.75 * NodalField::Ones(mesh.n_total());
  for (const auto& s : cross_section(c, mesh, {0.0, 0.3}, {1.0, 0.0}, 7))
    CHECK(s.value == doctest::Approx(0.75));

  NodalField sum(mesh.n_total());
  for (int j = 0; j < mesh.n_total(); ++j) sum[j] = mesh.nodes[j].x + mesh.nodes[j].y;
  const auto diagonal = cross_section(sum, mesh, {0.0, 0.0}, {1.0, 1.0}, 9);
  REQUIRE(diagonal.size() == 9);
  for (const auto& s : diagonal)
    CHECK(s.value == doctest::Approx(2.0 * s.arc_length / std::sqrt(2.0)).epsilon(1e-12));

  CHECK(cross_section(x1, mesh, {0.0, 5.0}, {1.0, 0.0}, 5).empty());
}

TEST_CASE("report CSV round-trips exactly") {
  RunReport report;
  report.problem = "ma-exp";
  report.mesh_family = "regular";
  report.params.beta = 2.5;
  report.tau = 1.0;
  report.stop_tol = 1e-9;
  LevelReport a;
  a.h = 0.05;
  a.iterations = 17;
  a.err_l2 = 6.69e-5;
  a.err_linf = 1.2e-4;
  a.min_value = 1.0000001;
  a.cpu_seconds = 0.123456789012345;
  a.clamp_events = 2;
  a.gamma = 19.7392081;
  a.status = "converged";
  LevelReport b = a;
  b.h = 0.025;
  b.err_l2 = 1.68e-5;
  b.err_linf = 3.01e-5;
  b.rate_l2 = compute_rate(*a.err_l2, *b.err_l2, a.h, b.h);
  b.rate_linf = compute_rate(*a.err_linf, *b.err_linf, a.h, b.h);
  report.levels = {a, b};

  std::stringstream io;
  write_report_csv(report, io);
  const RunReport parsed = read_report_csv(io);
  CHECK(parsed == report);
}

TEST_CASE("single-level report has no rate columns") {
  RunReport report;
  report.problem = "semilinear-cos";
  report.mesh_family = "regular";
  LevelReport lvl;
  lvl.h = 0.1;
  lvl.iterations = 7;
  lvl.status = "converged";
  report.levels = {lvl};
  std::stringstream io;
  write_report_csv(report, io);
  CHECK(io.str().find("rate_l2") == std::string::npos);
  CHECK(read_report_csv(io) == report);
}

TEST_CASE("run_study: semilinear two-level study has second-order rates") {
  StudyPlan plan;
  plan.problem = "semilinear-cos";
  plan.mesh_family = "regular";
  plan.h_values = {1.0 / 10, 1.0 / 20};
  const RunReport report = run_study(plan);
  REQUIRE(report.levels.size() == 2);
  CHECK(report.levels[0].status == "converged");
  CHECK_FALSE(report.levels[0].rate_l2.has_value());
  REQUIRE(report.levels[1].rate_l2.has_value());
  CHECK(*report.levels[1].rate_l2 == doctest::Approx(2.0).epsilon(0.05));

  StudyPlan bad = plan;
  bad.h_values = {1.0 / 20, 1.0 / 10};
  CHECK_THROWS_AS(run_study(bad), std::invalid_argument);
}

TEST_CASE("run_study: domain mismatch is recorded per level, not thrown") {
  StudyPlan plan;
  plan.problem = "ma-singular";  // posed on the disk
  plan.mesh_family = "regular";
  plan.h_values = {1.0 / 10};
  const RunReport report = run_study(plan);
  REQUIRE(report.levels.size() == 1);
  CHECK(report.levels[0].failed());
}

TEST_CASE("run_study: identical plans give identical bytes apart from timings") {
  StudyPlan plan;
  plan.problem = "semilinear-cos";
  plan.mesh_family = "regular";
  plan.h_values = {1.0 / 10};

  auto strip_cpu = [](const RunReport& r) {
    RunReport copy = r;
    for (auto& lvl : copy.levels) lvl.cpu_seconds = 0.0;
    std::ostringstream out;
    write_report_csv(copy, out);
    return out.str();
  };
  CHECK(strip_cpu(run_study(plan)) == strip_cpu(run_study(plan)));
}

TEST_CASE("build_mesh and parse_h") {
  CHECK(parse_h("1/80") == doctest::Approx(1.0 / 80));
  CHECK(parse_h("0.025") == doctest::Approx(0.025));
  CHECK_THROWS_AS(parse_h("2"), std::invalid_argument);

  CHECK(build_mesh("regular", 0.1).domain_tag == DomainTag::UnitSquare);
  CHECK(build_mesh("disk", 1.0 / 20).domain_tag == DomainTag::HalfUnitDisk);
  CHECK(build_mesh("eye", 0.1).domain_tag == DomainTag::EyeShaped);
  CHECK_THROWS_AS(build_mesh("torus", 0.1), std::invalid_argument);

  const auto dir = temp_dir("meshfile");
  const auto path = dir / "square_10.mesh";
  {
    std::ofstream out(path);
    const auto mesh = generate_regular_square(10);
    out << mesh.n_total() << ' ' << mesh.triangles.size() << "\n";
    for (int j = 0; j < mesh.n_total(); ++j)
      out << mesh.nodes[j].x << ' ' << mesh.nodes[j].y << ' ' << (mesh.is_boundary(j) ? 1 : 0)
          << "\n";
    for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
  }
  const auto loaded = build_mesh("file:" + (dir / "square_{n}.mesh").string(), 0.1);
  CHECK(loaded.n_total() == 121);
  CHECK(loaded.domain_tag == DomainTag::External);
}

TEST_CASE("field CSV round-trip") {
  const auto mesh = generate_regular_square(4);
  NodalField u(mesh.n_total()), w(mesh.n_total());
  for (int j = 0; j < mesh.n_total(); ++j) {
    u[j] = std::sin(j * 0.37);
    w[j] = std::cos(j * 0.11);
  }
  std::stringstream io;
  write_field_csv(mesh, u, w, io);
  const auto [u2, w2] = read_field_csv(io, mesh);
  CHECK((u - u2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((w - w2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cli: list-problems") {
  std::string out;
  CHECK(cli({"list-problems"}, &out) == 0);
  for (const auto& name : problem_names()) CHECK(out.find(name) != std::string::npos);
}

TEST_CASE("cli: usage errors exit with 2") {
  CHECK(cli({"solve", "--problem", "nope", "--mesh", "regular", "--h", "1/10"}) == 2);
  CHECK(cli({"solve", "--problem", "ma-exp", "--no-such-flag"}) == 2);
  CHECK(cli({}) == 2);
}

TEST_CASE("cli: solve and study write their outputs") {
  const auto dir = temp_dir("cli");
  CHECK(cli({"study", "--problem", "ma-quadratic", "--mesh", "regular", "--h", "1/10,1/20",
             "--beta", "1", "--out", (dir / "study").string()}) == 0);
  std::ifstream report_file(dir / "study" / "ma-quadratic_regular_study.csv");
  REQUIRE(report_file.good());
  const RunReport report = read_report_csv(report_file);
  REQUIRE(report.levels.size() == 2);
  for (const auto& lvl : report.levels) {
    CHECK(lvl.status == "converged");
    CHECK(*lvl.err_linf <= 1e-10);
  }

  CHECK(cli({"solve", "--problem", "semilinear-cos", "--mesh", "regular", "--h", "1/10", "--out",
             (dir / "solve").string()}) == 0);
  CHECK(fs::exists(dir / "solve" / "semilinear-cos_1_10_field.csv"));
  CHECK(fs::exists(dir / "solve" / "semilinear-cos_1_10_history.csv"));

  // Output directory path blocked by a regular file: numerical-failure exit 1.
  { std::ofstream(dir / "blocked").put('x'); }
  CHECK(cli({"solve", "--problem", "semilinear-cos", "--mesh", "regular", "--h", "1/10", "--out",
             (dir / "blocked" / "sub").string()}) == 1);
}

TEST_CASE("cli: config file supplies defaults, flags override") {
  const auto dir = temp_dir("config");
  const auto cfg = dir / "run.cfg";
  {
    std::ofstream out(cfg);
    out << "mesh = regular\n"
           "tol = 0.001\n"
           "L = 0.25\n";
  }
  CHECK(cli({"solve", "--problem", "semilinear-cos", "--h", "1/10", "--config", cfg.string(),
             "--out", (dir / "a").string()}) == 0);
  {
    std::ifstream report((dir / "a" / "semilinear-cos_regular_study.csv"));
    REQUIRE(report.good());
    const RunReport parsed = read_report_csv(report);
    CHECK(parsed.stop_tol == 0.001);
    CHECK(parsed.params.L == 0.25);
  }
  // an explicit flag wins over the file value
  CHECK(cli({"solve", "--problem", "semilinear-cos", "--h", "1/10", "--config", cfg.string(),
             "--tol", "1e-9", "--out", (dir / "b").string()}) == 0);
  {
    std::ifstream report((dir / "b" / "semilinear-cos_regular_study.csv"));
    REQUIRE(report.good());
    CHECK(read_report_csv(report).stop_tol == 1e-9);
  }
}

TEST_CASE("cli: section samples a dumped field") {
  const auto dir = temp_dir("section");
  REQUIRE(cli({"solve", "--problem", "semilinear-cos", "--mesh", "regular", "--h", "1/10", "--out",
               dir.string()}) == 0);
  const auto section_path = dir / "section.csv";
  CHECK(cli({"section", "--in", (dir / "semilinear-cos_1_10_field.csv").string(), "--mesh",
             "regular", "--h", "1/10", "--line", "x2=0.5", "--samples", "21", "--out",
             section_path.string()}) == 0);
  std::ifstream in(section_path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "arc_length,value");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 21);

  std::string diag_out;
  CHECK(cli({"section", "--in", (dir / "semilinear-cos_1_10_field.csv").string(), "--mesh",
             "regular", "--h", "1/10", "--line", "x1=x2", "--samples", "5"},
            &diag_out) == 0);
  CHECK(diag_out.rfind("arc_length,value\n", 0) == 0);
  CHECK(std::count(diag_out.begin(), diag_out.end(), '\n') == 6);
}
