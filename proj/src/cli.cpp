#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "opsplit/csv.hpp"
#include "opsplit/harness.hpp"

namespace opsplit {

namespace {

struct CommonFlags {
  std::string problem;
  std::string mesh = "regular";
  std::string h_text;
  std::string config_path;
  double tau = 1.0;
  std::optional<double> gamma;
  double tol = 1e-9;
  int max_iterations = 10000;
  std::optional<double> epsilon;
  ProblemParams params;
  std::string out_dir = ".";
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool multi_h) {
  cmd->set_help_flag("--help", "print this help");  // frees -h/--h for the mesh size
  cmd->add_option("--problem", flags.problem, "problem name (see list-problems)")->required();
  cmd->add_option("--mesh", flags.mesh, "regular | cross | disk | eye | file:PATH");
  cmd->add_option("--h", flags.h_text,
                  multi_h ? "mesh sizes, e.g. 1/10,1/20 or 0.05,0.025" : "mesh size, e.g. 1/80")
      ->required();
  cmd->add_option("--tau", flags.tau, "time step");
  cmd->add_option("--gamma", flags.gamma, "relaxation rate (default: smallest -Laplace eigenvalue)");
  cmd->add_option("--tol", flags.tol, "stopping tolerance on ||u^{n+1}-u^n||_0");
  cmd->add_option("--max-iterations", flags.max_iterations, "iteration budget");
  cmd->add_option("--epsilon", flags.epsilon,
                  "Tikhonov parameter override (default: 0 on regular, h^2 elsewhere)");
  cmd->add_option("--L", flags.params.L, "semilinear Lipschitz constant");
  cmd->add_option("--alpha", flags.params.alpha, "Pucci parameter, > 1");
  cmd->add_option("--beta", flags.params.beta, "quadratic anisotropy parameter");
  cmd->add_option("--delta", flags.params.delta, "indicator regularization width");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--config", flags.config_path,
                  "config file with `key = value` lines; flags take precedence");
}

// Expands `--config FILE` into trailing `--key value` pairs for every file
// entry whose flag was not given explicitly.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  auto trim = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
  };
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line '" + line + "' is not `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    bool given = false;
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
    if (!given) {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

StudyPlan plan_from_flags(const CommonFlags& flags) {
  StudyPlan plan;
  plan.problem = flags.problem;
  plan.params = flags.params;
  plan.mesh_family = flags.mesh;
  std::stringstream ss(flags.h_text);
  std::string item;
  while (std::getline(ss, item, ',')) plan.h_values.push_back(parse_h(item));
  plan.config.tau = flags.tau;
  plan.config.gamma = flags.gamma;
  plan.config.stop_tol = flags.tol;
  plan.config.max_iterations = flags.max_iterations;
  if (flags.epsilon)
    plan.hessian_override = HessianConfig{*flags.epsilon, *flags.epsilon > 0.0};
  plan.out_dir = flags.out_dir;
  return plan;
}

void print_report(const RunReport& report) {
  for (const auto& lvl : report.levels) {
    std::cout << "h=" << csv::format(lvl.h);
    if (lvl.failed()) {
      std::cout << " " << lvl.status << "\n";
      continue;
    }
    std::cout << " iterations=" << lvl.iterations;
    if (lvl.err_l2) std::cout << " err_l2=" << csv::format(*lvl.err_l2);
    if (lvl.err_linf) std::cout << " err_linf=" << csv::format(*lvl.err_linf);
    if (lvl.rate_l2) std::cout << " rate_l2=" << csv::format(*lvl.rate_l2);
    if (lvl.rate_linf) std::cout << " rate_linf=" << csv::format(*lvl.rate_linf);
    std::cout << " min=" << csv::format(lvl.min_value) << " gamma=" << csv::format(lvl.gamma)
              << " clamps=" << lvl.clamp_events << " cpu_s=" << csv::format(lvl.cpu_seconds)
              << " status=" << lvl.status << "\n";
  }
}

int report_exit_code(const RunReport& report) {
  for (const auto& lvl : report.levels)
    if (lvl.failed()) {
      std::cerr << "error: h=" << csv::format(lvl.h) << " " << lvl.status << "\n";
      return 1;
    }
  return 0;
}

struct LineSpec {
  Point point;
  Point direction;
};

LineSpec parse_line_spec(std::string text) {
  std::erase(text, ' ');
  if (text == "x1=x2" || text == "x2=x1") return {{0.0, 0.0}, {1.0, 1.0}};
  const auto eq = text.find('=');
  if (eq != std::string::npos && (text.rfind("x1", 0) == 0 || text.rfind("x2", 0) == 0)) {
    const double c = std::stod(text.substr(eq + 1));
    if (text[1] == '1') return {{c, 0.0}, {0.0, 1.0}};
    return {{0.0, c}, {1.0, 0.0}};
  }
  throw std::invalid_argument("cannot parse line '" + text +
                              "' (expected x1=C, x2=C, or x1=x2)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Operator-splitting FEM solvers for semilinear, Monge-Ampere, and Pucci problems"};
  app.set_help_flag("--help", "print this help");
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list-problems", "print the registered problem names");

  CommonFlags solve_flags;
  auto* solve_cmd = app.add_subcommand("solve", "run one solve and dump field + history CSVs");
  add_common_flags(solve_cmd, solve_flags, false);

  CommonFlags study_flags;
  auto* study_cmd = app.add_subcommand("study", "run a mesh-refinement study and write a report CSV");
  add_common_flags(study_cmd, study_flags, true);

  std::string sec_in, sec_mesh = "regular", sec_h, sec_line, sec_out;
  int sec_samples = 101;
  auto* section_cmd = app.add_subcommand("section", "sample a dumped field along a line");
  section_cmd->set_help_flag("--help", "print this help");
  section_cmd->add_option("--in", sec_in, "field CSV written by solve/study")->required();
  section_cmd->add_option("--mesh", sec_mesh, "mesh family the field was computed on");
  section_cmd->add_option("--h", sec_h, "mesh size of that run")->required();
  section_cmd->add_option("--line", sec_line, "x1=C, x2=C, or x1=x2")->required();
  section_cmd->add_option("--samples", sec_samples, "number of sample points");
  section_cmd->add_option("--out", sec_out, "output CSV (default: stdout)");

  std::vector<std::string> expanded;
  try {
    expanded = apply_config_file(args);
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  std::vector<const char*> argv_like;
  argv_like.push_back("opsplit");
  for (const auto& a : expanded) argv_like.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv_like.size()), argv_like.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& name : problem_names()) std::cout << name << "\n";
      return 0;
    }
    if (solve_cmd->parsed() || study_cmd->parsed()) {
      const CommonFlags& flags = solve_cmd->parsed() ? solve_flags : study_flags;
      StudyPlan plan = plan_from_flags(flags);
      if (solve_cmd->parsed() && plan.h_values.size() != 1)
        throw std::invalid_argument("solve takes exactly one --h value; use study for sweeps");
      const RunReport report = run_study(plan);
      print_report(report);
      return report_exit_code(report);
    }
    if (section_cmd->parsed()) {
      const double h = parse_h(sec_h);
      const Triangulation mesh = build_mesh(sec_mesh, h);
      std::ifstream in(sec_in);
      if (!in) throw std::runtime_error("cannot open field file '" + sec_in + "'");
      const auto [u, w] = read_field_csv(in, mesh);
      const LineSpec line = parse_line_spec(sec_line);
      const auto samples = cross_section(u, mesh, line.point, line.direction, sec_samples);
      if (samples.empty())
        std::cerr << "warning: line '" << sec_line << "' does not intersect the mesh\n";
      std::ostream* out = &std::cout;
      std::ofstream file;
      if (!sec_out.empty()) {
        file.open(sec_out);
        if (!file) throw std::runtime_error("cannot open output file '" + sec_out + "'");
        out = &file;
      }
      *out << "arc_length,value\n";
      for (const auto& s : samples)
        *out << csv::format(s.arc_length) << ',' << csv::format(s.value) << '\n';
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace opsplit
