// Copyright (c) The polymfd Authors.
// SPDX-License-Identifier: Apache-2.0
//
// polymfd command line: mesh generation, elemental diagnostics, solves and
// convergence studies. Outputs are JSON/VTK files and CSV tables; exit codes
// are 0 success, 1 diagnostic failure, 2 usage/config error, 3 numerical
// failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polymfd/assemble.hpp"
#include "polymfd/generate.hpp"
#include "polymfd/interp.hpp"
#include "polymfd/mesh_io.hpp"
#include "polymfd/parallel.hpp"
#include "polymfd/post.hpp"
#include "polymfd/solve.hpp"

namespace {

using nlohmann::json;
using namespace polymfd;

constexpr int kExitOk = 0;
constexpr int kExitDiagnostic = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", x);
  return buf;
}

struct RunConfig {
  std::string mesh;  // file path or "kind:n[:delta[:seed]]"
  std::vector<int> levels;
  std::string method = "nodal";
  std::string problem = "trig";
  std::string tensor = "identity";
  std::optional<Mat3> tensor_values;
  Vec3 beta = Vec3::Zero();
  double u_scale_f = 1.0;
  double u_scale_n = 1.0;
  bool sd = false;
  double tau_scale = 1.0;
  std::string cell_weights = "uniform";
  std::string out = "polymfd";
  std::optional<std::uint64_t> seed;
  std::string solver = "direct";
  double solver_tol = 1e-12;
};

// Flag values collected by CLI11; unset members fall back to the config file
// and then to the defaults above.
struct FlagOverrides {
  std::string config;
  std::optional<std::string> mesh, out, problem, tensor, method, cell_weights;
  std::optional<double> u_scale_f, u_scale_n;
  std::optional<std::uint64_t> seed;
  std::vector<int> levels;
  bool sd = false;
};

void reject_unknown_keys(const json& obj, const std::vector<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InvalidParam("unknown config key \"" + key + "\" in " + where);
    }
  }
}

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  if (path.empty()) {
    return cfg;
  }
  std::ifstream in(path);
  if (!in) {
    throw InvalidParam("cannot open config file '" + path + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidParam(std::string("config parse error: ") + e.what());
  }
  reject_unknown_keys(doc,
                      {"mesh", "levels", "method", "problem", "u_scale_f", "u_scale_n", "sd",
                       "tau_scale", "cell_weights", "out", "seed", "solver"},
                      "config root");
  try {
    if (doc.contains("mesh")) cfg.mesh = doc["mesh"].get<std::string>();
    if (doc.contains("levels")) cfg.levels = doc["levels"].get<std::vector<int>>();
    if (doc.contains("method")) cfg.method = doc["method"].get<std::string>();
    if (doc.contains("problem")) {
      const json& p = doc["problem"];
      reject_unknown_keys(p, {"name", "K", "beta"}, "problem");
      if (p.contains("name")) cfg.problem = p["name"].get<std::string>();
      if (p.contains("K")) {
        if (p["K"].is_string()) {
          cfg.tensor = p["K"].get<std::string>();
        } else {
          const auto rows = p["K"].get<std::vector<std::vector<double>>>();
          if (rows.size() != 3 || rows[0].size() != 3 || rows[1].size() != 3 ||
              rows[2].size() != 3) {
            throw InvalidParam("problem.K must be a name or a 3x3 array");
          }
          Mat3 K;
          for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
              K(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
          }
          cfg.tensor_values = K;
        }
      }
      if (p.contains("beta")) {
        const auto b = p["beta"].get<std::vector<double>>();
        if (b.size() != 3) {
          throw InvalidParam("problem.beta must have three components");
        }
        cfg.beta = Vec3(b[0], b[1], b[2]);
      }
    }
    if (doc.contains("u_scale_f")) cfg.u_scale_f = doc["u_scale_f"].get<double>();
    if (doc.contains("u_scale_n")) cfg.u_scale_n = doc["u_scale_n"].get<double>();
    if (doc.contains("sd")) cfg.sd = doc["sd"].get<bool>();
    if (doc.contains("tau_scale")) cfg.tau_scale = doc["tau_scale"].get<double>();
    if (doc.contains("cell_weights")) cfg.cell_weights = doc["cell_weights"].get<std::string>();
    if (doc.contains("out")) cfg.out = doc["out"].get<std::string>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("solver")) {
      const json& s = doc["solver"];
      reject_unknown_keys(s, {"type", "tol"}, "solver");
      if (s.contains("type")) cfg.solver = s["type"].get<std::string>();
      if (s.contains("tol")) cfg.solver_tol = s["tol"].get<double>();
    }
  } catch (const json::exception& e) {
    throw InvalidParam(std::string("config type error: ") + e.what());
  }
  return cfg;
}

RunConfig merge_config(const FlagOverrides& flags) {
  RunConfig cfg = load_config(flags.config);
  if (flags.mesh) cfg.mesh = *flags.mesh;
  if (flags.out) cfg.out = *flags.out;
  if (flags.problem) cfg.problem = *flags.problem;
  if (flags.tensor) {
    cfg.tensor = *flags.tensor;
    cfg.tensor_values.reset();
  }
  if (flags.method) cfg.method = *flags.method;
  if (flags.cell_weights) cfg.cell_weights = *flags.cell_weights;
  if (flags.u_scale_f) cfg.u_scale_f = *flags.u_scale_f;
  if (flags.u_scale_n) cfg.u_scale_n = *flags.u_scale_n;
  if (flags.seed) cfg.seed = flags.seed;
  if (!flags.levels.empty()) cfg.levels = flags.levels;
  if (flags.sd) cfg.sd = true;
  return cfg;
}

struct MeshRequest {
  bool from_file = false;
  std::string file;
  MeshKind kind = MeshKind::Hex;
  int n = 1;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

MeshRequest parse_mesh_request(const std::string& text, std::optional<std::uint64_t> seed) {
  if (text.empty()) {
    throw InvalidParam("no mesh given (use --mesh <file> or --mesh kind:n[:delta[:seed]])");
  }
  MeshRequest req;
  if (text.find(':') == std::string::npos) {
    req.from_file = true;
    req.file = text;
    return req;
  }
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    parts.push_back(item);
  }
  try {
    req.kind = parse_mesh_kind(parts.at(0));
    req.n = std::stoi(parts.at(1));
    if (parts.size() > 2) req.delta = std::stod(parts[2]);
    if (parts.size() > 3) req.seed = std::stoull(parts[3]);
  } catch (const InvalidParam&) {
    throw;
  } catch (const std::exception&) {
    throw InvalidParam("malformed mesh spec '" + text + "'");
  }
  if (seed) {
    req.seed = *seed;
  }
  return req;
}

PolyMesh realize_mesh(const MeshRequest& req) {
  return req.from_file ? load_mesh(req.file)
                       : generate_mesh(req.kind, req.n, req.delta, req.seed);
}

Mat3 config_tensor(const RunConfig& cfg) {
  return cfg.tensor_values ? *cfg.tensor_values : named_tensor(cfg.tensor);
}

CellWeightMode config_cell_weights(const RunConfig& cfg) {
  if (cfg.cell_weights == "uniform") return CellWeightMode::Uniform;
  if (cfg.cell_weights == "moment") return CellWeightMode::Moment;
  throw InvalidParam("cell_weights must be uniform or moment");
}

SolverOptions config_solver(const RunConfig& cfg) {
  SolverOptions opts;
  opts.tol = cfg.solver_tol;
  if (cfg.solver == "direct") {
    opts.type = SolverOptions::Type::Direct;
  } else if (cfg.solver == "cg") {
    opts.type = SolverOptions::Type::CG;
  } else {
    throw InvalidParam("solver type must be direct or cg");
  }
  return opts;
}

struct Discretization {
  PolyMesh mesh;
  QuadratureWeights quad;
  MaterialSample material;
  std::vector<LocalElementMatrices> forms;
  ProblemSpec spec;
};

Discretization discretize(PolyMesh mesh, const RunConfig& cfg) {
  Discretization d{std::move(mesh), {}, {}, {}, {}};
  d.spec = make_problem(cfg.problem, config_tensor(cfg), cfg.beta);
  d.quad = build_quadrature(d.mesh, config_cell_weights(cfg));
  d.material = sample_material(d.mesh, d.spec);
  d.forms = build_forms(d.mesh, d.quad, d.material,
                        StabilizationConfig{cfg.u_scale_f, cfg.u_scale_n});
  return d;
}

int cmd_generate(const RunConfig& cfg) {
  const MeshRequest req = parse_mesh_request(cfg.mesh, cfg.seed);
  if (req.from_file) {
    throw InvalidParam("generate-mesh needs a generator spec, not a file");
  }
  const PolyMesh mesh = realize_mesh(req);
  save_mesh(mesh, cfg.out);
  std::cout << "wrote " << cfg.out << " (" << mesh.n_cells() << " cells, " << mesh.n_vertices()
            << " vertices, " << mesh.n_faces() << " faces)\n";
  return kExitOk;
}

int cmd_check(const RunConfig& cfg) {
  constexpr double kResidualGate = 1e-10;
  PolyMesh mesh = realize_mesh(parse_mesh_request(cfg.mesh, cfg.seed));
  const ValidationReport validation = validate_mesh(mesh);

  Discretization d = discretize(std::move(mesh), cfg);
  const std::string csv_path = cfg.out + "_check.csv";
  std::ofstream csv(csv_path);
  csv << "cell,res_mnr,res_mba,ex_mixed,ex_nodal,kernel_mn,cF_low,cF_high,cN_low,cN_high\n";

  double worst = 0.0;
  for (int c = 0; c < d.mesh.n_cells(); ++c) {
    const LocalElementMatrices& m = d.forms[static_cast<std::size_t>(c)];
    const double vol = d.mesh.cells[static_cast<std::size_t>(c)].volume;
    const Mat3 K = d.material.K[static_cast<std::size_t>(c)];

    const double res_mnr = (m.M_F * m.N - m.R).norm() / m.R.norm();
    const double res_mba = (m.M_N * m.B - m.A).norm() / m.A.norm();
    const double ex_mixed = (m.N.transpose() * m.M_F * m.N - vol * K).norm() / (vol * K.norm());
    const double ex_nodal = (m.B.transpose() * m.M_N * m.B - vol * K).norm() / (vol * K.norm());
    const double kernel = (m.M_N * Eigen::VectorXd::Ones(m.M_N.rows())).norm() / m.M_N.norm();
    const auto [cf_lo, cf_hi] = spectral_check(m.M_F, d.mesh, c, SpectralKind::F);
    const auto [cn_lo, cn_hi] = spectral_check(m.M_N, d.mesh, c, SpectralKind::N);

    worst = std::max({worst, res_mnr, res_mba, ex_mixed, ex_nodal, kernel});
    csv << c << ',' << fmt(res_mnr) << ',' << fmt(res_mba) << ',' << fmt(ex_mixed) << ','
        << fmt(ex_nodal) << ',' << fmt(kernel) << ',' << fmt(cf_lo) << ',' << fmt(cf_hi) << ','
        << fmt(cn_lo) << ',' << fmt(cn_hi) << '\n';
  }
  std::cout << "wrote " << csv_path << "; max residual " << worst << "; mesh "
            << (validation.ok() ? "valid" : "INVALID") << "\n";
  for (const auto& v : validation.violations) {
    std::cerr << "violation: " << v << "\n";
  }
  return (validation.ok() && worst <= kResidualGate) ? kExitOk : kExitDiagnostic;
}

json solution_summary(const Discretization& d, const SolveInfo& info, double wall_ms) {
  json summary;
  summary["dof"] = {{"cells", d.mesh.n_cells()},
                    {"faces", d.mesh.n_faces()},
                    {"vertices", d.mesh.n_vertices()},
                    {"edges", d.mesh.n_edges()}};
  summary["h"] = d.mesh.h;
  summary["solver"] = {{"method", info.method},
                       {"iterations", info.iterations},
                       {"residual", info.residual}};
  summary["wall_ms"] = wall_ms;
  return summary;
}

int cmd_solve(const RunConfig& cfg) {
  if (cfg.method != "nodal" && cfg.method != "mixed" && cfg.method != "advect") {
    throw InvalidParam("method must be nodal, mixed or advect");
  }
  const auto t0 = std::chrono::steady_clock::now();
  Discretization d = discretize(realize_mesh(parse_mesh_request(cfg.mesh, cfg.seed)), cfg);
  const SolverOptions opts = config_solver(cfg);

  json fields;
  SolveInfo info;
  std::map<std::string, NodeField> point_data;
  std::map<std::string, CellField> cell_data;
  json summary;

  if (cfg.method == "mixed") {
    const MixedSolution sol = solve_mixed(assemble_mixed(d.mesh, d.forms, d.spec), opts);
    info = sol.info;
    fields["face"] = std::vector<double>(sol.flux.data().begin(), sol.flux.data().end());
    fields["cell"] = std::vector<double>(sol.pressure.data().begin(), sol.pressure.data().end());
    cell_data.emplace("pressure", sol.pressure);
    double weighted = 0.0;
    for (int c = 0; c < d.mesh.n_cells(); ++c) {
      weighted += d.mesh.cells[static_cast<std::size_t>(c)].volume * sol.pressure[c];
    }
    const auto t1 = std::chrono::steady_clock::now();
    summary =
        solution_summary(d, info, std::chrono::duration<double, std::milli>(t1 - t0).count());
    summary["pressure_weighted_mean"] = weighted;
    summary["multiplier"] = sol.multiplier;
  } else {
    const NodalSystem system =
        cfg.method == "nodal"
            ? assemble_nodal(d.mesh, d.forms, d.quad, d.material, d.spec)
            : assemble_advection(d.mesh, d.forms, d.quad, d.material, d.spec,
                                 AdvectionConfig{cfg.sd, cfg.tau_scale});
    const NodalSolution sol = solve_nodal(d.mesh, system, nullptr, opts);
    info = sol.info;
    fields["node"] = std::vector<double>(sol.u.data().begin(), sol.u.data().end());
    point_data.emplace("u", sol.u);
    const auto t1 = std::chrono::steady_clock::now();
    summary =
        solution_summary(d, info, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }

  std::ofstream(cfg.out + "_summary.json") << summary.dump(1) << "\n";
  std::ofstream(cfg.out + "_solution.json") << fields.dump(1) << "\n";
  export_vtk(d.mesh, cfg.out + ".vtk", point_data, cell_data);
  std::cout << "wrote " << cfg.out << "_solution.json (residual " << info.residual << ")\n";
  return kExitOk;
}

std::string rate_cell(const std::optional<double>& r) { return r ? fmt(*r) : "exact"; }

int cmd_convergence(const RunConfig& cfg) {
  if (cfg.levels.size() < 2) {
    throw BadSequence("convergence needs at least two refinement levels");
  }
  if (cfg.method != "nodal" && cfg.method != "mixed" && cfg.method != "advect" &&
      cfg.method != "both") {
    throw InvalidParam("method must be nodal, mixed, advect or both");
  }
  const MeshRequest base = parse_mesh_request(cfg.mesh, cfg.seed);
  if (base.from_file) {
    throw InvalidParam("convergence needs a generator spec, not a mesh file");
  }
  const SolverOptions opts = config_solver(cfg);

  std::vector<ErrorReport> reports;
  for (int n : cfg.levels) {
    MeshRequest req = base;
    req.n = n;
    Discretization d = discretize(realize_mesh(req), cfg);

    ErrorReport report;
    report.h = d.mesh.h;
    report.n_cells = d.mesh.n_cells();
    report.n_faces = d.mesh.n_faces();
    report.n_vertices = d.mesh.n_vertices();

    if (cfg.method == "nodal" || cfg.method == "advect" || cfg.method == "both") {
      const NodalSystem system =
          cfg.method == "advect"
              ? assemble_advection(d.mesh, d.forms, d.quad, d.material, d.spec,
                                   AdvectionConfig{cfg.sd, cfg.tau_scale})
              : assemble_nodal(d.mesh, d.forms, d.quad, d.material, d.spec);
      const NodalSolution sol = solve_nodal(d.mesh, system, nullptr, opts);
      const ErrorReport en = nodal_errors(d.mesh, d.forms, d.quad, d.material, d.spec, sol.u);
      report.nodal = en.nodal;
      report.grad = en.grad;
      report.post = en.post;  // replaced by the mixed postprocessing below
    }
    if (cfg.method == "mixed" || cfg.method == "both") {
      const MixedSolution sol = solve_mixed(assemble_mixed(d.mesh, d.forms, d.spec), opts);
      const ErrorReport em = mixed_errors(d.mesh, d.forms, d.material, d.spec, sol);
      report.cell = em.cell;
      report.flux = em.flux;
      report.post = em.post;
    }
    reports.push_back(report);
  }

  const std::vector<ErrorRates> rates = convergence_rates(reports);
  const std::string csv_path = cfg.out + "_convergence.csv";
  std::ofstream csv(csv_path);
  csv << "h,n_cells,err_nodal,err_cell,err_flux,err_grad,err_post,"
         "rate_nodal,rate_cell,rate_flux,rate_grad,rate_post\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const ErrorReport& r = reports[i];
    csv << fmt(r.h) << ',' << r.n_cells << ',' << fmt(r.nodal) << ',' << fmt(r.cell) << ','
        << fmt(r.flux) << ',' << fmt(r.grad) << ',' << fmt(r.post);
    if (i == 0) {
      csv << ",,,,,\n";
    } else {
      const ErrorRates& rr = rates[i - 1];
      csv << ',' << rate_cell(rr.nodal) << ',' << rate_cell(rr.cell) << ','
          << rate_cell(rr.flux) << ',' << rate_cell(rr.grad) << ',' << rate_cell(rr.post)
          << '\n';
    }
  }
  csv.close();
  std::cout << "wrote " << csv_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"low-order nodal and mixed mimetic finite differences on polyhedral meshes"};
  app.require_subcommand(1);

  FlagOverrides flags;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config, "JSON config file (flags take precedence)");
    cmd->add_option("--mesh", flags.mesh, "mesh file or generator spec kind:n[:delta[:seed]]");
    cmd->add_option("--out", flags.out, "output prefix/path");
    cmd->add_option("--seed", flags.seed, "generator seed override");
    cmd->add_option("--problem", flags.problem, "manufactured problem name (linear|trig)");
    cmd->add_option("--tensor", flags.tensor,
                    "diffusion tensor name (identity|diag10|anisotropic)");
    cmd->add_option("--u-scale-f", flags.u_scale_f, "face stabilization scale");
    cmd->add_option("--u-scale-n", flags.u_scale_n, "nodal stabilization scale");
    cmd->add_option("--cell-weights", flags.cell_weights,
                    "cell quadrature weights (uniform|moment)");
  };

  CLI::App* generate = app.add_subcommand("generate-mesh", "write a generated mesh to JSON");
  add_common(generate);
  CLI::App* check = app.add_subcommand("check", "per-cell consistency diagnostics to CSV");
  add_common(check);
  CLI::App* solve = app.add_subcommand("solve", "run one solve and write solution artifacts");
  add_common(solve);
  solve->add_option("--method", flags.method, "nodal|mixed|advect");
  solve->add_flag("--sd", flags.sd, "enable the streamline-diffusion term");
  CLI::App* convergence =
      app.add_subcommand("convergence", "refinement study with error and rate table");
  add_common(convergence);
  convergence->add_option("--method", flags.method, "nodal|mixed|advect|both");
  convergence->add_option("--levels", flags.levels, "subdivisions per level, e.g. 2 4 8");
  convergence->add_flag("--sd", flags.sd, "enable the streamline-diffusion term");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const RunConfig cfg = merge_config(flags);
    if (generate->parsed()) return cmd_generate(cfg);
    if (check->parsed()) return cmd_check(cfg);
    if (solve->parsed()) return cmd_solve(cfg);
    if (convergence->parsed()) return cmd_convergence(cfg);
    return kExitUsage;
  } catch (const InvalidParam& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const SchemaVersionMismatch& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const BadSequence& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const NoConvergence& e) {
    std::cerr << e.what() << "\n";
    return kExitNumerical;
  } catch (const SingularFactorization& e) {
    std::cerr << e.what() << "\n";
    return kExitNumerical;
  } catch (const SingularSystem& e) {
    std::cerr << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitDiagnostic;
  }
}
