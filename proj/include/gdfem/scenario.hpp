// scenario.hpp -- batch driver: scenario configuration (JSON), run
// orchestration for all formulations, force-displacement CSV output, VTU
// field export, and the timing comparison against a pure-elastic reference.
#pragma once

#include "gdfem/penalty_ref.hpp"
#include "gdfem/solver.hpp"
#include "gdfem/verify.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace gdfem {

using json = nlohmann::json;

enum class ScenarioKind { CubeCountTest, PlateWithHole, CustomMesh };
enum class Formulation { LagrangeMixed, Penalty, Local, Elastic };

struct MeshSource {
  enum class Kind { Plate, Cube, File };
  Kind kind = Kind::Plate;
  int refinement = 0;        // plate
  int subdivisions = 2;      // cube
  double edge_length = 1.0;  // cube [mm]
  double radius = 50.0, length = 100.0, thickness = 10.0;  // plate [mm]
  std::string path;          // file
  MeshFormat format = MeshFormat::SimpleNodesElements;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::PlateWithHole;
  Formulation formulation = Formulation::LagrangeMixed;
  double penalty_p = 10.0;
  MaterialParams material =
      MaterialParams::from_E_nu(1000.0, 0.3, 0.0, 1.0, 100.0);
  LoadProgram load;
  MeshSource mesh;
  std::vector<BCSpec> bcs;  // custom-mesh only; standard scenarios are wired
  std::string observation_tag = "yL";
  int reaction_component = 1;
  std::string output_dir = "out";
  int snapshot_every = 0;  // 0 disables field export
  SolverOptions solver;
  int count_steps = 3;
  std::string config_hash;
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(const std::string& s) {
  std::ostringstream os;
  os << std::hex << fnv1a(s);
  return os.str();
}

template <class T>
T config_get(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw Error("config key missing: " + path + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error("config key invalid: " + path + key + " (" + e.what() + ")");
  }
}

template <class T>
T config_get_or(const json& j, const std::string& key, const T& fallback,
                const std::string& path) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error("config key invalid: " + path + key + " (" + e.what() + ")");
  }
}

}  // namespace detail

inline ScenarioConfig parse_config(const json& j) {
  using detail::config_get;
  using detail::config_get_or;
  ScenarioConfig cfg;

  const std::string scenario = config_get<std::string>(j, "scenario", "/");
  if (scenario == "cube-count-test")
    cfg.scenario = ScenarioKind::CubeCountTest;
  else if (scenario == "plate-with-hole")
    cfg.scenario = ScenarioKind::PlateWithHole;
  else if (scenario == "custom-mesh")
    cfg.scenario = ScenarioKind::CustomMesh;
  else
    throw Error("config key invalid: /scenario (unknown value '" + scenario +
                "')");

  const std::string form =
      config_get_or<std::string>(j, "formulation", "lagrange-mixed", "/");
  if (form == "lagrange-mixed")
    cfg.formulation = Formulation::LagrangeMixed;
  else if (form == "penalty")
    cfg.formulation = Formulation::Penalty;
  else if (form == "local")
    cfg.formulation = Formulation::Local;
  else if (form == "elastic")
    cfg.formulation = Formulation::Elastic;
  else
    throw Error("config key invalid: /formulation (unknown value '" + form +
                "')");
  cfg.penalty_p = config_get_or<double>(j, "penalty_p", 10.0, "/");

  if (cfg.scenario != ScenarioKind::CubeCountTest || j.contains("material")) {
    const json& m = j.contains("material") ? j.at("material") : json::object();
    if (!j.contains("material")) throw Error("config key missing: /material");
    cfg.material = MaterialParams::from_E_nu(
        config_get<double>(m, "E", "/material/"),
        config_get<double>(m, "nu", "/material/"),
        config_get<double>(m, "d0", "/material/"),
        config_get<double>(m, "d1", "/material/"),
        config_get<double>(m, "c", "/material/"));
  }

  if (j.contains("load")) {
    const json& l = j.at("load");
    const std::string kind =
        config_get_or<std::string>(l, "kind", "monotone-ramp", "/load/");
    if (kind == "monotone-ramp")
      cfg.load.kind = LoadProgram::Kind::MonotoneRamp;
    else if (kind == "cyclic")
      cfg.load.kind = LoadProgram::Kind::Cyclic;
    else
      throw Error("config key invalid: /load/kind");
    cfg.load.n_steps = config_get<int>(l, "n_steps", "/load/");
    if (cfg.load.n_steps < 1) throw Error("config key invalid: /load/n_steps");
    cfg.load.u_max = config_get<double>(l, "u_max", "/load/");
  } else if (cfg.scenario != ScenarioKind::CubeCountTest) {
    throw Error("config key missing: /load");
  }

  if (j.contains("mesh")) {
    const json& m = j.at("mesh");
    const std::string src = config_get<std::string>(m, "source", "/mesh/");
    if (src == "plate") {
      cfg.mesh.kind = MeshSource::Kind::Plate;
      cfg.mesh.refinement = config_get_or<int>(m, "refinement", 0, "/mesh/");
      cfg.mesh.radius = config_get_or<double>(m, "radius", 50.0, "/mesh/");
      cfg.mesh.length = config_get_or<double>(m, "length", 100.0, "/mesh/");
      cfg.mesh.thickness =
          config_get_or<double>(m, "thickness", 10.0, "/mesh/");
    } else if (src == "cube") {
      cfg.mesh.kind = MeshSource::Kind::Cube;
      cfg.mesh.subdivisions =
          config_get_or<int>(m, "subdivisions", 2, "/mesh/");
      cfg.mesh.edge_length =
          config_get_or<double>(m, "edge_length", 1.0, "/mesh/");
    } else if (src == "file") {
      cfg.mesh.kind = MeshSource::Kind::File;
      cfg.mesh.path = config_get<std::string>(m, "path", "/mesh/");
      const std::string fmt =
          config_get_or<std::string>(m, "format", "simple", "/mesh/");
      if (fmt == "simple")
        cfg.mesh.format = MeshFormat::SimpleNodesElements;
      else if (fmt == "gmsh")
        cfg.mesh.format = MeshFormat::GmshAscii;
      else
        throw Error("config key invalid: /mesh/format");
    } else {
      throw Error("config key invalid: /mesh/source");
    }
  }

  if (j.contains("bcs")) {
    for (const auto& b : j.at("bcs")) {
      BCSpec bc;
      bc.tag = config_get<std::string>(b, "tag", "/bcs/");
      bc.component = config_get<int>(b, "component", "/bcs/");
      bc.scale = config_get<double>(b, "scale", "/bcs/");
      if (bc.component < 0 || bc.component > 2)
        throw Error("config key invalid: /bcs/component");
      cfg.bcs.push_back(bc);
    }
  }

  cfg.observation_tag =
      detail::config_get_or<std::string>(j, "observation_tag", "yL", "/");
  cfg.reaction_component =
      detail::config_get_or<int>(j, "reaction_component", 1, "/");
  cfg.output_dir = detail::config_get_or<std::string>(j, "output_dir", "out", "/");
  cfg.snapshot_every = detail::config_get_or<int>(j, "snapshot_every", 0, "/");
  cfg.count_steps = detail::config_get_or<int>(j, "count_steps", 3, "/");

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    cfg.solver.newton_tol =
        detail::config_get_or<double>(s, "newton_tol", 1e-8, "/solver/");
    cfg.solver.max_iterations =
        detail::config_get_or<int>(s, "max_iterations", 50, "/solver/");
    cfg.solver.max_bisections =
        detail::config_get_or<int>(s, "max_bisections", 6, "/solver/");
    cfg.solver.threads =
        detail::config_get_or<int>(s, "threads", threads_from_env(), "/solver/");
  } else {
    cfg.solver.threads = threads_from_env();
  }

  // environment overrides
  if (const char* env = std::getenv("GDFEM_OUTPUT_DIR")) cfg.output_dir = env;
  if (const char* env = std::getenv("GDFEM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) cfg.solver.threads = n;
  }

  cfg.config_hash = detail::hash_hex(j.dump());
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("config parse failure in " + path + ": " + e.what());
  }
  return parse_config(j);
}

inline Mesh build_scenario_mesh(const ScenarioConfig& cfg) {
  switch (cfg.mesh.kind) {
    case MeshSource::Kind::Plate:
      return generate_quarter_plate_with_hole(cfg.mesh.radius, cfg.mesh.length,
                                              cfg.mesh.thickness,
                                              cfg.mesh.refinement);
    case MeshSource::Kind::Cube:
      return generate_structured_cube(cfg.mesh.subdivisions,
                                      cfg.mesh.edge_length);
    case MeshSource::Kind::File:
      return import_mesh(cfg.mesh.path, cfg.mesh.format);
  }
  throw Error("unreachable mesh source");
}

// Standard displacement-driven boundary conditions: the three symmetry
// planes pinned component-wise, the observation surface driven in Y.
inline std::vector<BCSpec> scenario_bcs(const ScenarioConfig& cfg) {
  if (cfg.scenario == ScenarioKind::CustomMesh) {
    if (cfg.bcs.empty())
      throw Error("config key missing: /bcs (required for custom-mesh)");
    return cfg.bcs;
  }
  return {{"x0", 0, 0.0}, {"y0", 1, 0.0}, {"z0", 2, 0.0}, {"yL", 1, 1.0}};
}

// ---------------------------------------------------------------------------
// Field snapshots and VTU export
// ---------------------------------------------------------------------------

struct FieldSnapshot {
  int step = 0;
  std::vector<Vec3> displacement;      // per vertex
  std::vector<double> damage_l2;       // per element, RMS of D over the rule
  std::vector<double> lambda;          // per element
  std::vector<double> alpha_bar_min;   // per element
  std::vector<double> alpha_bar_max;   // per element
};

inline FieldSnapshot make_snapshot(const MixedGdSolver& solver, int step) {
  const Mesh& mesh = solver.mesh();
  const ShapeTable& table = solver.shape_table();
  FieldSnapshot snap;
  snap.step = step;
  snap.displacement.resize(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v)
    for (int c = 0; c < 3; ++c)
      snap.displacement[v][c] = solver.state()[solver.dofmap().u_dof(v, c)];
  snap.damage_l2.resize(mesh.num_tets());
  snap.lambda.resize(mesh.num_tets());
  snap.alpha_bar_min.resize(mesh.num_tets());
  snap.alpha_bar_max.resize(mesh.num_tets());
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const ElementDofs dofs = solver.gather(t);
    double sum = 0.0;
    for (int g = 0; g < table.num_points(); ++g) {
      const double D = 1.0 - std::exp(-alpha_at_gauss_point(table, dofs, g));
      sum += table.pts[g].weight * D * D;
    }
    snap.damage_l2[t] = std::sqrt(sum);
    snap.lambda[t] = solver.internal()[t].lambda;
    const auto& h = solver.history()[t];
    snap.alpha_bar_min[t] = *std::min_element(h.alpha_bar.begin(), h.alpha_bar.end());
    snap.alpha_bar_max[t] = *std::max_element(h.alpha_bar.begin(), h.alpha_bar.end());
  }
  return snap;
}

// Unstructured-grid XML (VTU-compatible ASCII): linear tets with point
// displacement vectors and the per-element damage measure, multiplier and
// history summary as cell data.
inline void export_fields(const FieldSnapshot& snap, const Mesh& mesh,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path);
  out.precision(12);
  const int nv = mesh.num_vertices(), nt = mesh.num_tets();
  out << "<?xml version=\"1.0\"?>\n"
      << "<VTKFile type=\"UnstructuredGrid\" version=\"0.1\" "
         "byte_order=\"LittleEndian\">\n"
      << " <UnstructuredGrid>\n"
      << "  <Piece NumberOfPoints=\"" << nv << "\" NumberOfCells=\"" << nt
      << "\">\n";
  out << "   <Points>\n    <DataArray type=\"Float64\" "
         "NumberOfComponents=\"3\" format=\"ascii\">\n";
  for (const auto& v : mesh.vertices)
    out << "     " << v[0] << " " << v[1] << " " << v[2] << "\n";
  out << "    </DataArray>\n   </Points>\n";
  out << "   <Cells>\n    <DataArray type=\"Int64\" Name=\"connectivity\" "
         "format=\"ascii\">\n";
  for (const auto& t : mesh.tets)
    out << "     " << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
  out << "    </DataArray>\n    <DataArray type=\"Int64\" Name=\"offsets\" "
         "format=\"ascii\">\n     ";
  for (int t = 1; t <= nt; ++t) out << 4 * t << " ";
  out << "\n    </DataArray>\n    <DataArray type=\"UInt8\" Name=\"types\" "
         "format=\"ascii\">\n     ";
  for (int t = 0; t < nt; ++t) out << "10 ";
  out << "\n    </DataArray>\n   </Cells>\n";
  out << "   <PointData Vectors=\"displacement\">\n"
      << "    <DataArray type=\"Float64\" Name=\"displacement\" "
         "NumberOfComponents=\"3\" format=\"ascii\">\n";
  for (const auto& u : snap.displacement)
    out << "     " << u[0] << " " << u[1] << " " << u[2] << "\n";
  out << "    </DataArray>\n   </PointData>\n";
  out << "   <CellData>\n";
  auto cell_array = [&](const std::string& name,
                        const std::vector<double>& data) {
    out << "    <DataArray type=\"Float64\" Name=\"" << name
        << "\" format=\"ascii\">\n     ";
    for (double d : data) out << d << " ";
    out << "\n    </DataArray>\n";
  };
  cell_array("damage_l2", snap.damage_l2);
  cell_array("lambda", snap.lambda);
  cell_array("alpha_bar_min", snap.alpha_bar_min);
  cell_array("alpha_bar_max", snap.alpha_bar_max);
  out << "   </CellData>\n  </Piece>\n </UnstructuredGrid>\n</VTKFile>\n";
  if (!out) throw Error("failed writing field export: " + path);
}

struct VtuCounts {
  int points = 0;
  int cells = 0;
};

// Reader fragment for round-trip checks of the exporter output.
inline VtuCounts read_vtu_counts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open VTU file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find("NumberOfPoints=\"");
    if (pos == std::string::npos) continue;
    VtuCounts counts;
    counts.points = std::atoi(line.c_str() + pos + 16);
    const auto cpos = line.find("NumberOfCells=\"");
    if (cpos == std::string::npos)
      throw FormatError("Piece header missing NumberOfCells", 0);
    counts.cells = std::atoi(line.c_str() + cpos + 15);
    return counts;
  }
  throw FormatError("no Piece header found in VTU file", 0);
}

// ---------------------------------------------------------------------------
// CSV and report serialization
// ---------------------------------------------------------------------------

inline void write_force_displacement_csv(const SolveReport& report,
                                         const std::string& config_hash,
                                         std::ostream& os) {
  os << "# force-displacement record; units: u_prescribed mm, reaction N, "
        "times ms\n";
  os << "# config " << config_hash << "\n";
  os << "step,time,u_prescribed_mm,reaction_N,newton_iters,D_max,assembly_ms,"
        "solve_ms\n";
  os.precision(12);
  for (const auto& s : report.steps)
    os << s.step << "," << s.time << "," << s.u_prescribed << "," << s.reaction
       << "," << s.newton_iters << "," << s.d_max << "," << s.assembly_ms
       << "," << s.solve_ms << "\n";
}

inline json report_to_json(const SolveReport& report) {
  json j;
  j["completed"] = report.completed;
  j["abort_reason"] = report.abort_reason;
  j["total_assembly_ms"] = report.total_assembly_ms;
  j["total_solve_ms"] = report.total_solve_ms;
  j["total_newton_iters"] = report.total_newton_iters;
  j["worst_irreversibility_defect"] = report.worst_irreversibility_defect;
  j["min_gauss_alpha"] = report.min_gauss_alpha;
  j["metadata"] = report.metadata;
  j["steps"] = json::array();
  for (const auto& s : report.steps) {
    json js;
    js["step"] = s.step;
    js["time"] = s.time;
    js["u_prescribed_mm"] = s.u_prescribed;
    js["reaction_N"] = s.reaction;
    js["newton_iters"] = s.newton_iters;
    js["D_max"] = s.d_max;
    js["assembly_ms"] = s.assembly_ms;
    js["solve_ms"] = s.solve_ms;
    j["steps"].push_back(js);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Run orchestration
// ---------------------------------------------------------------------------

struct RunResult {
  SolveReport report;
  int exit_status = 0;
  Mesh mesh;
};

namespace detail {

template <class Solver>
SolveReport run_with_snapshots(Solver& solver, const ScenarioConfig& cfg,
                               const Mesh& mesh,
                               const std::filesystem::path& outdir) {
  RunOptions run;
  run.observation_tag = cfg.observation_tag;
  run.reaction_component = cfg.reaction_component;
  if (cfg.snapshot_every > 0) {
    run.on_step = [&](int step, const StepRecord&) {
      if (step % cfg.snapshot_every != 0 && step != cfg.load.n_steps) return;
      if constexpr (std::is_same_v<Solver, MixedGdSolver>) {
        const FieldSnapshot snap = make_snapshot(solver, step);
        std::ostringstream name;
        name << "step_" << std::setw(4) << std::setfill('0') << step << ".vtu";
        export_fields(snap, mesh, (outdir / name.str()).string());
      }
    };
  }
  return run_program(solver, cfg.load, run);
}

}  // namespace detail

inline RunResult run_scenario(const ScenarioConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path outdir(cfg.output_dir);
  fs::create_directories(outdir);

  RunResult result;

  if (cfg.scenario == ScenarioKind::CubeCountTest) {
    const auto rows = count_test_cube_series(cfg.count_steps);
    std::ofstream csv(outdir / "count_test.csv");
    csv << "# count test; config " << cfg.config_hash << "\n";
    csv << "refinement_step,dim_V,dim_M,count_without_bubble,count_with_bubble\n";
    std::ofstream txt(outdir / "count_test.txt");
    txt << "refinement  dim_V  dim_M  without_bubble  with_bubble\n";
    for (size_t s = 0; s < rows.size(); ++s) {
      const auto& r = rows[s];
      csv << s + 1 << "," << r.dim_V << "," << r.dim_M << ","
          << r.without_bubble << "," << r.with_bubble << "\n";
      txt << s + 1 << "  " << r.dim_V << "  " << r.dim_M << "  "
          << r.without_bubble << "  " << r.with_bubble << "\n";
    }
    result.report.completed = true;
    return result;
  }

  result.mesh = build_scenario_mesh(cfg);
  const std::vector<BCSpec> bcs = scenario_bcs(cfg);

  SolveReport report;
  switch (cfg.formulation) {
    case Formulation::LagrangeMixed:
    case Formulation::Local: {
      MaterialParams mat = cfg.material;
      if (cfg.formulation == Formulation::Local)
        mat = MaterialParams::from_E_nu(mat.E, mat.nu, mat.d0, mat.d1, 0.0);
      MixedGdSolver solver(result.mesh, mat, bcs, cfg.solver);
      report = detail::run_with_snapshots(solver, cfg, result.mesh, outdir);
      break;
    }
    case Formulation::Penalty: {
      PenaltySolver solver(result.mesh,
                           PenaltyParams(cfg.material, cfg.penalty_p), bcs,
                           cfg.solver);
      report = detail::run_with_snapshots(solver, cfg, result.mesh, outdir);
      break;
    }
    case Formulation::Elastic: {
      ElasticSolver solver(result.mesh, cfg.material, bcs, cfg.solver);
      report = detail::run_with_snapshots(solver, cfg, result.mesh, outdir);
      break;
    }
  }
  report.metadata["config_hash"] = cfg.config_hash;
  report.metadata["threads"] = std::to_string(cfg.solver.threads);
  report.metadata["z_plane_constraint"] = "u_Z = 0 on z0";
  report.metadata["reaction_recovery"] =
      "sum of constrained-dof residuals on " + cfg.observation_tag;

  {
    std::ofstream csv(outdir / "force_displacement.csv");
    write_force_displacement_csv(report, cfg.config_hash, csv);
    std::ofstream js(outdir / "report.json");
    js << report_to_json(report).dump(2) << "\n";
  }

  result.report = std::move(report);
  result.exit_status = result.report.completed ? 0 : 2;
  return result;
}

inline int run(const std::string& config_path) {
  const ScenarioConfig cfg = load_config(config_path);
  return run_scenario(cfg).exit_status;
}

// ---------------------------------------------------------------------------
// Timing comparison
// ---------------------------------------------------------------------------

struct TimingComparison {
  SolveReport report_a;
  SolveReport report_b;
  double assembly_ratio = 0.0;  // a / b
  double solve_ratio = 0.0;
  double total_ratio = 0.0;
  double l2_norm_a = 0.0;
  double l2_norm_b = 0.0;
};

// Runs both configurations and reports time ratios. The two runs must use
// the same mesh and the same number of steps.
inline TimingComparison timing_comparison(const ScenarioConfig& a,
                                          const ScenarioConfig& b) {
  const Mesh mesh_a = build_scenario_mesh(a);
  const Mesh mesh_b = build_scenario_mesh(b);
  if (mesh_a.num_vertices() != mesh_b.num_vertices() ||
      mesh_a.num_tets() != mesh_b.num_tets())
    throw std::invalid_argument("timing comparison requires matching meshes");
  if (a.load.n_steps != b.load.n_steps)
    throw std::invalid_argument("timing comparison requires matching step counts");

  TimingComparison cmp;
  auto run_one = [&](const ScenarioConfig& cfg, const Mesh& mesh,
                     SolveReport& report, double& l2) {
    const auto bcs = scenario_bcs(cfg);
    RunOptions run;
    run.observation_tag = cfg.observation_tag;
    run.reaction_component = cfg.reaction_component;
    switch (cfg.formulation) {
      case Formulation::LagrangeMixed:
      case Formulation::Local: {
        MaterialParams mat = cfg.material;
        if (cfg.formulation == Formulation::Local)
          mat = MaterialParams::from_E_nu(mat.E, mat.nu, mat.d0, mat.d1, 0.0);
        MixedGdSolver solver(mesh, mat, bcs, cfg.solver);
        report = run_program(solver, cfg.load, run);
        l2 = displacement_l2_norm(mesh, solver);
        break;
      }
      case Formulation::Penalty: {
        PenaltySolver solver(mesh, PenaltyParams(cfg.material, cfg.penalty_p),
                             bcs, cfg.solver);
        report = run_program(solver, cfg.load, run);
        l2 = displacement_l2_norm(mesh, solver);
        break;
      }
      case Formulation::Elastic: {
        ElasticSolver solver(mesh, cfg.material, bcs, cfg.solver);
        report = run_program(solver, cfg.load, run);
        l2 = displacement_l2_norm(mesh, solver);
        break;
      }
    }
  };
  run_one(a, mesh_a, cmp.report_a, cmp.l2_norm_a);
  run_one(b, mesh_b, cmp.report_b, cmp.l2_norm_b);

  auto ratio = [](double x, double y) { return y > 0.0 ? x / y : 0.0; };
  cmp.assembly_ratio =
      ratio(cmp.report_a.total_assembly_ms, cmp.report_b.total_assembly_ms);
  cmp.solve_ratio =
      ratio(cmp.report_a.total_solve_ms, cmp.report_b.total_solve_ms);
  cmp.total_ratio =
      ratio(cmp.report_a.total_assembly_ms + cmp.report_a.total_solve_ms,
            cmp.report_b.total_assembly_ms + cmp.report_b.total_solve_ms);
  return cmp;
}

}  // namespace gdfem
