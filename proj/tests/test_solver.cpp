#include "gdfem/solver.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "helpers.hpp"

using namespace gdfem;
using namespace gdfem_test;

namespace {

const MaterialParams kParams =
    MaterialParams::from_E_nu(1000.0, 0.3, 0.5, 1.0, 10.0);

}  // namespace

TEST_CASE("solve_linear: identity system") {
  LinearSystem sys;
  sys.K.resize(3, 3);
  sys.K.setIdentity();
  Eigen::VectorXd R(3);
  R << 1, 0, 0;  // residual e1; rhs is -R
  sys.rhs = -R;
  solve_linear(sys);
  CHECK((sys.solution - Eigen::Vector3d(-1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("solve_linear: random SPD system vs dense oracle") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd(0.0, 1.0);
  const int n = 50;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
  const Eigen::MatrixXd spd =
      A * A.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = nd(rng);

  LinearSystem sys;
  sys.K = spd.sparseView();
  sys.rhs = rhs;
  solve_linear(sys);
  const Eigen::VectorXd dense = spd.fullPivLu().solve(rhs);
  CHECK((sys.solution - dense).cwiseAbs().maxCoeff() <
        1e-10 * dense.cwiseAbs().maxCoeff());
}

TEST_CASE("solve_linear: zero rhs short-circuits") {
  LinearSystem sys;
  sys.K.resize(2, 2);
  sys.K.setIdentity();
  sys.rhs = Eigen::VectorXd::Zero(2);
  solve_linear(sys);
  CHECK(sys.solution.norm() == 0.0);
}

TEST_CASE("dofmap dimensions and constraints") {
  const Mesh mesh = generate_structured_cube(2, 1.0);
  const std::vector<BCSpec> bcs = {{"x0", 0, 0.0}, {"y0", 1, 0.0},
                                   {"z0", 2, 0.0}, {"yL", 1, 1.0}};
  const DofMap map = build_dofmap(mesh, bcs, true);
  CHECK(map.n_ext() == 3 * (mesh.num_vertices() + mesh.num_edges()) +
                           mesh.num_vertices());
  const DofMap elastic = build_dofmap(mesh, bcs, false);
  CHECK(elastic.n_ext() == 3 * (mesh.num_vertices() + mesh.num_edges()));
  // every constrained dof appears exactly once
  std::set<int> seen;
  for (const auto& c : map.dirichlet) CHECK(seen.insert(c.dof).second);
}

TEST_CASE("load program factors") {
  LoadProgram ramp{100, LoadProgram::Kind::MonotoneRamp, 25.0};
  CHECK(ramp.factor(0) == 0.0);
  CHECK(ramp.factor(50) == Catch::Approx(0.5));
  CHECK(ramp.prescribed(100) == Catch::Approx(25.0));

  LoadProgram cyc{100, LoadProgram::Kind::Cyclic, 25.0};
  CHECK(cyc.factor(0) == 0.0);
  // hand-evaluated: at t = T/2 the factor is 2^(-0.6) (sin(4.25 pi) + 1)/2
  const double expected = std::pow(0.5, 0.6) * (std::sqrt(0.5) + 1.0) / 2.0;
  CHECK(cyc.factor(50) == Catch::Approx(expected).epsilon(1e-12));
  CHECK(cyc.factor(100) == Catch::Approx(1.0).epsilon(1e-12));
  // the cyclic program actually unloads in places
  bool has_drop = false;
  for (int k = 1; k < 100; ++k)
    if (cyc.factor(k + 1) < cyc.factor(k)) has_drop = true;
  CHECK(has_drop);
}

TEST_CASE("assembled global matrix matches the dense scatter oracle") {
  const Mesh mesh = two_tet_mesh();
  const std::vector<BCSpec> bcs = {
      {"base", 0, 0.0}, {"base", 1, 0.0}, {"base", 2, 0.0}, {"rest", 2, 1.0}};
  MixedGdSolver solver(mesh, kParams, bcs);
  solver.apply_dirichlet(0.02);
  solver.assemble();

  const int n = solver.dofmap().n_ext();
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  const ShapeTable& table = solver.shape_table();
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const PhysicalShapes shapes = physical_gradients(table, mesh.tet_coords(t));
    const CondensedElement ce =
        condense(element_residual_tangent(table, shapes, solver.gather(t),
                                          solver.history()[t], kParams),
                 solver.history()[t].constraint_active, t);
    std::array<int, kElemExt> map;
    const auto nodes = mesh.element_nodes(t);
    for (int nn = 0; nn < 10; ++nn)
      for (int c = 0; c < 3; ++c)
        map[3 * nn + c] = solver.dofmap().u_dof(nodes[nn], c);
    for (int v = 0; v < 4; ++v)
      map[kElemU + v] = solver.dofmap().alpha_dof(mesh.tets[t][v]);
    for (int i = 0; i < kElemExt; ++i) {
      if (solver.dofmap().is_constrained[map[i]]) continue;
      for (int j = 0; j < kElemExt; ++j) {
        if (solver.dofmap().is_constrained[map[j]]) continue;
        dense(map[i], map[j]) += ce.K_ext(i, j);
      }
    }
  }
  for (int d = 0; d < n; ++d)
    if (solver.dofmap().is_constrained[d]) dense(d, d) = 1.0;

  const Eigen::MatrixXd assembled = solver.linear_system().K.toDense();
  CHECK((assembled - dense).cwiseAbs().maxCoeff() <
        1e-12 * dense.cwiseAbs().maxCoeff());
  // symmetry within 1e-10 relative, after constraint elimination
  CHECK((assembled - assembled.transpose()).cwiseAbs().maxCoeff() <
        1e-10 * assembled.cwiseAbs().maxCoeff());
}

TEST_CASE("zero loads at the undamaged reference give a zero u-residual") {
  const Mesh mesh = two_tet_mesh();
  const std::vector<BCSpec> bcs = {
      {"base", 0, 0.0}, {"base", 1, 0.0}, {"base", 2, 0.0}};
  MixedGdSolver solver(mesh, kParams, bcs);
  solver.apply_dirichlet(0.0);
  solver.assemble();
  for (int d = 0; d < solver.dofmap().n_u_dofs(); ++d)
    CHECK(solver.full_residual()[d] == 0.0);
}

TEST_CASE("condensed Newton iterates match the uncondensed dense solve") {
  const Mesh mesh = two_tet_mesh();
  const std::vector<BCSpec> bcs = {
      {"base", 0, 0.0}, {"base", 1, 0.0}, {"base", 2, 0.0}, {"rest", 2, 1.0}};
  SolverOptions opts;
  opts.newton_tol = 1e-14;  // force several iterations
  opts.max_iterations = 12;
  MixedGdSolver solver(mesh, kParams, bcs, opts);

  for (double value : {0.02, 0.06}) {
    solver.apply_dirichlet(value);
    for (int i = 1; i <= 4; ++i) {
      const UncondensedOracle oracle = uncondensed_increment(solver);
      solver.newton_iteration(i);
      const Eigen::VectorXd& delta = solver.linear_system().solution;
      CHECK((delta - oracle.delta_ext).cwiseAbs().maxCoeff() < 1e-10);
      for (int t = 0; t < mesh.num_tets(); ++t)
        CHECK((solver.last_internal_increments()[t] - oracle.delta_int[t])
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);
    }
    solver.commit();
  }
}

TEST_CASE("zero load increment from a converged state exits immediately") {
  const Mesh mesh = two_tet_mesh();
  const std::vector<BCSpec> bcs = {
      {"base", 0, 0.0}, {"base", 1, 0.0}, {"base", 2, 0.0}, {"rest", 2, 1.0}};
  MixedGdSolver solver(mesh, kParams, bcs);
  solver.apply_dirichlet(0.01);
  solver.newton_loop();
  solver.commit();

  double norm = 1.0;
  solver.apply_dirichlet(0.01);  // unchanged boundary values
  const int iters = solver.newton_loop(nullptr, nullptr, &norm);
  CHECK(iters == 1);
  CHECK(norm < 1e-9);
}

TEST_CASE("elastic step converges with a fast tail") {
  const Mesh mesh = generate_structured_cube(1, 1.0);
  // threshold far above the reachable energies: damage never evolves and the
  // problem is smooth elasticity with a pinned damage field
  const MaterialParams elastic_like =
      MaterialParams::from_E_nu(1000.0, 0.3, 100.0, 0.0, 10.0);
  const std::vector<BCSpec> bcs = {
      {"x0", 0, 0.0}, {"y0", 1, 0.0}, {"z0", 2, 0.0}, {"yL", 1, 1.0}};
  SolverOptions opts;
  opts.newton_tol = 1e-11;
  MixedGdSolver solver(mesh, elastic_like, bcs, opts);
  solver.apply_dirichlet(0.05);  // 5% stretch in one step

  std::vector<double> norms;
  for (int i = 1; i <= 10; ++i) {
    norms.push_back(solver.newton_iteration(i));
    if (norms.back() < 1e-11) break;
  }
  REQUIRE(norms.size() >= 3);
  REQUIRE(norms.size() <= 7);  // quadratic-regime iteration count
  CHECK(norms.back() < 1e-11);
  // successive norms square up in the tail
  const size_t n = norms.size();
  CHECK(norms[n - 1] < norms[n - 2] * norms[n - 2] * 1e3);
}

TEST_CASE("a positive multiplier switches an element to evolution") {
  const Mesh mesh = generate_structured_cube(1, 1.0);
  const MaterialParams soft =
      MaterialParams::from_E_nu(1000.0, 0.3, 0.05, 1.0, 10.0);
  const std::vector<BCSpec> bcs = {
      {"x0", 0, 0.0}, {"y0", 1, 0.0}, {"z0", 2, 0.0}, {"yL", 1, 1.0}};
  MixedGdSolver solver(mesh, soft, bcs);
  LoadProgram program{2, LoadProgram::Kind::MonotoneRamp, 0.08};
  const SolveReport report = run_program(solver, program);
  REQUIRE(report.completed);

  bool some_evolved = false, some_committed = false;
  for (int t = 0; t < mesh.num_tets(); ++t) {
    if (!solver.history()[t].constraint_active) some_evolved = true;
    for (double a : solver.history()[t].alpha_n)
      if (a > 1e-6) some_committed = true;
  }
  CHECK(some_evolved);
  CHECK(some_committed);
}

TEST_CASE("converged damage rows satisfy the weak yield condition") {
  const Mesh mesh = two_tet_mesh();
  const MaterialParams soft =
      MaterialParams::from_E_nu(1000.0, 0.3, 0.01, 1.0, 1.0);
  const std::vector<BCSpec> bcs = {
      {"base", 0, 0.0}, {"base", 1, 0.0}, {"base", 2, 0.0}, {"rest", 2, 1.0}};
  MixedGdSolver solver(mesh, soft, bcs);
  LoadProgram program{4, LoadProgram::Kind::MonotoneRamp, 0.08};
  RunOptions run;
  run.observation_tag = "base";
  run.reaction_component = 2;
  const SolveReport report = run_program(solver, program, run);
  REQUIRE(report.completed);

  // independent re-evaluation of int(dpsi/dalpha N + c grad a . grad N +
  // phis' N + [active] lambda N) dX for every vertex test function
  const ShapeTable& table = solver.shape_table();
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const PhysicalShapes shapes = physical_gradients(table, mesh.tet_coords(t));
    const ElementDofs dofs = solver.gather(t);
    const bool active = solver.history()[t].constraint_active;
    for (int g = 0; g < 4; ++g) {
      const auto& tp = table.pts[g];
      const auto& sp = shapes.pts[g];
      const double dv = tp.weight * shapes.volume;
      Mat3 F = Mat3::Identity();
      for (int nn = 0; nn < 10; ++nn)
        F += dofs.u.segment<3>(3 * nn) * sp.du[nn].transpose();
      const double alpha = alpha_at_gauss_point(table, dofs, g);
      Vec3 ga = dofs.alpha_bubble * sp.dbubble;
      for (int v = 0; v < 4; ++v) ga += dofs.alpha_v[v] * sp.dalpha_v[v];
      const double psi0 = neo_hooke(F, soft).psi0;
      const double dpsi_da = -std::exp(-alpha) * psi0;
      const double phis_p = soft.d1 * alpha + soft.d0;
      for (int v = 0; v < 4; ++v) {
        double r = dpsi_da * tp.p1[v] + soft.c * ga.dot(sp.dalpha_v[v]) +
                   phis_p * tp.p1[v];
        if (active) r += dofs.lambda * tp.p1[v];
        rows[mesh.tets[t][v]] += dv * r;
      }
    }
  }
  const double scale = soft.E * mesh.total_volume() / mesh.num_tets();
  CHECK(rows.cwiseAbs().maxCoeff() < 1e-8 * scale);

  // committing must not perturb the converged equilibrium
  solver.assemble();
  const Eigen::VectorXd before = solver.full_residual();
  solver.commit();
  solver.assemble();
  const Eigen::VectorXd after = solver.full_residual();
  CHECK((before - after).cwiseAbs().maxCoeff() < 1e-8 * scale);
}

TEST_CASE("reaction forces balance between opposite faces") {
  const Mesh mesh = generate_quarter_plate_with_hole(50, 100, 10, 0);
  const MaterialParams params =
      MaterialParams::from_E_nu(1000.0, 0.3, 0.0, 1.0, 100.0);
  const std::vector<BCSpec> bcs = {
      {"x0", 0, 0.0}, {"y0", 1, 0.0}, {"z0", 2, 0.0}, {"yL", 1, 1.0}};
  MixedGdSolver solver(mesh, params, bcs);
  LoadProgram program{2, LoadProgram::Kind::MonotoneRamp, 0.5};
  const SolveReport report = run_program(solver, program);
  REQUIRE(report.completed);
  const double top = solver.reaction("yL", 1);
  const double bottom = solver.reaction("y0", 1);
  CHECK(top > 0.0);
  CHECK(std::abs(top + bottom) < 1e-6 * std::abs(top));
}

TEST_CASE("zero prescribed displacement gives zero reaction at every step") {
  const Mesh mesh = generate_structured_cube(1, 1.0);
  const std::vector<BCSpec> bcs = {
      {"x0", 0, 0.0}, {"y0", 1, 0.0}, {"z0", 2, 0.0}, {"yL", 1, 1.0}};
  MixedGdSolver solver(mesh, kParams, bcs);
  LoadProgram program{3, LoadProgram::Kind::MonotoneRamp, 0.0};
  const SolveReport report = run_program(solver, program);
  REQUIRE(report.completed);
  for (const auto& s : report.steps) CHECK(std::abs(s.reaction) < 1e-12);
}

TEST_CASE("nonconvergence aborts with a documented partial report") {
  const Mesh mesh = generate_structured_cube(1, 1.0);
  SolverOptions opts;
  opts.max_iterations = 1;  // nothing nonlinear can converge in one solve
  opts.max_bisections = 2;
  const std::vector<BCSpec> bcs = {
      {"x0", 0, 0.0}, {"y0", 1, 0.0}, {"z0", 2, 0.0}, {"yL", 1, 1.0}};
  MixedGdSolver solver(mesh, kParams, bcs, opts);
  LoadProgram program{4, LoadProgram::Kind::MonotoneRamp, 0.2};
  const SolveReport report = run_program(solver, program);
  CHECK_FALSE(report.completed);
  CHECK(!report.abort_reason.empty());
  CHECK(report.steps.size() < 4);
}
