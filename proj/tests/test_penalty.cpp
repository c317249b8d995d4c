#include "gdfem/penalty_ref.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace gdfem;
using namespace gdfem_test;

namespace {

const MaterialParams kBase =
    MaterialParams::from_E_nu(1000.0, 0.3, 0.5, 1.0, 10.0);

}  // namespace

TEST_CASE("history update solves the linear yield root") {
  // hand-solved: p = 10, d0 = 0, d1 = 1, alpha = 0.11, abar_n = 0:
  // trial = 1.1 > 0, root = 1.1 / 11 = 0.1
  const PenaltyParams p(MaterialParams::from_E_nu(1000, 0.3, 0.0, 1.0, 0.0),
                        10.0);
  CHECK(penalty_history_update(0.11, 0.0, p) == Catch::Approx(0.1).epsilon(1e-14));

  // below the trial threshold nothing moves
  const PenaltyParams q(MaterialParams::from_E_nu(1000, 0.3, 1.0, 1.0, 0.0),
                        10.0);
  CHECK(penalty_history_update(0.05, 0.0, q) == 0.0);
  CHECK(penalty_history_update(0.3, 0.25, q) == 0.25);

  // p -> infinity enforces equality up to d0/p
  const PenaltyParams big(MaterialParams::from_E_nu(1000, 0.3, 1.0, 1.0, 0.0),
                          1e12);
  CHECK(std::abs(penalty_history_update(1.0, 0.0, big) - 1.0) < 1e-9);

  // the updated value never falls below the converged one
  const PenaltyParams r(MaterialParams::from_E_nu(1000, 0.3, 0.2, 0.7, 0.0),
                        25.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double abar_n = u(rng);
    const double alpha = u(rng);
    CHECK(penalty_history_update(alpha, abar_n, r) >= abar_n);
  }

  CHECK_THROWS_AS(PenaltyParams(kBase, 0.0), std::invalid_argument);
}

TEST_CASE("penalty element matches finite differences") {
  std::mt19937_64 rng(4);
  const ShapeTable table = tabulate(four_point_rule());
  const PenaltyParams params(kBase, 25.0);
  for (int trial = 0; trial < 8; ++trial) {
    const PhysicalShapes shapes = physical_gradients(table, random_tet(rng));
    std::uniform_real_distribution<double> uu(-0.02, 0.02), ua(0.0, 1.0);
    PenaltyElementDofs dofs;
    for (int i = 0; i < kElemU; ++i) dofs.u[i] = uu(rng);
    for (int v = 0; v < 4; ++v) dofs.alpha_v[v] = ua(rng);
    PenaltyHistory hist;
    for (int g = 0; g < 4; ++g) hist.alpha_bar[g] = ua(rng);

    const PenaltyElementSystem sys =
        penalty_element(table, shapes, dofs, hist, params);
    CHECK((sys.K - sys.K.transpose()).cwiseAbs().maxCoeff() <
          1e-10 * sys.K.cwiseAbs().maxCoeff());

    PenaltyVector R_fd;
    PenaltyMatrix K_fd;
    for (int k = 0; k < kElemExt; ++k) {
      PenaltyElementDofs dp = dofs, dm = dofs;
      double& xp = k < kElemU ? dp.u[k] : dp.alpha_v[k - kElemU];
      double& xm = k < kElemU ? dm.u[k] : dm.alpha_v[k - kElemU];
      const double h = 1e-6 * (1.0 + std::abs(xp));
      xp += h;
      xm -= h;
      R_fd[k] = (penalty_element_energy(table, shapes, dp, hist, params) -
                 penalty_element_energy(table, shapes, dm, hist, params)) /
                (2 * h);
      K_fd.col(k) = (penalty_element(table, shapes, dp, hist, params).R -
                     penalty_element(table, shapes, dm, hist, params).R) /
                    (2 * h);
    }
    CHECK((sys.R - R_fd).cwiseAbs().maxCoeff() <
          1e-6 * R_fd.cwiseAbs().maxCoeff());
    CHECK((sys.K - K_fd).cwiseAbs().maxCoeff() <
          1e-5 * K_fd.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("with matching history the residual is penalty-independent") {
  std::mt19937_64 rng(5);
  const ShapeTable table = tabulate(four_point_rule());
  const PhysicalShapes shapes = physical_gradients(table, random_tet(rng));

  PenaltyElementDofs dofs;
  std::uniform_real_distribution<double> uu(-0.02, 0.02);
  for (int i = 0; i < kElemU; ++i) dofs.u[i] = uu(rng);
  dofs.alpha_v.setConstant(0.37);  // uniform field: alpha at every GP = 0.37
  PenaltyHistory hist;
  for (int g = 0; g < 4; ++g) hist.alpha_bar[g] = 0.37;

  const PenaltyElementSystem a =
      penalty_element(table, shapes, dofs, hist, PenaltyParams(kBase, 10.0));
  const PenaltyElementSystem b =
      penalty_element(table, shapes, dofs, hist, PenaltyParams(kBase, 1000.0));
  CHECK((a.R - b.R).cwiseAbs().maxCoeff() < 1e-12 * a.R.cwiseAbs().maxCoeff());

  // the tangent difference is exactly the penalty mass term (p2 - p1) * M
  const PenaltyMatrix diff = b.K - a.K;
  for (int i = 0; i < kElemU; ++i)
    for (int j = 0; j < kElemExt; ++j) CHECK(diff(i, j) == 0.0);
  PenaltyMatrix mass = PenaltyMatrix::Zero();
  for (int g = 0; g < 4; ++g) {
    const double dv = table.pts[g].weight * shapes.volume;
    for (int a2 = 0; a2 < 4; ++a2)
      for (int b2 = 0; b2 < 4; ++b2)
        mass(kElemU + a2, kElemU + b2) +=
            dv * table.pts[g].p1[a2] * table.pts[g].p1[b2];
  }
  CHECK((diff - 990.0 * mass).cwiseAbs().maxCoeff() <
        1e-10 * diff.cwiseAbs().maxCoeff());
}

TEST_CASE("displacement block agrees with the mixed element at equal states") {
  std::mt19937_64 rng(6);
  const ShapeTable table = tabulate(four_point_rule());
  const PhysicalShapes shapes = physical_gradients(table, random_tet(rng));

  std::uniform_real_distribution<double> uu(-0.02, 0.02), ua(0.0, 1.0);
  PenaltyElementDofs pd;
  for (int i = 0; i < kElemU; ++i) pd.u[i] = uu(rng);
  for (int v = 0; v < 4; ++v) pd.alpha_v[v] = ua(rng);

  ElementDofs md;
  md.u = pd.u;
  md.alpha_v = pd.alpha_v;
  md.alpha_bubble = 0.0;  // equal damage fields require a zero bubble
  md.lambda = 0.7;

  PenaltyHistory ph;
  ElementHistory mh;
  const PenaltyElementSystem ps =
      penalty_element(table, shapes, pd, ph, PenaltyParams(kBase, 10.0));
  const ElementSystem ms =
      element_residual_tangent(table, shapes, md, mh, kBase);

  CHECK((ps.R.head<kElemU>() - ms.R.head<kElemU>()).cwiseAbs().maxCoeff() <
        1e-13 * ms.R.head<kElemU>().cwiseAbs().maxCoeff());
  CHECK((ps.K.topLeftCorner<kElemU, kElemU>() -
         ms.K.topLeftCorner<kElemU, kElemU>())
            .cwiseAbs()
            .maxCoeff() < 1e-13 * ms.K.topLeftCorner<kElemU, kElemU>()
                                      .cwiseAbs()
                                      .maxCoeff());
}

TEST_CASE("rate of change metric") {
  CHECK(rate_of_change_metric({2.0, 2.0, 2.0}) ==
        std::vector<double>{0.0, 0.0});
  CHECK(rate_of_change_metric({1.0, 1.5, 1.7}) ==
        std::vector<double>{0.5, 0.19999999999999996});
  CHECK_THROWS_AS(rate_of_change_metric({1.0}), std::invalid_argument);
}

TEST_CASE("penalty solver runs and commits nondecreasing histories") {
  const Mesh mesh = generate_structured_cube(1, 1.0);
  const MaterialParams soft =
      MaterialParams::from_E_nu(1000.0, 0.3, 0.05, 1.0, 10.0);
  const std::vector<BCSpec> bcs = {
      {"x0", 0, 0.0}, {"y0", 1, 0.0}, {"z0", 2, 0.0}, {"yL", 1, 1.0}};
  PenaltySolver solver(mesh, PenaltyParams(soft, 25.0), bcs);
  LoadProgram program{4, LoadProgram::Kind::MonotoneRamp, 0.08};
  const SolveReport report = run_program(solver, program);
  REQUIRE(report.completed);
  CHECK(report.worst_irreversibility_defect <= 0.0);
  CHECK(solver.d_max() > 0.0);
}

TEST_CASE("penalty nonconvergence surfaces cleanly") {
  const Mesh mesh = generate_structured_cube(1, 1.0);
  SolverOptions opts;
  opts.max_iterations = 1;
  opts.max_bisections = 1;
  const std::vector<BCSpec> bcs = {
      {"x0", 0, 0.0}, {"y0", 1, 0.0}, {"z0", 2, 0.0}, {"yL", 1, 1.0}};
  PenaltySolver solver(mesh, PenaltyParams(kBase, 1e5), bcs, opts);
  LoadProgram program{2, LoadProgram::Kind::MonotoneRamp, 0.1};
  const SolveReport report = run_program(solver, program);
  CHECK_FALSE(report.completed);
  CHECK(report.abort_reason.find("nonconvergence") != std::string::npos);
}
