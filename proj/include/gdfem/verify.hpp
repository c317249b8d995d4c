// verify.hpp -- stability and correctness verification: the discrete count
// test, a dense rank probe of the damage-multiplier coupling block, and the
// seeded finite-difference oracle suite for every analytic derivative.
#pragma once

#include "gdfem/element_gd.hpp"
#include "gdfem/mesh.hpp"
#include "gdfem/penalty_ref.hpp"

#include <Eigen/SVD>

#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace gdfem {

// dim D_alpha - dim D_lambda with and without the bubble enrichment. With the
// bubble the count always equals the number of vertices, on any mesh.
struct CountRow {
  int dim_V = 0;            // vertex count
  int dim_M = 0;            // mid-volume node count (= elements)
  int without_bubble = 0;   // dim_V - dim_M
  int with_bubble = 0;      // (dim_V + dim_M) - dim_M = dim_V
};

inline CountRow count_test(const Mesh& mesh) {
  CountRow r;
  r.dim_V = mesh.num_vertices();
  r.dim_M = mesh.num_tets();
  r.without_bubble = r.dim_V - r.dim_M;
  r.with_bubble = (r.dim_V + r.dim_M) - r.dim_M;
  return r;
}

// Count-test table for the unit cube at refinement steps 1..max_step.
inline std::vector<CountRow> count_test_cube_series(int max_step) {
  if (max_step < 1) throw std::invalid_argument("max_step must be >= 1");
  std::vector<CountRow> rows;
  for (int s = 1; s <= max_step; ++s)
    rows.push_back(count_test(generate_structured_cube(1 << s, 1.0)));
  return rows;
}

struct CouplingProbeResult {
  int n_alpha = 0;
  int n_lambda = 0;
  double min_singular_value = 0.0;
};

// Smallest singular value of the assembled damage-multiplier coupling block
// (the shape-integral matrix int N_alpha N_lambda dX; it is state
// independent). Dense SVD, gated to desk-scale meshes.
inline CouplingProbeResult coupling_block_probe(const Mesh& mesh,
                                                bool include_bubble = true,
                                                int max_alpha_dofs = 2000) {
  const int nv = mesh.num_vertices();
  const int nel = mesh.num_tets();
  const int n_alpha = include_bubble ? nv + nel : nv;
  if (n_alpha > max_alpha_dofs)
    throw SizeLimitError("coupling probe limited to " +
                         std::to_string(max_alpha_dofs) + " damage dofs, got " +
                         std::to_string(n_alpha));

  const ShapeTable table = tabulate(four_point_rule());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n_alpha, nel);
  for (int t = 0; t < nel; ++t) {
    const auto geo = physical_gradients(table, mesh.tet_coords(t));
    for (int g = 0; g < table.num_points(); ++g) {
      const double dv = table.pts[g].weight * geo.volume;
      for (int v = 0; v < 4; ++v)
        B(mesh.tets[t][v], t) += dv * table.pts[g].p1[v];
      if (include_bubble) B(nv + t, t) += dv * table.pts[g].bubble;
    }
  }
  CouplingProbeResult res;
  res.n_alpha = n_alpha;
  res.n_lambda = nel;
  if (nel > n_alpha) {
    // more multiplier columns than damage rows: structurally rank deficient
    res.min_singular_value = 0.0;
    return res;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
  res.min_singular_value = svd.singularValues().tail(1)(0);
  return res;
}

// ---------------------------------------------------------------------------
// Finite-difference oracle suite
// ---------------------------------------------------------------------------

struct OracleCheck {
  std::string name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  bool all_pass = true;

  const OracleCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

// Replaceable constitutive entry point, used by mutation tests to verify the
// suite actually detects a wrong derivative.
struct OracleHooks {
  std::function<NeoHookeResponse(const Mat3&, const MaterialParams&)>
      neo_hooke_fn;
};

namespace detail {

inline double rel_inf_error(const Eigen::Ref<const Eigen::MatrixXd>& a,
                            const Eigen::Ref<const Eigen::MatrixXd>& b) {
  const double scale = b.cwiseAbs().maxCoeff();
  if (scale < 1e-300) return a.cwiseAbs().maxCoeff();
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline Mat3 random_deformation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (;;) {
    Mat3 F = Mat3::Identity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) F(i, j) += u(rng);
    if (F.determinant() > 0.2) return F;
  }
}

inline std::array<Vec3, 4> random_tet(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    std::array<Vec3, 4> X;
    for (auto& x : X) x = Vec3(u(rng), u(rng), u(rng));
    Mat3 J;
    J.col(0) = X[1] - X[0];
    J.col(1) = X[2] - X[0];
    J.col(2) = X[3] - X[0];
    const double det = J.determinant();
    if (det < 0.0) std::swap(X[2], X[3]);
    if (std::abs(det) > 0.05) return X;
  }
}

}  // namespace detail

// Runs all material and element finite-difference checks with the given seed
// and state count. Tolerances are fixed; seed variation must not change the
// pass/fail outcome. n_element_states = 0 derives a reduced element count
// from n_states.
inline OracleReport fd_oracle_suite(std::uint64_t seed, int n_states = 200,
                                    const OracleHooks& hooks = {},
                                    int n_element_states = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ua(0.0, 2.0);
  std::uniform_real_distribution<double> ug(-1.0, 1.0);
  const MaterialParams params = MaterialParams::from_E_nu(1000.0, 0.3, 0.5, 1.0, 10.0);
  auto nh_eval = hooks.neo_hooke_fn;
  if (!nh_eval)
    nh_eval = [](const Mat3& F, const MaterialParams& p) {
      return neo_hooke(F, p);
    };

  OracleReport report;
  double err_P = 0.0, err_A = 0.0, err_da = 0.0, err_daa = 0.0, err_dFa = 0.0;

  for (int s = 0; s < n_states; ++s) {
    const Mat3 F = detail::random_deformation(rng);
    const NeoHookeResponse nh = nh_eval(F, params);

    // P vs central differences of psi0
    Mat3 P_fd;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double h = 1e-6 * (1.0 + std::abs(F(i, j)));
        Mat3 Fp = F, Fm = F;
        Fp(i, j) += h;
        Fm(i, j) -= h;
        P_fd(i, j) = (neo_hooke(Fp, params).psi0 - neo_hooke(Fm, params).psi0) /
                     (2.0 * h);
      }
    err_P = std::max(err_P, detail::rel_inf_error(nh.P0, P_fd));

    // A vs central differences of P
    Tensor4 A_fd;
    for (int k = 0; k < 3; ++k)
      for (int L = 0; L < 3; ++L) {
        const double h = 1e-6 * (1.0 + std::abs(F(k, L)));
        Mat3 Fp = F, Fm = F;
        Fp(k, L) += h;
        Fm(k, L) -= h;
        const Mat3 dP =
            (neo_hooke(Fp, params).P0 - neo_hooke(Fm, params).P0) / (2.0 * h);
        for (int i = 0; i < 3; ++i)
          for (int J = 0; J < 3; ++J) A_fd(3 * J + i, 3 * L + k) = dP(i, J);
      }
    err_A = std::max(err_A, detail::rel_inf_error(nh.A0, A_fd));

    // alpha derivatives of the damaged response
    PointState st;
    st.F = F;
    st.alpha = ua(rng);
    st.grad_alpha = Vec3(ug(rng), ug(rng), ug(rng));
    const PointResponse pr = point_response(st, params);
    const double ha = 1e-6 * (1.0 + st.alpha);
    PointState sp = st, sm = st;
    sp.alpha += ha;
    sm.alpha -= ha;
    const PointResponse prp = point_response(sp, params);
    const PointResponse prm = point_response(sm, params);
    const double da_fd = (prp.psi - prm.psi) / (2.0 * ha);
    const double daa_fd = (prp.dpsi_dalpha - prm.dpsi_dalpha) / (2.0 * ha);
    const Mat3 dFa_fd = (prp.P - prm.P) / (2.0 * ha);
    err_da = std::max(err_da, std::abs(pr.dpsi_dalpha - da_fd) /
                                  std::max(1e-12, std::abs(da_fd)));
    err_daa = std::max(err_daa, std::abs(pr.d2psi_dalpha2 - daa_fd) /
                                    std::max(1e-12, std::abs(daa_fd)));
    err_dFa = std::max(err_dFa, detail::rel_inf_error(pr.d2psi_dF_dalpha, dFa_fd));
  }

  // element-level consistency: R = dL/dD and K = dR/dD (mixed, active), and
  // the same for the penalty element
  const ShapeTable table = tabulate(four_point_rule());
  double err_R = 0.0, err_K = 0.0, err_pR = 0.0, err_pK = 0.0;
  const int n_elem_states =
      n_element_states > 0 ? n_element_states : std::max(8, n_states / 8);
  std::uniform_real_distribution<double> uu(-0.02, 0.02);
  std::uniform_real_distribution<double> ul(-2.0, 2.0);
  const PenaltyParams pen_params(params, 25.0);

  for (int s = 0; s < n_elem_states; ++s) {
    const auto X = detail::random_tet(rng);
    const PhysicalShapes shapes = physical_gradients(table, X);

    ElementDofs dofs;
    for (int i = 0; i < kElemU; ++i) dofs.u[i] = uu(rng);
    for (int v = 0; v < 4; ++v) dofs.alpha_v[v] = 0.75 * ua(rng);
    dofs.alpha_bubble = 0.5 * ug(rng);
    dofs.lambda = ul(rng);
    ElementHistory hist;
    hist.constraint_active = true;
    for (int g = 0; g < 4; ++g) hist.alpha_bar[g] = 0.5 * ua(rng);

    const ElementSystem sys =
        element_residual_tangent(table, shapes, dofs, hist, params);

    auto set_dof = [](ElementDofs d, int k, double v) {
      if (k < kElemU)
        d.u[k] = v;
      else if (k < kElemExt)
        d.alpha_v[k - kElemU] = v;
      else if (k == kElemExt)
        d.alpha_bubble = v;
      else
        d.lambda = v;
      return d;
    };
    auto get_dof = [](const ElementDofs& d, int k) {
      if (k < kElemU) return d.u[k];
      if (k < kElemExt) return d.alpha_v[k - kElemU];
      if (k == kElemExt) return d.alpha_bubble;
      return d.lambda;
    };

    ElementVector R_fd;
    ElementMatrix K_fd;
    for (int k = 0; k < kElemAll; ++k) {
      const double x = get_dof(dofs, k);
      const double h = 1e-6 * (1.0 + std::abs(x));
      const ElementDofs dp = set_dof(dofs, k, x + h);
      const ElementDofs dm = set_dof(dofs, k, x - h);
      R_fd[k] = (element_energy(table, shapes, dp, hist, params) -
                 element_energy(table, shapes, dm, hist, params)) /
                (2.0 * h);
      K_fd.col(k) =
          (element_residual_tangent(table, shapes, dp, hist, params).R -
           element_residual_tangent(table, shapes, dm, hist, params).R) /
          (2.0 * h);
    }
    err_R = std::max(err_R, detail::rel_inf_error(sys.R, R_fd));
    err_K = std::max(err_K, detail::rel_inf_error(sys.K, K_fd));

    PenaltyElementDofs pdofs;
    pdofs.u = dofs.u;
    pdofs.alpha_v = dofs.alpha_v;
    PenaltyHistory phist;
    for (int g = 0; g < 4; ++g) phist.alpha_bar[g] = hist.alpha_bar[g];
    const PenaltyElementSystem psys =
        penalty_element(table, shapes, pdofs, phist, pen_params);
    PenaltyVector pR_fd;
    PenaltyMatrix pK_fd;
    for (int k = 0; k < kElemExt; ++k) {
      PenaltyElementDofs dp = pdofs, dm = pdofs;
      double& xp = k < kElemU ? dp.u[k] : dp.alpha_v[k - kElemU];
      double& xm = k < kElemU ? dm.u[k] : dm.alpha_v[k - kElemU];
      const double h = 1e-6 * (1.0 + std::abs(xp));
      xp += h;
      xm -= h;
      pR_fd[k] = (penalty_element_energy(table, shapes, dp, phist, pen_params) -
                  penalty_element_energy(table, shapes, dm, phist, pen_params)) /
                 (2.0 * h);
      pK_fd.col(k) =
          (penalty_element(table, shapes, dp, phist, pen_params).R -
           penalty_element(table, shapes, dm, phist, pen_params).R) /
          (2.0 * h);
    }
    err_pR = std::max(err_pR, detail::rel_inf_error(psys.R, pR_fd));
    err_pK = std::max(err_pK, detail::rel_inf_error(psys.K, pK_fd));
  }

  auto add = [&report](const std::string& name, double err, double tol) {
    report.checks.push_back({name, err, tol, err < tol});
    report.all_pass = report.all_pass && err < tol;
  };
  add("P vs FD(psi0)", err_P, 1e-6);
  add("A vs FD(P)", err_A, 1e-5);
  add("dpsi_dalpha vs FD", err_da, 1e-6);
  add("d2psi_dalpha2 vs FD", err_daa, 1e-5);
  add("d2psi_dFdalpha vs FD", err_dFa, 1e-5);
  add("element R vs FD(L)", err_R, 1e-6);
  add("element K vs FD(R)", err_K, 1e-5);
  add("penalty R vs FD(P)", err_pR, 1e-6);
  add("penalty K vs FD(R)", err_pK, 1e-5);
  return report;
}

inline void write_oracle_report(const OracleReport& report, std::ostream& os) {
  os << std::left << std::setw(28) << "check" << std::setw(16) << "max_rel_err"
     << std::setw(12) << "tolerance" << "status\n";
  for (const auto& c : report.checks)
    os << std::left << std::setw(28) << c.name << std::setw(16)
       << std::scientific << std::setprecision(3) << c.max_rel_error
       << std::setw(12) << c.tolerance << (c.pass ? "pass" : "FAIL") << "\n";
  os << (report.all_pass ? "all checks passed" : "SOME CHECKS FAILED") << "\n";
}

inline void write_oracle_report_csv(const OracleReport& report,
                                    std::ostream& os) {
  os << "check,max_rel_error,tolerance,pass\n";
  for (const auto& c : report.checks)
    os << c.name << "," << std::scientific << std::setprecision(12)
       << c.max_rel_error << "," << c.tolerance << "," << (c.pass ? 1 : 0)
       << "\n";
}

}  // namespace gdfem
