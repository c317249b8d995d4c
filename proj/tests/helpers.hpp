// Shared helpers for the test suite: random element states and small dense
// oracles kept independent of the library's assembly path.
#pragma once

#include "gdfem/element_gd.hpp"
#include "gdfem/mesh.hpp"
#include "gdfem/solver.hpp"

#include <random>

namespace gdfem_test {

using namespace gdfem;

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

inline ElementDofs random_element_dofs(std::mt19937_64& rng,
                                       double u_spread = 0.02) {
  std::uniform_real_distribution<double> uu(-u_spread, u_spread);
  std::uniform_real_distribution<double> ua(0.0, 1.5);
  std::uniform_real_distribution<double> ul(-2.0, 2.0);
  ElementDofs d;
  for (int i = 0; i < kElemU; ++i) d.u[i] = uu(rng);
  for (int v = 0; v < 4; ++v) d.alpha_v[v] = ua(rng);
  d.alpha_bubble = 0.5 * ul(rng) / 2.0;
  d.lambda = ul(rng);
  return d;
}

inline ElementHistory random_history(std::mt19937_64& rng, bool active) {
  std::uniform_real_distribution<double> ua(0.0, 1.0);
  ElementHistory h;
  h.constraint_active = active;
  for (int g = 0; g < 4; ++g) {
    h.alpha_n[g] = ua(rng);
    h.alpha_bar[g] = h.alpha_n[g];
  }
  return h;
}

// a two-tet mesh sharing the face (1,2,3)
inline Mesh two_tet_mesh() {
  std::vector<Vec3> verts = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0),
                             Vec3(0.2, 0.2, 1.0), Vec3(1.0, 1.0, 0.8)};
  std::vector<std::array<int, 4>> tets = {{0, 1, 2, 3}, {1, 4, 2, 3}};
  Mesh m = build_mesh(std::move(verts), std::move(tets), true);
  const double tol = 1e-9;
  return classify_boundary(
      std::move(m),
      {{[=](const std::array<Vec3, 3>& v) {
          return std::abs(v[0][2]) < tol && std::abs(v[1][2]) < tol &&
                 std::abs(v[2][2]) < tol;
        },
        BoundaryTag{"base", TagKind::DirichletComponent}},
       {[=](const std::array<Vec3, 3>& v) {
          return std::abs(v[0][2]) >= tol || std::abs(v[1][2]) >= tol ||
                 std::abs(v[2][2]) >= tol;
        },
        BoundaryTag{"rest", TagKind::Neumann}}});
}

// Dense uncondensed Newton increment: assembles the full global system
// including every element's bubble and multiplier dof, eliminates the same
// Dirichlet set, and solves with a dense LU. Independent of the solver's
// sparse/condensed path.
struct UncondensedOracle {
  Eigen::VectorXd delta_ext;
  std::vector<Eigen::Vector2d> delta_int;
};

inline UncondensedOracle uncondensed_increment(const MixedGdSolver& solver) {
  const Mesh& mesh = solver.mesh();
  const DofMap& dofmap = solver.dofmap();
  const ShapeTable& table = solver.shape_table();
  const int n_ext = dofmap.n_ext();
  const int nel = mesh.num_tets();
  const int n = n_ext + 2 * nel;

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd R = Eigen::VectorXd::Zero(n);
  for (int t = 0; t < nel; ++t) {
    const PhysicalShapes shapes = physical_gradients(table, mesh.tet_coords(t));
    const ElementSystem sys = element_residual_tangent(
        table, shapes, solver.gather(t), solver.history()[t], solver.params());
    std::array<int, kElemAll> map;
    const auto nodes = mesh.element_nodes(t);
    for (int nn = 0; nn < 10; ++nn)
      for (int c = 0; c < 3; ++c) map[3 * nn + c] = dofmap.u_dof(nodes[nn], c);
    for (int v = 0; v < 4; ++v)
      map[kElemU + v] = dofmap.alpha_dof(mesh.tets[t][v]);
    map[kElemExt] = n_ext + 2 * t;
    map[kElemExt + 1] = n_ext + 2 * t + 1;
    for (int i = 0; i < kElemAll; ++i) {
      R[map[i]] += sys.R[i];
      for (int j = 0; j < kElemAll; ++j) K(map[i], map[j]) += sys.K(i, j);
    }
  }
  for (int d = 0; d < n_ext; ++d) {
    if (!dofmap.is_constrained[d]) continue;
    K.row(d).setZero();
    K.col(d).setZero();
    K(d, d) = 1.0;
    R[d] = 0.0;
  }
  const Eigen::VectorXd delta = K.fullPivLu().solve(-R);
  UncondensedOracle out;
  out.delta_ext = delta.head(n_ext);
  out.delta_int.resize(nel);
  for (int t = 0; t < nel; ++t)
    out.delta_int[t] =
        Eigen::Vector2d(delta[n_ext + 2 * t], delta[n_ext + 2 * t + 1]);
  return out;
}

}  // namespace gdfem_test
