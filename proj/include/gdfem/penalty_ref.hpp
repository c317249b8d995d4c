// penalty_ref.hpp -- the comparative penalty (micromorphic) formulation
// P2_u - P1_alpha: the nodal damage field couples to a Gauss-point local
// history variable through the quadratic term p/2 (alpha - alpha_bar)^2, and
// the history update is the closed-form root of the linear yield function
//
//   Phi~(alpha, alpha_bar) = p (alpha - alpha_bar) - (d1 alpha_bar + d0).
//
// The strain energy is a function of the nodal variable; the history value
// enters only the local dissipation part and the penalty coupling, while the
// gradient regularization is carried by the nodal field.
#pragma once

#include "gdfem/solver.hpp"

#include <array>
#include <vector>

namespace gdfem {

struct PenaltyParams {
  MaterialParams base;
  double p = 0.0;  // penalty parameter [MPa]

  PenaltyParams(const MaterialParams& base_, double p_) : base(base_), p(p_) {
    if (p <= 0.0) throw std::invalid_argument("penalty parameter must be positive");
  }
};

struct PenaltyHistory {
  std::array<double, 4> alpha_bar{};    // current history value per Gauss point
  std::array<double, 4> alpha_bar_n{};  // last converged value
};

// Closed-form update of the history value at one Gauss point: if the trial
// yield Phi~(alpha, alpha_bar_n) is positive the history evolves to the root
// (p alpha - d0) / (p + d1), otherwise it keeps the converged value.
inline double penalty_history_update(double alpha, double alpha_bar_n,
                                     const PenaltyParams& params) {
  const double d0 = params.base.d0, d1 = params.base.d1, p = params.p;
  const double trial = p * (alpha - alpha_bar_n) - (d1 * alpha_bar_n + d0);
  if (trial > 0.0) return (p * alpha - d0) / (p + d1);
  return alpha_bar_n;
}

using PenaltyVector = Eigen::Matrix<double, kElemExt, 1>;
using PenaltyMatrix = Eigen::Matrix<double, kElemExt, kElemExt>;

struct PenaltyElementDofs {
  Eigen::Matrix<double, kElemU, 1> u = Eigen::Matrix<double, kElemU, 1>::Zero();
  Eigen::Vector4d alpha_v = Eigen::Vector4d::Zero();
};

inline double penalty_alpha_at_gauss_point(const ShapeTable& table,
                                           const PenaltyElementDofs& dofs,
                                           int g) {
  double a = 0.0;
  for (int v = 0; v < 4; ++v) a += dofs.alpha_v[v] * table.pts[g].p1[v];
  return a;
}

// Element potential treating the history values as fixed data.
inline double penalty_element_energy(const ShapeTable& table,
                                     const PhysicalShapes& shapes,
                                     const PenaltyElementDofs& dofs,
                                     const PenaltyHistory& hist,
                                     const PenaltyParams& params) {
  const auto& mp = params.base;
  double L = 0.0;
  for (int g = 0; g < table.num_points(); ++g) {
    const auto& t = table.pts[g];
    const auto& s = shapes.pts[g];
    const double dv = t.weight * shapes.volume;
    Mat3 F = Mat3::Identity();
    for (int n = 0; n < 10; ++n)
      F += dofs.u.segment<3>(3 * n) * s.du[n].transpose();
    const double alpha = penalty_alpha_at_gauss_point(table, dofs, g);
    Vec3 grad_alpha = Vec3::Zero();
    for (int v = 0; v < 4; ++v) grad_alpha += dofs.alpha_v[v] * s.dalpha_v[v];
    const double abar = hist.alpha_bar[g];
    const NeoHookeResponse nh = neo_hooke(F, mp);
    const double pen = alpha - abar;
    L += dv * (std::exp(-alpha) * nh.psi0 +
               0.5 * mp.d1 * abar * abar + mp.d0 * abar +
               0.5 * mp.c * grad_alpha.squaredNorm() +
               0.5 * params.p * pen * pen);
  }
  return L;
}

struct PenaltyElementSystem {
  PenaltyVector R = PenaltyVector::Zero();
  PenaltyMatrix K = PenaltyMatrix::Zero();
};

inline PenaltyElementSystem penalty_element(const ShapeTable& table,
                                            const PhysicalShapes& shapes,
                                            const PenaltyElementDofs& dofs,
                                            const PenaltyHistory& hist,
                                            const PenaltyParams& params) {
  const auto& mp = params.base;
  PenaltyElementSystem sys;
  for (int g = 0; g < table.num_points(); ++g) {
    const auto& t = table.pts[g];
    const auto& s = shapes.pts[g];
    const double dv = t.weight * shapes.volume;

    Mat3 F = Mat3::Identity();
    for (int n = 0; n < 10; ++n)
      F += dofs.u.segment<3>(3 * n) * s.du[n].transpose();
    const double alpha = penalty_alpha_at_gauss_point(table, dofs, g);
    if (alpha < -60.0)
      throw InvertedStateError("runaway damage iterate at a Gauss point");
    Vec3 grad_alpha = Vec3::Zero();
    for (int v = 0; v < 4; ++v) grad_alpha += dofs.alpha_v[v] * s.dalpha_v[v];

    const NeoHookeResponse nh = neo_hooke(F, mp);
    const double expm = std::exp(-alpha);
    const Mat3 P = expm * nh.P0;
    const double psi_a = -expm * nh.psi0;
    const double psi_aa = expm * nh.psi0;
    const Mat3 psi_Fa = -expm * nh.P0;
    const double pen = alpha - hist.alpha_bar[g];

    for (int I = 0; I < 10; ++I)
      sys.R.segment<3>(3 * I) += dv * (P * s.du[I]);
    for (int a = 0; a < 4; ++a)
      sys.R[kElemU + a] +=
          dv * (psi_a * t.p1[a] + mp.c * grad_alpha.dot(s.dalpha_v[a]) +
                params.p * pen * t.p1[a]);

    for (int I = 0; I < 10; ++I)
      for (int Kn = I; Kn < 10; ++Kn) {
        Mat3 blk = Mat3::Zero();
        for (int J = 0; J < 3; ++J)
          for (int L = 0; L < 3; ++L) {
            const double w = s.du[I][J] * s.du[Kn][L];
            for (int i = 0; i < 3; ++i)
              for (int k = 0; k < 3; ++k)
                blk(i, k) += w * expm * nh.A0(3 * J + i, 3 * L + k);
          }
        sys.K.block<3, 3>(3 * I, 3 * Kn) += dv * blk;
        if (Kn != I) sys.K.block<3, 3>(3 * Kn, 3 * I) += dv * blk.transpose();
      }

    for (int I = 0; I < 10; ++I) {
      const Vec3 col = psi_Fa * s.du[I];
      for (int a = 0; a < 4; ++a) {
        const Vec3 v = dv * t.p1[a] * col;
        sys.K.block<3, 1>(3 * I, kElemU + a) += v;
        sys.K.block<1, 3>(kElemU + a, 3 * I) += v.transpose();
      }
    }

    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        sys.K(kElemU + a, kElemU + b) +=
            dv * ((psi_aa + params.p) * t.p1[a] * t.p1[b] +
                  mp.c * s.dalpha_v[a].dot(s.dalpha_v[b]));
  }
  return sys;
}

// Consecutive differences of a refinement sequence of displacement norms,
// used by the comparison report to judge convergence of the rate of change.
inline std::vector<double> rate_of_change_metric(
    const std::vector<double>& norms) {
  if (norms.size() < 2)
    throw std::invalid_argument("rate_of_change_metric needs >= 2 entries");
  std::vector<double> diffs(norms.size() - 1);
  for (size_t i = 0; i + 1 < norms.size(); ++i)
    diffs[i] = norms[i + 1] - norms[i];
  return diffs;
}

// ---------------------------------------------------------------------------
// Penalty solver: same stepping machinery as the mixed solver, with the
// Gauss-point history updated inside the Newton loop after each global solve.
// ---------------------------------------------------------------------------

class PenaltySolver {
 public:
  struct Snapshot {
    Eigen::VectorXd D;
    std::vector<PenaltyHistory> history;
  };

  PenaltySolver(const Mesh& mesh, const PenaltyParams& params,
                const std::vector<BCSpec>& bcs, SolverOptions opts = {})
      : mesh_(mesh),
        params_(params),
        opts_(opts),
        table_(tabulate(four_point_rule())),
        dofmap_(build_dofmap(mesh, bcs, true)) {
    D_ = Eigen::VectorXd::Zero(dofmap_.n_ext());
    history_.resize(mesh.num_tets());
    geo_.reserve(mesh.num_tets());
    scatter_.reserve(mesh.num_tets());
    for (int t = 0; t < mesh.num_tets(); ++t) {
      geo_.push_back(physical_gradients(table_, mesh.tet_coords(t)));
      std::array<int, kElemExt> map;
      const auto nodes = mesh.element_nodes(t);
      for (int n = 0; n < 10; ++n)
        for (int c = 0; c < 3; ++c) map[3 * n + c] = dofmap_.u_dof(nodes[n], c);
      for (int v = 0; v < 4; ++v)
        map[kElemU + v] = dofmap_.alpha_dof(mesh.tets[t][v]);
      scatter_.push_back(map);
    }
    std::vector<std::vector<int>> eldofs(mesh.num_tets());
    for (int t = 0; t < mesh.num_tets(); ++t)
      eldofs[t].assign(scatter_[t].begin(), scatter_[t].end());
    assembler_.build(dofmap_.n_ext(), eldofs, dofmap_.is_constrained);
  }

  const DofMap& dofmap() const { return dofmap_; }
  const ShapeTable& shape_table() const { return table_; }
  const Eigen::VectorXd& state() const { return D_; }
  const std::vector<PenaltyHistory>& history() const { return history_; }

  PenaltyElementDofs gather(int t) const {
    PenaltyElementDofs d;
    for (int e = 0; e < kElemExt; ++e) {
      const double v = D_[scatter_[t][e]];
      if (e < kElemU)
        d.u[e] = v;
      else
        d.alpha_v[e - kElemU] = v;
    }
    return d;
  }

  void apply_dirichlet(double load_value) {
    for (const auto& c : dofmap_.dirichlet) D_[c.dof] = c.scale * load_value;
  }

  void assemble() {
    const int n = dofmap_.n_ext();
    const int nel = mesh_.num_tets();
    elem_.resize(nel);
    detail::parallel_for(nel, opts_.threads, [&](int t) {
      const PenaltyElementDofs dofs = gather(t);
      elem_[t] = penalty_element(table_, geo_[t], dofs, history_[t], params_);
      // Consistent algorithmic tangent: at Gauss points that are evolving
      // (trial yield positive) the local update alpha_bar = (p a - d0)/(p+d1)
      // is differentiated through, which replaces the penalty stiffness p by
      // p d1/(p+d1) there. With the history frozen instead, the effective
      // iteration contracts at rate ~ p^2/((p+d1)(p+psi_aa)) and stalls for
      // p >> d1. The residual is untouched, so converged states agree with
      // the frozen-history linearization.
      const double p = params_.p, d1 = params_.base.d1,
                   d0 = params_.base.d0;
      for (int g = 0; g < table_.num_points(); ++g) {
        const double a = penalty_alpha_at_gauss_point(table_, dofs, g);
        const double trial =
            p * (a - history_[t].alpha_bar_n[g]) -
            (d1 * history_[t].alpha_bar_n[g] + d0);
        if (trial <= 0.0) continue;
        const double dv = table_.pts[g].weight * geo_[t].volume;
        const double corr = p * p / (p + d1);
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j)
            elem_[t].K(kElemU + i, kElemU + j) -=
                dv * corr * table_.pts[g].p1[i] * table_.pts[g].p1[j];
      }
    });
    R_full_ = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd R_red = Eigen::VectorXd::Zero(n);
    assembler_.begin_assembly();
    double* values = assembler_.K.valuePtr();
    for (int t = 0; t < nel; ++t) {
      const auto& map = scatter_[t];
      const auto& idx = assembler_.value_index[t];
      for (int i = 0; i < kElemExt; ++i) {
        const int gi = map[i];
        R_full_[gi] += elem_[t].R[i];
        if (dofmap_.is_constrained[gi]) continue;
        R_red[gi] += elem_[t].R[i];
        for (int j = 0; j < kElemExt; ++j) {
          const int vi = idx[i * kElemExt + j];
          if (vi >= 0) values[vi] += elem_[t].K(i, j);
        }
      }
    }
    system_.K = assembler_.K;
    system_.rhs = -R_red;
  }

  int newton_loop(double* assembly_ms = nullptr, double* solve_ms = nullptr,
                  double* increment_norm = nullptr) {
    for (int i = 1; i <= opts_.max_iterations; ++i) {
      auto t0 = detail::Clock::now();
      assemble();
      if (assembly_ms) *assembly_ms += detail::ms_since(t0);
      t0 = detail::Clock::now();
      cached_solver_.solve(system_);
      if (solve_ms) *solve_ms += detail::ms_since(t0);
      D_ += system_.solution;

      for (int t = 0; t < mesh_.num_tets(); ++t) {
        const PenaltyElementDofs dofs = gather(t);
        for (int g = 0; g < table_.num_points(); ++g) {
          const double a = penalty_alpha_at_gauss_point(table_, dofs, g);
          history_[t].alpha_bar[g] =
              penalty_history_update(a, history_[t].alpha_bar_n[g], params_);
        }
      }

      const double norm = system_.solution.norm();
      if (increment_norm) *increment_norm = norm;
      if (norm < opts_.newton_tol) return i;
    }
    throw NonconvergenceError("penalty Newton loop exceeded " +
                              std::to_string(opts_.max_iterations) +
                              " iterations");
  }

  double commit() {
    double worst = 0.0;
    for (auto& h : history_)
      for (int g = 0; g < 4; ++g) {
        worst = std::max(worst, h.alpha_bar_n[g] - h.alpha_bar[g]);
        h.alpha_bar_n[g] = h.alpha_bar[g];
      }
    return worst;
  }

  double reaction(const std::string& tag_name, int component) const {
    const int tag = mesh_.tag_index(tag_name);
    double sum = 0.0;
    for (int node : mesh_.nodes_on_tag(tag)) {
      const int dof = dofmap_.u_dof(node, component);
      if (dofmap_.is_constrained[dof]) sum += R_full_[dof];
    }
    return sum;
  }

  double d_max() const {
    double dm = 0.0;
    for (int t = 0; t < mesh_.num_tets(); ++t) {
      const PenaltyElementDofs dofs = gather(t);
      for (int g = 0; g < table_.num_points(); ++g)
        dm = std::max(dm, 1.0 - std::exp(-penalty_alpha_at_gauss_point(
                              table_, dofs, g)));
    }
    return dm;
  }

  double min_gauss_alpha() const {
    double m = 0.0;
    for (int t = 0; t < mesh_.num_tets(); ++t) {
      const PenaltyElementDofs dofs = gather(t);
      for (int g = 0; g < table_.num_points(); ++g)
        m = std::min(m, penalty_alpha_at_gauss_point(table_, dofs, g));
    }
    return m;
  }

  Snapshot save_state() const { return {D_, history_}; }
  void restore_state(const Snapshot& s) {
    D_ = s.D;
    history_ = s.history;
  }

  const SolverOptions& options() const { return opts_; }
  const Mesh& mesh() const { return mesh_; }

 private:
  const Mesh& mesh_;
  PenaltyParams params_;
  SolverOptions opts_;
  ShapeTable table_;
  DofMap dofmap_;
  std::vector<PhysicalShapes> geo_;
  std::vector<std::array<int, kElemExt>> scatter_;
  Eigen::VectorXd D_;
  std::vector<PenaltyHistory> history_;
  std::vector<PenaltyElementSystem> elem_;
  Eigen::VectorXd R_full_;
  LinearSystem system_;
  detail::PatternAssembler assembler_;
  CachedDirectSolver cached_solver_;
};

// L2 norm of the P2 displacement field, evaluated with the four-point rule.
template <class Solver>
double displacement_l2_norm(const Mesh& mesh, const Solver& solver) {
  const ShapeTable table = tabulate(four_point_rule());
  const auto& D = solver.state();
  const auto& dofmap = solver.dofmap();
  double sum = 0.0;
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto geo = physical_gradients(table, mesh.tet_coords(t));
    const auto nodes = mesh.element_nodes(t);
    for (int g = 0; g < table.num_points(); ++g) {
      Vec3 u = Vec3::Zero();
      for (int n = 0; n < 10; ++n)
        for (int cc = 0; cc < 3; ++cc)
          u[cc] += D[dofmap.u_dof(nodes[n], cc)] * table.pts[g].p2[n];
      sum += table.pts[g].weight * geo.volume * u.squaredNorm();
    }
  }
  return std::sqrt(sum);
}

// L2 norm of the difference between the mixed damage field (vertex + bubble)
// and the penalty damage field (vertex only) on a shared mesh.
inline double alpha_field_l2_difference(const MixedGdSolver& mixed,
                                        const PenaltySolver& penalty,
                                        const Mesh& mesh) {
  const ShapeTable table = tabulate(four_point_rule());
  double sum = 0.0;
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto geo = physical_gradients(table, mesh.tet_coords(t));
    const ElementDofs md = mixed.gather(t);
    const PenaltyElementDofs pd = penalty.gather(t);
    for (int g = 0; g < table.num_points(); ++g) {
      const double diff = alpha_at_gauss_point(table, md, g) -
                          penalty_alpha_at_gauss_point(table, pd, g);
      sum += table.pts[g].weight * geo.volume * diff * diff;
    }
  }
  return std::sqrt(sum);
}

}  // namespace gdfem
