// solver.hpp -- global dof management, sparse assembly of the condensed
// system, symmetric Dirichlet elimination, the per-step Newton loop with
// history updates, and displacement-driven load stepping with bisection.
//
// Three formulations share this machinery: the mixed gradient-damage solver
// (MixedGdSolver), the penalty reference solver (penalty_ref.hpp) and the
// pure-elastic P2 reference (ElasticSolver).
#pragma once

#include "gdfem/element_gd.hpp"
#include "gdfem/mesh.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <thread>
#include <vector>

namespace gdfem {

// Prescribed displacement component on a tagged boundary. The imposed value
// is scale * (current program value); scale = 0 pins the component.
struct BCSpec {
  std::string tag;
  int component = 0;  // 0 = X, 1 = Y, 2 = Z
  double scale = 0.0;
};

struct Constraint {
  int dof;
  double scale;
};

struct DofMap {
  int n_vertices = 0;
  int n_edges = 0;
  bool with_alpha = true;
  std::vector<Constraint> dirichlet;
  std::vector<char> is_constrained;  // per external dof

  int n_nodes() const { return n_vertices + n_edges; }
  int n_u_dofs() const { return 3 * n_nodes(); }
  int n_alpha_dofs() const { return with_alpha ? n_vertices : 0; }
  int n_ext() const { return n_u_dofs() + n_alpha_dofs(); }
  int u_dof(int node, int comp) const { return 3 * node + comp; }
  int alpha_dof(int vertex) const { return n_u_dofs() + vertex; }
};

inline DofMap build_dofmap(const Mesh& mesh, const std::vector<BCSpec>& bcs,
                           bool with_alpha) {
  DofMap map;
  map.n_vertices = mesh.num_vertices();
  map.n_edges = mesh.num_edges();
  map.with_alpha = with_alpha;
  map.is_constrained.assign(map.n_ext(), 0);
  for (const auto& bc : bcs) {
    const int tag = mesh.tag_index(bc.tag);
    for (int node : mesh.nodes_on_tag(tag)) {
      const int dof = map.u_dof(node, bc.component);
      if (!map.is_constrained[dof]) {
        map.is_constrained[dof] = 1;
        map.dirichlet.push_back({dof, bc.scale});
      }
    }
  }
  return map;
}

// Displacement program over normalized step indices 0..n_steps.
struct LoadProgram {
  enum class Kind { MonotoneRamp, Cyclic };
  int n_steps = 1;
  Kind kind = Kind::MonotoneRamp;
  double u_max = 1.0;  // [mm]

  // Load multiplier in [0, 1]; the cyclic program is
  // (t^0.6 sin t + t^0.6) / (2 (8.5 pi)^0.6) sampled uniformly on
  // t in [0, 8.5 pi], which ends exactly at 1.
  double factor(int step) const {
    if (step <= 0) return 0.0;
    const double s = static_cast<double>(step) / n_steps;
    if (kind == Kind::MonotoneRamp) return s;
    const double T = 8.5 * 4.0 * std::atan(1.0);
    const double t = s * T;
    return (std::pow(t, 0.6) * std::sin(t) + std::pow(t, 0.6)) /
           (2.0 * std::pow(T, 0.6));
  }

  double prescribed(int step) const { return u_max * factor(step); }
};

struct StepRecord {
  int step = 0;
  double time = 0.0;          // normalized program time in [0, 1]
  double u_prescribed = 0.0;  // [mm]
  double reaction = 0.0;      // [N]
  int newton_iters = 0;
  double d_max = 0.0;
  double assembly_ms = 0.0;
  double solve_ms = 0.0;
  double residual_norm = 0.0;
  double increment_norm = 0.0;
};

struct SolveReport {
  std::vector<StepRecord> steps;
  bool completed = false;
  std::string abort_reason;
  double total_assembly_ms = 0.0;
  double total_solve_ms = 0.0;
  long total_newton_iters = 0;
  double worst_irreversibility_defect = 0.0;
  double min_gauss_alpha = 0.0;  // most negative Gauss-point excursion seen
  std::map<std::string, std::string> metadata;
};

struct LinearSystem {
  Eigen::SparseMatrix<double> K;  // structurally symmetric, reduced
  Eigen::VectorXd rhs;
  Eigen::VectorXd solution;
};

namespace detail {

// Solve with iterative refinement until the residual contract holds.
template <class Factorization>
bool refined_solve(const Factorization& f, const LinearSystem& sys,
                   double rhs_norm, Eigen::VectorXd& x) {
  x = f.solve(sys.rhs);
  if (f.info() != Eigen::Success) return false;
  for (int pass = 0; pass < 3; ++pass) {
    const Eigen::VectorXd r = sys.rhs - sys.K * x;
    if (r.norm() < 1e-10 * rhs_norm) return true;
    x += f.solve(r);
  }
  return (sys.rhs - sys.K * x).norm() < 1e-10 * rhs_norm;
}

}  // namespace detail

// Direct sparse solve with the factorization contract ||K x - rhs|| <
// 1e-10 ||rhs||. LDLT first (the condensed matrix is symmetric), LU as the
// fallback for indefinite states near limit points. A few iterative
// refinement passes recover the contract on badly scaled systems (mixed
// displacement/damage/multiplier scales, c = 0 runs).
inline void solve_linear(LinearSystem& sys) {
  const double rhs_norm = sys.rhs.norm();
  if (rhs_norm == 0.0) {
    sys.solution = Eigen::VectorXd::Zero(sys.rhs.size());
    return;
  }
  {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys.K);
    Eigen::VectorXd x;
    if (ldlt.info() == Eigen::Success &&
        detail::refined_solve(ldlt, sys, rhs_norm, x)) {
      sys.solution = std::move(x);
      return;
    }
  }
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(sys.K);
  Eigen::VectorXd x;
  if (lu.info() == Eigen::Success &&
      detail::refined_solve(lu, sys, rhs_norm, x)) {
    sys.solution = std::move(x);
    return;
  }
  throw SolverError(
      "sparse factorization failed or missed the residual contract; "
      "run the count test and check the nonlocal parameter c");
}

// Keeps the symbolic analysis of the constant sparsity pattern across
// Newton iterations; falls back to the cold path on trouble.
class CachedDirectSolver {
 public:
  void solve(LinearSystem& sys) {
    const double rhs_norm = sys.rhs.norm();
    if (rhs_norm == 0.0) {
      sys.solution = Eigen::VectorXd::Zero(sys.rhs.size());
      return;
    }
    if (!analyzed_) {
      ldlt_.analyzePattern(sys.K);
      analyzed_ = true;
    }
    ldlt_.factorize(sys.K);
    if (ldlt_.info() == Eigen::Success) {
      Eigen::VectorXd x;
      if (detail::refined_solve(ldlt_, sys, rhs_norm, x)) {
        sys.solution = std::move(x);
        return;
      }
    }
    solve_linear(sys);
  }

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool analyzed_ = false;
};

struct SolverOptions {
  double newton_tol = 1e-8;  // on the full increment norm
  int max_iterations = 50;
  int max_bisections = 6;
  int threads = 1;
};

inline int threads_from_env() {
  if (const char* env = std::getenv("GDFEM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

namespace detail {

// Frozen-pattern sparse accumulator: the triplet pass runs once, subsequent
// assemblies write straight into the value array through precomputed indices.
// Constrained rows and columns are excluded; their diagonals carry 1.
class PatternAssembler {
 public:
  void build(int n, const std::vector<std::vector<int>>& elem_dofs,
             const std::vector<char>& constrained) {
    std::vector<Eigen::Triplet<double>> trips;
    size_t count = n;
    for (const auto& dofs : elem_dofs) count += dofs.size() * dofs.size();
    trips.reserve(count);
    for (const auto& dofs : elem_dofs)
      for (int gi : dofs) {
        if (constrained[gi]) continue;
        for (int gj : dofs) {
          if (constrained[gj]) continue;
          trips.emplace_back(gi, gj, 0.0);
        }
      }
    for (int d = 0; d < n; ++d)
      if (constrained[d]) trips.emplace_back(d, d, 1.0);
    K.resize(n, n);
    K.setFromTriplets(trips.begin(), trips.end());
    K.makeCompressed();

    value_index.resize(elem_dofs.size());
    for (size_t e = 0; e < elem_dofs.size(); ++e) {
      const auto& dofs = elem_dofs[e];
      auto& idx = value_index[e];
      idx.assign(dofs.size() * dofs.size(), -1);
      for (size_t i = 0; i < dofs.size(); ++i) {
        if (constrained[dofs[i]]) continue;
        for (size_t j = 0; j < dofs.size(); ++j) {
          if (constrained[dofs[j]]) continue;
          idx[i * dofs.size() + j] = static_cast<int>(
              &K.coeffRef(dofs[i], dofs[j]) - K.valuePtr());
        }
      }
    }
    diag_one_.clear();
    for (int d = 0; d < n; ++d)
      if (constrained[d])
        diag_one_.push_back(
            static_cast<int>(&K.coeffRef(d, d) - K.valuePtr()));
  }

  void begin_assembly() {
    std::fill(K.valuePtr(), K.valuePtr() + K.nonZeros(), 0.0);
    for (int i : diag_one_) K.valuePtr()[i] = 1.0;
  }

  Eigen::SparseMatrix<double> K;
  std::vector<std::vector<int>> value_index;  // -1 marks eliminated entries

 private:
  std::vector<int> diag_one_;
};

template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2 * threads) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Mixed gradient-damage solver (P2_u - P1B_alpha - P0_lambda, condensed)
// ---------------------------------------------------------------------------

class MixedGdSolver {
 public:
  struct InternalDofs {
    double alpha_bubble = 0.0;
    double lambda = 0.0;
  };

  struct Snapshot {
    Eigen::VectorXd D;
    std::vector<InternalDofs> internal;
    std::vector<ElementHistory> history;
  };

  MixedGdSolver(const Mesh& mesh, const MaterialParams& params,
                const std::vector<BCSpec>& bcs, SolverOptions opts = {})
      : mesh_(mesh),
        params_(params),
        opts_(opts),
        table_(tabulate(four_point_rule())),
        dofmap_(build_dofmap(mesh, bcs, true)) {
    D_ = Eigen::VectorXd::Zero(dofmap_.n_ext());
    internal_.resize(mesh.num_tets());
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
  const Mesh& mesh() const { return mesh_; }
  const Eigen::VectorXd& state() const { return D_; }
  const std::vector<ElementHistory>& history() const { return history_; }
  const std::vector<InternalDofs>& internal() const { return internal_; }
  Eigen::VectorXd& mutable_state() { return D_; }

  ElementDofs gather(int t) const {
    ElementDofs d;
    for (int e = 0; e < kElemExt; ++e) {
      const double v = D_[scatter_[t][e]];
      if (e < kElemU)
        d.u[e] = v;
      else
        d.alpha_v[e - kElemU] = v;
    }
    d.alpha_bubble = internal_[t].alpha_bubble;
    d.lambda = internal_[t].lambda;
    return d;
  }

  void apply_dirichlet(double load_value) {
    for (const auto& c : dofmap_.dirichlet) D_[c.dof] = c.scale * load_value;
  }

  // Assembles the condensed global system and the unreduced residual.
  // The residual at constrained dofs carries the reaction forces.
  void assemble() {
    const int n = dofmap_.n_ext();
    const int nel = mesh_.num_tets();
    condensed_.resize(nel);
    unreduced_R_.resize(nel);
    detail::parallel_for(nel, opts_.threads, [&](int t) {
      const ElementDofs dofs = gather(t);
      const ElementSystem sys = element_residual_tangent(
          table_, geo_[t], dofs, history_[t], params_);
      unreduced_R_[t] = sys.R.head<kElemExt>();
      condensed_[t] = condense(sys, history_[t].constraint_active, t);
    });

    R_full_ = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd R_red = Eigen::VectorXd::Zero(n);
    assembler_.begin_assembly();
    double* values = assembler_.K.valuePtr();
    for (int t = 0; t < nel; ++t) {
      const auto& map = scatter_[t];
      const auto& ce = condensed_[t];
      const auto& idx = assembler_.value_index[t];
      for (int i = 0; i < kElemExt; ++i) {
        const int gi = map[i];
        R_full_[gi] += unreduced_R_[t][i];
        if (dofmap_.is_constrained[gi]) continue;
        R_red[gi] += ce.R_ext[i];
        for (int j = 0; j < kElemExt; ++j) {
          const int vi = idx[i * kElemExt + j];
          if (vi >= 0) values[vi] += ce.K_ext(i, j);
        }
      }
    }
    system_.K = assembler_.K;
    system_.rhs = -R_red;
    last_residual_norm_ = R_red.norm();
  }

  const LinearSystem& linear_system() const { return system_; }
  const Eigen::VectorXd& full_residual() const { return R_full_; }
  double last_residual_norm() const { return last_residual_norm_; }

  // One Newton iteration (assemble, solve, update state and internals, then
  // update the histories with the 1-based iteration index). Returns the full
  // increment norm over external and internal dofs.
  double newton_iteration(int i, double* assembly_ms = nullptr,
                          double* solve_ms = nullptr) {
    auto t0 = detail::Clock::now();
    assemble();
    if (assembly_ms) *assembly_ms += detail::ms_since(t0);

    t0 = detail::Clock::now();
    cached_solver_.solve(system_);
    if (solve_ms) *solve_ms += detail::ms_since(t0);

    double norm_sq = system_.solution.squaredNorm();
    D_ += system_.solution;
    last_internal_increments_.resize(mesh_.num_tets());
    for (int t = 0; t < mesh_.num_tets(); ++t) {
      ExtVector de;
      for (int e = 0; e < kElemExt; ++e)
        de[e] = system_.solution[scatter_[t][e]];
      const Eigen::Vector2d di = condensed_[t].recover(de);
      internal_[t].alpha_bubble += di[0];
      internal_[t].lambda += di[1];
      last_internal_increments_[t] = di;
      norm_sq += di.squaredNorm();
    }

    for (int t = 0; t < mesh_.num_tets(); ++t)
      update_history(table_, gather(t), i, history_[t]);

    return std::sqrt(norm_sq);
  }

  const std::vector<Eigen::Vector2d>& last_internal_increments() const {
    return last_internal_increments_;
  }

  // Newton loop at fixed boundary values. Returns the iteration count;
  // assembly/solve wall time is accumulated into the provided sinks.
  int newton_loop(double* assembly_ms = nullptr, double* solve_ms = nullptr,
                  double* increment_norm = nullptr) {
    for (int i = 1; i <= opts_.max_iterations; ++i) {
      const double norm = newton_iteration(i, assembly_ms, solve_ms);
      if (increment_norm) *increment_norm = norm;
      if (norm < opts_.newton_tol) return i;
    }
    throw NonconvergenceError("Newton loop exceeded " +
                              std::to_string(opts_.max_iterations) +
                              " iterations");
  }

  // Freeze converged histories; returns the worst irreversibility defect.
  double commit() {
    double worst = 0.0;
    for (int t = 0; t < mesh_.num_tets(); ++t)
      worst = std::max(worst, commit_step(table_, gather(t), history_[t]));
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
      const ElementDofs dofs = gather(t);
      for (int g = 0; g < table_.num_points(); ++g)
        dm = std::max(dm, 1.0 - std::exp(-alpha_at_gauss_point(table_, dofs, g)));
    }
    return dm;
  }

  double min_gauss_alpha() const {
    double m = 0.0;
    for (int t = 0; t < mesh_.num_tets(); ++t) {
      const ElementDofs dofs = gather(t);
      for (int g = 0; g < table_.num_points(); ++g)
        m = std::min(m, alpha_at_gauss_point(table_, dofs, g));
    }
    return m;
  }

  Snapshot save_state() const { return {D_, internal_, history_}; }
  void restore_state(const Snapshot& s) {
    D_ = s.D;
    internal_ = s.internal;
    history_ = s.history;
  }

  const SolverOptions& options() const { return opts_; }
  const MaterialParams& params() const { return params_; }

 private:
  const Mesh& mesh_;
  MaterialParams params_;
  SolverOptions opts_;
  ShapeTable table_;
  DofMap dofmap_;
  std::vector<PhysicalShapes> geo_;
  std::vector<std::array<int, kElemExt>> scatter_;

  Eigen::VectorXd D_;
  std::vector<InternalDofs> internal_;
  std::vector<ElementHistory> history_;

  std::vector<CondensedElement> condensed_;
  std::vector<ExtVector> unreduced_R_;
  std::vector<Eigen::Vector2d> last_internal_increments_;
  Eigen::VectorXd R_full_;
  LinearSystem system_;
  detail::PatternAssembler assembler_;
  CachedDirectSolver cached_solver_;
  double last_residual_norm_ = 0.0;
};

// ---------------------------------------------------------------------------
// Pure-elastic P2 reference solver (no damage dofs)
// ---------------------------------------------------------------------------

class ElasticSolver {
 public:
  struct Snapshot {
    Eigen::VectorXd D;
  };

  ElasticSolver(const Mesh& mesh, const MaterialParams& params,
                const std::vector<BCSpec>& bcs, SolverOptions opts = {})
      : mesh_(mesh),
        params_(params),
        opts_(opts),
        table_(tabulate(four_point_rule())),
        dofmap_(build_dofmap(mesh, bcs, false)) {
    D_ = Eigen::VectorXd::Zero(dofmap_.n_ext());
    geo_.reserve(mesh.num_tets());
    scatter_.reserve(mesh.num_tets());
    for (int t = 0; t < mesh.num_tets(); ++t) {
      geo_.push_back(physical_gradients(table_, mesh.tet_coords(t)));
      std::array<int, kElemU> map;
      const auto nodes = mesh.element_nodes(t);
      for (int n = 0; n < 10; ++n)
        for (int c = 0; c < 3; ++c) map[3 * n + c] = dofmap_.u_dof(nodes[n], c);
      scatter_.push_back(map);
    }
    std::vector<std::vector<int>> eldofs(mesh.num_tets());
    for (int t = 0; t < mesh.num_tets(); ++t)
      eldofs[t].assign(scatter_[t].begin(), scatter_[t].end());
    assembler_.build(dofmap_.n_ext(), eldofs, dofmap_.is_constrained);
  }

  const DofMap& dofmap() const { return dofmap_; }
  const Eigen::VectorXd& state() const { return D_; }

  void apply_dirichlet(double load_value) {
    for (const auto& c : dofmap_.dirichlet) D_[c.dof] = c.scale * load_value;
  }

  void assemble() {
    const int n = dofmap_.n_ext();
    const int nel = mesh_.num_tets();
    elem_K_.resize(nel);
    elem_R_.resize(nel);
    detail::parallel_for(nel, opts_.threads, [&](int t) {
      Eigen::Matrix<double, kElemU, 1> u;
      for (int e = 0; e < kElemU; ++e) u[e] = D_[scatter_[t][e]];
      auto& K = elem_K_[t];
      auto& R = elem_R_[t];
      K.setZero();
      R.setZero();
      for (int g = 0; g < table_.num_points(); ++g) {
        const auto& s = geo_[t].pts[g];
        const double dv = table_.pts[g].weight * geo_[t].volume;
        Mat3 F = Mat3::Identity();
        for (int nn = 0; nn < 10; ++nn)
          F += u.segment<3>(3 * nn) * s.du[nn].transpose();
        const NeoHookeResponse nh = neo_hooke(F, params_);
        for (int I = 0; I < 10; ++I) R.segment<3>(3 * I) += dv * (nh.P0 * s.du[I]);
        for (int I = 0; I < 10; ++I)
          for (int Kn = I; Kn < 10; ++Kn) {
            Mat3 blk = Mat3::Zero();
            for (int J = 0; J < 3; ++J)
              for (int L = 0; L < 3; ++L) {
                const double w = s.du[I][J] * s.du[Kn][L];
                for (int i = 0; i < 3; ++i)
                  for (int k = 0; k < 3; ++k)
                    blk(i, k) += w * nh.A0(3 * J + i, 3 * L + k);
              }
            K.block<3, 3>(3 * I, 3 * Kn) += dv * blk;
            if (Kn != I) K.block<3, 3>(3 * Kn, 3 * I) += dv * blk.transpose();
          }
      }
    });

    R_full_ = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd R_red = Eigen::VectorXd::Zero(n);
    assembler_.begin_assembly();
    double* values = assembler_.K.valuePtr();
    for (int t = 0; t < nel; ++t) {
      const auto& map = scatter_[t];
      const auto& idx = assembler_.value_index[t];
      for (int i = 0; i < kElemU; ++i) {
        const int gi = map[i];
        R_full_[gi] += elem_R_[t][i];
        if (dofmap_.is_constrained[gi]) continue;
        R_red[gi] += elem_R_[t][i];
        for (int j = 0; j < kElemU; ++j) {
          const int vi = idx[i * kElemU + j];
          if (vi >= 0) values[vi] += elem_K_[t](i, j);
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
      const double norm = system_.solution.norm();
      if (increment_norm) *increment_norm = norm;
      if (norm < opts_.newton_tol) return i;
    }
    throw NonconvergenceError("Newton loop exceeded " +
                              std::to_string(opts_.max_iterations) +
                              " iterations");
  }

  double commit() { return 0.0; }

  double reaction(const std::string& tag_name, int component) const {
    const int tag = mesh_.tag_index(tag_name);
    double sum = 0.0;
    for (int node : mesh_.nodes_on_tag(tag)) {
      const int dof = dofmap_.u_dof(node, component);
      if (dofmap_.is_constrained[dof]) sum += R_full_[dof];
    }
    return sum;
  }

  double d_max() const { return 0.0; }
  double min_gauss_alpha() const { return 0.0; }

  Snapshot save_state() const { return {D_}; }
  void restore_state(const Snapshot& s) { D_ = s.D; }

  const SolverOptions& options() const { return opts_; }
  const Eigen::VectorXd& full_residual() const { return R_full_; }

 private:
  const Mesh& mesh_;
  MaterialParams params_;
  SolverOptions opts_;
  ShapeTable table_;
  DofMap dofmap_;
  std::vector<PhysicalShapes> geo_;
  std::vector<std::array<int, kElemU>> scatter_;
  Eigen::VectorXd D_;
  std::vector<Eigen::Matrix<double, kElemU, kElemU>> elem_K_;
  std::vector<Eigen::Matrix<double, kElemU, 1>> elem_R_;
  Eigen::VectorXd R_full_;
  LinearSystem system_;
  detail::PatternAssembler assembler_;
  CachedDirectSolver cached_solver_;
};

// ---------------------------------------------------------------------------
// Displacement-driven load stepping with bisection on nonconvergence
// ---------------------------------------------------------------------------

struct RunOptions {
  std::string observation_tag = "yL";
  int reaction_component = 1;  // Y
  // called after each committed scheduled step
  std::function<void(int step, const StepRecord&)> on_step;
};

// Runs the program step by step. A step that fails to converge (or inverts)
// is retried with up to max_bisections halvings of the load increment; if the
// smallest increment still fails the run aborts with a partial report.
template <class Solver>
SolveReport run_program(Solver& solver, const LoadProgram& program,
                        const RunOptions& run = {}) {
  SolveReport report;
  report.steps.reserve(program.n_steps);
  double current = 0.0;

  for (int k = 1; k <= program.n_steps; ++k) {
    const double target = program.prescribed(k);
    StepRecord rec;
    rec.step = k;
    rec.time = static_cast<double>(k) / program.n_steps;
    rec.u_prescribed = target;

    int bisections = 0;
    double value = target;
    bool step_done = false;
    while (!step_done) {
      auto snap = solver.save_state();
      std::string failure;
      try {
        solver.apply_dirichlet(value);
        rec.newton_iters += solver.newton_loop(&rec.assembly_ms, &rec.solve_ms,
                                               &rec.increment_norm);
        report.worst_irreversibility_defect = std::max(
            report.worst_irreversibility_defect, solver.commit());
        current = value;
        if (value == target)
          step_done = true;
        else
          value = target;  // substep done, try the remaining jump
        continue;
      } catch (const NonconvergenceError& e) {
        failure = std::string("nonconvergence: ") + e.what();
      } catch (const InvertedStateError& e) {
        failure = std::string("element inversion: ") + e.what();
      } catch (const SolverError& e) {
        failure = std::string("linear solver degeneracy: ") + e.what();
      } catch (const CondensationError& e) {
        failure = std::string("condensation degeneracy: ") + e.what();
      }
      // transient failures (too-large increments, wild iterates) are retried
      // on a halved increment; structural ones exhaust the budget and abort
      // with the partial report retained
      solver.restore_state(snap);
      if (++bisections > solver.options().max_bisections) {
        report.completed = false;
        report.abort_reason = failure + " at prescribed value " +
                              std::to_string(value) + " after " +
                              std::to_string(bisections - 1) + " bisections";
        report.total_assembly_ms += rec.assembly_ms;
        report.total_solve_ms += rec.solve_ms;
        report.total_newton_iters += rec.newton_iters;
        return report;
      }
      value = 0.5 * (current + value);
    }

    rec.reaction = solver.reaction(run.observation_tag, run.reaction_component);
    rec.d_max = solver.d_max();
    report.min_gauss_alpha =
        std::min(report.min_gauss_alpha, solver.min_gauss_alpha());
    report.total_assembly_ms += rec.assembly_ms;
    report.total_solve_ms += rec.solve_ms;
    report.total_newton_iters += rec.newton_iters;
    report.steps.push_back(rec);
    if (run.on_step) run.on_step(k, rec);
  }
  report.completed = true;
  return report;
}

}  // namespace gdfem
