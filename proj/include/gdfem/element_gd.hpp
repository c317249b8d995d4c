// element_gd.hpp -- the mixed element P2_u - P1B_alpha - P0_lambda: residual
// and consistent tangent of the per-element discrete Lagrangian
//
//   L_T = int_T [ psi(F, alpha) + c/2 |Grad alpha|^2 + phi_s(alpha)
//                 + lambda (alpha - alpha_bar) ] dX  +  Pi_ext_T,
//
// Gauss-point history management with per-element constraint switching, and
// static condensation of the internal pair (bubble amplitude, multiplier).
//
// Element dof order: 30 displacement values (10 P2 nodes x 3), 4 vertex
// damage values, 1 bubble amplitude, 1 multiplier. All integrals use the
// four-point rule, including the quartic bubble products (deliberate
// underintegration; the rule is applied uniformly to every integrand).
#pragma once

#include "gdfem/interpolation.hpp"
#include "gdfem/material.hpp"

#include <array>
#include <cmath>

namespace gdfem {

inline constexpr int kElemU = 30;
inline constexpr int kElemAlphaV = 4;
inline constexpr int kElemExt = kElemU + kElemAlphaV;  // 34 condensed dofs
inline constexpr int kElemAll = kElemExt + 2;          // + bubble + lambda

using ElementVector = Eigen::Matrix<double, kElemAll, 1>;
using ElementMatrix = Eigen::Matrix<double, kElemAll, kElemAll>;
using ExtVector = Eigen::Matrix<double, kElemExt, 1>;
using ExtMatrix = Eigen::Matrix<double, kElemExt, kElemExt>;

struct ElementDofs {
  Eigen::Matrix<double, kElemU, 1> u = Eigen::Matrix<double, kElemU, 1>::Zero();
  Eigen::Vector4d alpha_v = Eigen::Vector4d::Zero();
  double alpha_bubble = 0.0;
  double lambda = 0.0;  // multiplier [MPa], elementwise constant
};

// Per-Gauss-point history plus the per-element constraint activity. The
// multiplier value doubles as the frozen value while the constraint is off.
struct ElementHistory {
  std::array<double, 4> alpha_bar{};  // history damage value per Gauss point
  std::array<double, 4> alpha_n{};    // converged damage of the last time step
  bool constraint_active = true;
  double lambda_frozen = 0.0;
};

struct ElementSystem {
  ElementVector R = ElementVector::Zero();
  ElementMatrix K = ElementMatrix::Zero();
};

// Damage field value at Gauss point g of the tabulated rule.
inline double alpha_at_gauss_point(const ShapeTable& table,
                                   const ElementDofs& dofs, int g) {
  const auto& t = table.pts[g];
  double a = dofs.alpha_bubble * t.bubble;
  for (int v = 0; v < 4; ++v) a += dofs.alpha_v[v] * t.p1[v];
  return a;
}

// Value of the element Lagrangian, used by the finite-difference oracles.
// When the constraint is inactive the multiplier term vanishes identically
// (alpha_bar tracks alpha) and contributes nothing.
inline double element_energy(const ShapeTable& table,
                             const PhysicalShapes& shapes,
                             const ElementDofs& dofs,
                             const ElementHistory& hist,
                             const MaterialParams& params) {
  double L = 0.0;
  for (int g = 0; g < table.num_points(); ++g) {
    const auto& t = table.pts[g];
    const auto& s = shapes.pts[g];
    const double dv = t.weight * shapes.volume;

    Mat3 F = Mat3::Identity();
    for (int n = 0; n < 10; ++n)
      F += dofs.u.segment<3>(3 * n) * s.du[n].transpose();
    const double alpha = alpha_at_gauss_point(table, dofs, g);
    if (alpha < -60.0)
      throw InvertedStateError("runaway damage iterate at a Gauss point");
    Vec3 grad_alpha = dofs.alpha_bubble * s.dbubble;
    for (int v = 0; v < 4; ++v) grad_alpha += dofs.alpha_v[v] * s.dalpha_v[v];

    const NeoHookeResponse nh = neo_hooke(F, params);
    const double D = 1.0 - std::exp(-alpha);
    const double phis = 0.5 * params.d1 * alpha * alpha + params.d0 * alpha;
    double val = (1.0 - D) * nh.psi0 +
                 0.5 * params.c * grad_alpha.squaredNorm() + phis;
    if (hist.constraint_active)
      val += dofs.lambda * (alpha - hist.alpha_bar[g]);
    L += dv * val;
  }
  return L;
}

// R = dL/d(dofs), K = d2L/d(dofs)^2 by exact differentiation of the
// quadrature-evaluated integrand. With the constraint active the multiplier
// row is int (alpha - alpha_bar) dX, the couplings K_{alpha,lambda} are the
// shape integrals, and K_{u,lambda} = K_{lambda,lambda} = 0. With the
// constraint inactive the term is dropped and the multiplier equation is
// replaced by the freeze Delta lambda = 0 (unit diagonal, zero residual),
// keeping the element dimension fixed across switches.
inline ElementSystem element_residual_tangent(const ShapeTable& table,
                                              const PhysicalShapes& shapes,
                                              const ElementDofs& dofs,
                                              const ElementHistory& hist,
                                              const MaterialParams& params) {
  ElementSystem sys;
  const bool active = hist.constraint_active;
  const int iB = kElemExt;      // bubble amplitude index (34)
  const int iL = kElemExt + 1;  // multiplier index (35)

  for (int g = 0; g < table.num_points(); ++g) {
    const auto& t = table.pts[g];
    const auto& s = shapes.pts[g];
    const double dv = t.weight * shapes.volume;

    PointState state;
    state.F = Mat3::Identity();
    for (int n = 0; n < 10; ++n)
      state.F += dofs.u.segment<3>(3 * n) * s.du[n].transpose();
    state.alpha = alpha_at_gauss_point(table, dofs, g);
    state.grad_alpha = dofs.alpha_bubble * s.dbubble;
    for (int v = 0; v < 4; ++v)
      state.grad_alpha += dofs.alpha_v[v] * s.dalpha_v[v];

    // alpha may transiently dip below zero during iterations; the material
    // formulas extend smoothly, so evaluate them directly here. A runaway
    // iterate is cut off like an inverted element so the stepper can bisect.
    if (state.alpha < -60.0)
      throw InvertedStateError("runaway damage iterate at a Gauss point");
    const NeoHookeResponse nh = neo_hooke(state.F, params);
    const double expm = std::exp(-state.alpha);
    const double one_minus_D = expm;
    const double psi_a = -expm * nh.psi0;         // dpsi/dalpha
    const double psi_aa = expm * nh.psi0;         // d2psi/dalpha2
    const Mat3 psi_Fa = -expm * nh.P0;            // d2psi/dF dalpha
    const double phis_a = params.d1 * state.alpha + params.d0;
    const double phis_aa = params.d1;

    // damage shape values / physical gradients, bubble last
    std::array<double, 5> Na;
    std::array<Vec3, 5> dNa;
    for (int v = 0; v < 4; ++v) {
      Na[v] = t.p1[v];
      dNa[v] = s.dalpha_v[v];
    }
    Na[4] = t.bubble;
    dNa[4] = s.dbubble;

    const Mat3 P = one_minus_D * nh.P0;

    // displacement residual: int P : (dN_I otimes e_i)
    for (int I = 0; I < 10; ++I)
      sys.R.segment<3>(3 * I) += dv * (P * s.du[I]);

    // damage residual
    for (int a = 0; a < 5; ++a) {
      double r = psi_a * Na[a] + params.c * state.grad_alpha.dot(dNa[a]) +
                 phis_a * Na[a];
      if (active) r += dofs.lambda * Na[a];
      const int row = a < 4 ? kElemU + a : iB;
      sys.R[row] += dv * r;
    }

    // multiplier residual
    if (active) sys.R[iL] += dv * (state.alpha - hist.alpha_bar[g]);

    // K_uu: A contracted with both gradients
    for (int I = 0; I < 10; ++I) {
      for (int Kn = I; Kn < 10; ++Kn) {
        Mat3 blk = Mat3::Zero();
        for (int J = 0; J < 3; ++J)
          for (int L = 0; L < 3; ++L) {
            const double w = s.du[I][J] * s.du[Kn][L];
            for (int i = 0; i < 3; ++i)
              for (int k = 0; k < 3; ++k)
                blk(i, k) += w * one_minus_D * nh.A0(3 * J + i, 3 * L + k);
          }
        sys.K.block<3, 3>(3 * I, 3 * Kn) += dv * blk;
        if (Kn != I) sys.K.block<3, 3>(3 * Kn, 3 * I) += dv * blk.transpose();
      }
    }

    // K_{u,alpha} and its transpose
    for (int I = 0; I < 10; ++I) {
      const Vec3 col = psi_Fa * s.du[I];
      for (int a = 0; a < 5; ++a) {
        const int acol = a < 4 ? kElemU + a : iB;
        const Vec3 v = dv * Na[a] * col;
        sys.K.block<3, 1>(3 * I, acol) += v;
        sys.K.block<1, 3>(acol, 3 * I) += v.transpose();
      }
    }

    // K_{alpha,alpha}
    for (int a = 0; a < 5; ++a) {
      const int ra = a < 4 ? kElemU + a : iB;
      for (int b = 0; b < 5; ++b) {
        const int rb = b < 4 ? kElemU + b : iB;
        sys.K(ra, rb) += dv * ((psi_aa + phis_aa) * Na[a] * Na[b] +
                               params.c * dNa[a].dot(dNa[b]));
      }
    }

    // K_{alpha,lambda} coupling (zero u-lambda and lambda-lambda blocks)
    if (active) {
      for (int a = 0; a < 5; ++a) {
        const int ra = a < 4 ? kElemU + a : iB;
        sys.K(ra, iL) += dv * Na[a];
        sys.K(iL, ra) += dv * Na[a];
      }
    }
  }

  if (!hist.constraint_active) {
    sys.K(kElemExt + 1, kElemExt + 1) = 1.0;  // Delta lambda = 0
    sys.R[kElemExt + 1] = 0.0;
  }
  return sys;
}

// Schur complement on the internal pair (bubble, lambda) when the constraint
// is active, on the bubble alone when it is off. Stores what is needed to
// recover the internal increments from the external ones.
struct CondensedElement {
  ExtMatrix K_ext;
  ExtVector R_ext;
  Eigen::Matrix<double, 2, kElemExt> K_ie;
  Eigen::Matrix2d Kii_inv;
  Eigen::Vector2d R_i;
  bool active = true;

  // Internal increments (Delta alpha_B, Delta lambda) given the external ones.
  Eigen::Vector2d recover(const ExtVector& delta_ext) const {
    return -Kii_inv * (R_i + K_ie * delta_ext);
  }
};

inline CondensedElement condense(const ElementSystem& sys,
                                 bool constraint_active, int element_id = -1) {
  CondensedElement c;
  c.active = constraint_active;
  const int iB = kElemExt, iL = kElemExt + 1;

  Eigen::Matrix2d Kii;
  Kii << sys.K(iB, iB), sys.K(iB, iL), sys.K(iL, iB), sys.K(iL, iL);
  Eigen::Matrix<double, 2, kElemExt> Kie;
  Kie.row(0) = sys.K.row(iB).head<kElemExt>();
  Kie.row(1) = sys.K.row(iL).head<kElemExt>();
  Eigen::Vector2d Ri(sys.R[iB], sys.R[iL]);

  if (constraint_active) {
    // [[K_BB, K_BL], [K_LB, 0]] is invertible iff the shape integral
    // K_BL = int N_B dX is non-zero; K_BB does not enter the determinant.
    const double det = Kii(0, 0) * Kii(1, 1) - Kii(0, 1) * Kii(1, 0);
    if (!std::isfinite(det) || std::abs(Kii(0, 1)) <= 1e-300)
      throw CondensationError(
          "singular internal (bubble, lambda) block in element " +
          std::to_string(element_id) +
          "; check for c = 0 with a degenerate state");
    c.Kii_inv << Kii(1, 1), -Kii(0, 1), -Kii(1, 0), Kii(0, 0);
    c.Kii_inv /= det;
  } else {
    // only the bubble is eliminated; the multiplier row is Delta lambda = 0
    if (!std::isfinite(Kii(0, 0)) || std::abs(Kii(0, 0)) <= 1e-300)
      throw CondensationError(
          "zero bubble stiffness in element " + std::to_string(element_id) +
          "; check for c = 0 with a degenerate state");
    c.Kii_inv.setZero();
    c.Kii_inv(0, 0) = 1.0 / Kii(0, 0);
    c.Kii_inv(1, 1) = 1.0;  // paired with K(iL,iL) = 1 freeze row
  }

  c.K_ie = Kie;
  c.R_i = Ri;
  const Eigen::Matrix<double, kElemExt, 2> Kei =
      sys.K.topRightCorner<kElemExt, 2>();
  c.K_ext = sys.K.topLeftCorner<kElemExt, kElemExt>() - Kei * c.Kii_inv * Kie;
  c.R_ext = sys.R.head<kElemExt>() - Kei * c.Kii_inv * Ri;
  return c;
}

// History update after global Newton solve i (1-based within the time step),
// following the per-step solution strategy: by default the history falls back
// to the last converged value and the constraint is switched on; a positive
// multiplier switches it off and lets the damage evolve, except right after
// the first solve, where the constraint is always re-activated so that
// loading/de-loading transitions are re-evaluated with a fresh multiplier.
inline void update_history(const ShapeTable& table, const ElementDofs& dofs,
                           int iteration, ElementHistory& hist) {
  hist.alpha_bar = hist.alpha_n;
  hist.constraint_active = true;
  if (dofs.lambda > 0.0 && iteration != 1) {
    for (int g = 0; g < table.num_points(); ++g)
      hist.alpha_bar[g] = alpha_at_gauss_point(table, dofs, g);
    hist.constraint_active = false;
    hist.lambda_frozen = dofs.lambda;
  }
}

// Freeze the converged state into the history. Returns the worst
// irreversibility defect max(alpha_n_old - alpha_new) over the Gauss points
// (positive means some committed value decreased); callers treat values
// above 1e-8 as a diagnostic error.
inline double commit_step(const ShapeTable& table, const ElementDofs& dofs,
                          ElementHistory& hist) {
  double worst = 0.0;
  for (int g = 0; g < table.num_points(); ++g) {
    const double a = alpha_at_gauss_point(table, dofs, g);
    worst = std::max(worst, hist.alpha_n[g] - a);
    hist.alpha_n[g] = a;
    hist.alpha_bar[g] = a;
  }
  hist.lambda_frozen = dofs.lambda;
  return worst;
}

inline void commit_step_checked(const ShapeTable& table,
                                const ElementDofs& dofs,
                                ElementHistory& hist) {
  const double worst = commit_step(table, dofs, hist);
  if (worst > 1e-8)
    throw IrreversibilityError(
        "committed Gauss-point damage decreased by " + std::to_string(worst));
}

}  // namespace gdfem
