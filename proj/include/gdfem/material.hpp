// material.hpp -- pointwise constitutive evaluations: compressible Neo-Hooke
// energy, exponential damage function, linear-quadratic dissipation, first
// Piola-Kirchhoff stress and all first/second derivatives with respect to the
// deformation gradient and the damage variable. All derivatives are analytic;
// finite differences appear only in test oracles.
#pragma once

#include "gdfem/core.hpp"

#include <cmath>

namespace gdfem {

struct MaterialParams {
  double E = 0.0;        // Young's modulus [MPa]
  double nu = 0.0;       // Poisson ratio
  double d0 = 0.0;       // dissipation threshold parameter [MPa]
  double d1 = 0.0;       // quadratic dissipation parameter [MPa]
  double c = 0.0;        // nonlocal gradient parameter [N mm]
  double lambda_lame = 0.0;  // [MPa]
  double mu = 0.0;           // [MPa]

  static MaterialParams from_E_nu(double E, double nu, double d0, double d1,
                                  double c) {
    if (E <= 0.0) throw std::invalid_argument("E must be positive");
    if (nu < 0.0 || nu >= 0.5)
      throw std::invalid_argument("nu must lie in [0, 0.5)");
    MaterialParams p;
    p.E = E;
    p.nu = nu;
    p.lambda_lame = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    p.mu = E / (2.0 * (1.0 + nu));
    p.set_damage(d0, d1, c);
    return p;
  }

  static MaterialParams from_lame(double lambda, double mu, double d0,
                                  double d1, double c) {
    if (mu <= 0.0) throw std::invalid_argument("mu must be positive");
    MaterialParams p;
    p.lambda_lame = lambda;
    p.mu = mu;
    p.E = mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu);
    p.nu = lambda / (2.0 * (lambda + mu));
    p.set_damage(d0, d1, c);
    return p;
  }

 private:
  void set_damage(double d0_, double d1_, double c_) {
    if (d0_ < 0.0 || d1_ < 0.0 || d0_ + d1_ <= 0.0)
      throw std::invalid_argument("need d0, d1 >= 0 with d0 + d1 > 0");
    if (c_ < 0.0) throw std::invalid_argument("c must be non-negative");
    d0 = d0_;
    d1 = d1_;
    c = c_;
  }
};

struct PointState {
  Mat3 F = Mat3::Identity();  // deformation gradient
  double alpha = 0.0;         // damage variable, >= 0
  Vec3 grad_alpha = Vec3::Zero();
};

struct NeoHookeResponse {
  double psi0;  // energy density [MPa]
  Mat3 P0;      // first Piola-Kirchhoff stress of the undamaged material
  Tensor4 A0;   // dP0/dF
};

// psi0 = mu/2 (I_C - 3) + lambda/4 (J^2 - 1) - lambda/2 ln J - mu ln J
// with I_C = tr(F^T F) and J = det F.
inline NeoHookeResponse neo_hooke(const Mat3& F, const MaterialParams& p) {
  const double J = F.determinant();
  if (J <= 0.0)
    throw InvertedStateError("neo_hooke: det F <= 0");
  const double IC = (F.transpose() * F).trace();
  const double lnJ = std::log(J);
  const double la = p.lambda_lame, mu = p.mu;

  NeoHookeResponse r;
  r.psi0 = 0.5 * mu * (IC - 3.0) + 0.25 * la * (J * J - 1.0) - 0.5 * la * lnJ -
           mu * lnJ;

  const Mat3 Finv = F.inverse();
  const Mat3 FinvT = Finv.transpose();
  // P0 = mu (F - F^{-T}) + lambda/2 (J^2 - 1) F^{-T}
  const double g = 0.5 * la * (J * J - 1.0);
  r.P0 = mu * (F - FinvT) + g * FinvT;

  // A0_iJkL = mu d_ik d_JL + lambda J^2 Finv_Ji Finv_Lk
  //           + (mu - g) Finv_Jk Finv_Li
  const double laJ2 = la * J * J;
  const double h = mu - g;
  for (int i = 0; i < 3; ++i)
    for (int J_ = 0; J_ < 3; ++J_)
      for (int k = 0; k < 3; ++k)
        for (int L = 0; L < 3; ++L) {
          double v = laJ2 * Finv(J_, i) * Finv(L, k) +
                     h * Finv(J_, k) * Finv(L, i);
          if (i == k && J_ == L) v += mu;
          r.A0(3 * J_ + i, 3 * L + k) = v;
        }
  return r;
}

struct DamageValue {
  double D;    // softening value in [0, 1)
  double Dp;   // first derivative
  double Dpp;  // second derivative
};

// D(alpha) = 1 - exp(-alpha); D(0) = 0, D -> 1 monotonically. The softening
// factor 1 - D = exp(-alpha) stays positive in double precision far beyond
// any damage level reached in practice; consumers use it directly.
inline DamageValue damage_function(double alpha) {
  if (alpha < 0.0)
    throw std::domain_error("damage_function: alpha must be non-negative");
  const double e = std::exp(-alpha);
  return {-std::expm1(-alpha), e, -e};
}

struct DissipationValue {
  double phi;    // [MPa]
  double phip;   // first derivative, >= 0
  double phipp;  // second derivative
};

// phi_s(alpha) = d1/2 alpha^2 + d0 alpha. d1 = 0 or d0 = 0 recover the
// constant-threshold and purely quadratic special cases.
inline DissipationValue dissipation(double alpha, const MaterialParams& p) {
  if (alpha < 0.0)
    throw std::domain_error("dissipation: alpha must be non-negative");
  return {0.5 * p.d1 * alpha * alpha + p.d0 * alpha, p.d1 * alpha + p.d0,
          p.d1};
}

struct PointResponse {
  double psi;            // (1 - D) psi0 [MPa]
  double psi0;           // undamaged energy, kept for yield evaluations
  Mat3 P;                // (1 - D) P0
  double dpsi_dalpha;    // -D' psi0
  double d2psi_dalpha2;  // -D'' psi0
  Mat3 d2psi_dF_dalpha;  // -D' P0
  Tensor4 A;             // (1 - D) A0
  double dphis_dalpha;
  double d2phis_dalpha2;
};

inline PointResponse point_response(const PointState& s,
                                    const MaterialParams& p) {
  const NeoHookeResponse nh = neo_hooke(s.F, p);
  const DamageValue d = damage_function(s.alpha);
  const DissipationValue phi = dissipation(s.alpha, p);
  PointResponse r;
  r.psi0 = nh.psi0;
  r.psi = (1.0 - d.D) * nh.psi0;
  r.P = (1.0 - d.D) * nh.P0;
  r.dpsi_dalpha = -d.Dp * nh.psi0;
  r.d2psi_dalpha2 = -d.Dpp * nh.psi0;
  r.d2psi_dF_dalpha = -d.Dp * nh.P0;
  r.A = (1.0 - d.D) * nh.A0;
  r.dphis_dalpha = phi.phip;
  r.d2phis_dalpha2 = phi.phipp;
  return r;
}

// Damage evolution criterion Phi = -dpsi/dalpha + c Laplacian(alpha)
// - dphis/dalpha. Weak-form callers pass laplacian_term = 0 and carry the
// gradient term separately; strong-form diagnostics pass c * Laplacian.
inline double yield_value(const PointState& s, double laplacian_term,
                          const MaterialParams& p) {
  const NeoHookeResponse nh = neo_hooke(s.F, p);
  const DamageValue d = damage_function(s.alpha);
  const DissipationValue phi = dissipation(s.alpha, p);
  return d.Dp * nh.psi0 + laplacian_term - phi.phip;
}

}  // namespace gdfem
