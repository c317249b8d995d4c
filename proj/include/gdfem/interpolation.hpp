// interpolation.hpp -- reference-element shape functions (P2, P1, quartic
// volume bubble, P0), the four-point Gauss rule on the tetrahedron, and the
// isoparametric mapping to physical gradients.
//
// Conventions:
//  * A RefPoint stores the four tetrahedral volume coordinates
//    (xi, eta, zeta, kappa), one per vertex 0..3, summing to 1.
//  * "Reference gradients" are taken with respect to the three independent
//    parametric coordinates (r, s, t) = (eta, zeta, kappa) of the unit
//    reference tet with vertices V0 = (0,0,0), V1 = e1, V2 = e2, V3 = e3,
//    i.e. xi = 1 - r - s - t is the dependent coordinate.
//  * Quadrature weights are fractions of the reference volume: an integral
//    over a tet T of volume |T| is |T| * sum_g w_g f(g) with sum_g w_g = 1.
#pragma once

#include "gdfem/core.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace gdfem {

struct RefPoint {
  std::array<double, 4> b{};  // volume coordinates, b[i] belongs to vertex i

  double xi() const { return b[0]; }
  double eta() const { return b[1]; }
  double zeta() const { return b[2]; }
  double kappa() const { return b[3]; }
};

inline RefPoint make_ref_point(double b0, double b1, double b2, double b3) {
  RefPoint p{{b0, b1, b2, b3}};
  const double s = b0 + b1 + b2 + b3;
  if (std::abs(s - 1.0) > 1e-14)
    throw std::invalid_argument("volume coordinates must sum to 1");
  return p;
}

struct QuadratureRule {
  std::vector<RefPoint> points;
  std::vector<double> weights;  // reference-volume fractions, sum to 1
};

// Symmetric degree-2 rule: the four permutations of (a, b, b, b) with
// a = (5 + 3*sqrt(5))/20 and b = (5 - sqrt(5))/20, equal weights 1/4.
// The coordinates follow from requiring exactness for all monomials of
// total degree <= 2 on the reference tet.
inline QuadratureRule four_point_rule() {
  const double a = (5.0 + 3.0 * std::sqrt(5.0)) / 20.0;
  const double b = (5.0 - std::sqrt(5.0)) / 20.0;
  QuadratureRule rule;
  rule.points.reserve(4);
  for (int k = 0; k < 4; ++k) {
    std::array<double, 4> c{b, b, b, b};
    c[k] = a;
    rule.points.push_back(RefPoint{c});
    rule.weights.push_back(0.25);
  }
  return rule;
}

// Analytic integral of xi^a eta^b zeta^c kappa^d over the reference tet
// (volume 1/6): a! b! c! d! / (a+b+c+d+3)!  used as the exactness oracle.
inline double barycentric_monomial_integral(int a, int b, int c, int d) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) * fact(c) * fact(d) / fact(a + b + c + d + 3);
}

struct BubbleEval {
  double value;
  std::array<double, 4> dbary;  // partials w.r.t. each volume coordinate
};

// Quartic volume bubble 256 xi eta zeta kappa: value 1 at the element
// center, 0 on every face.
inline BubbleEval eval_bubble(const RefPoint& p) {
  BubbleEval e;
  e.value = 256.0 * p.b[0] * p.b[1] * p.b[2] * p.b[3];
  for (int i = 0; i < 4; ++i) {
    double g = 256.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) g *= p.b[j];
    e.dbary[i] = g;
  }
  return e;
}

struct P1Eval {
  std::array<double, 4> value;
  std::array<Vec3, 4> grad;  // w.r.t. (r,s,t); constant
};

inline P1Eval eval_p1(const RefPoint& p) {
  P1Eval e;
  e.value = p.b;
  e.grad[0] = Vec3(-1.0, -1.0, -1.0);
  e.grad[1] = Vec3(1.0, 0.0, 0.0);
  e.grad[2] = Vec3(0.0, 1.0, 0.0);
  e.grad[3] = Vec3(0.0, 0.0, 1.0);
  return e;
}

struct P2Eval {
  std::array<double, 10> value;
  std::array<Vec3, 10> grad;  // w.r.t. (r,s,t)
};

// 10-node quadratic Lagrange basis: vertex functions b_i (2 b_i - 1) for
// nodes 0..3 and edge functions 4 b_i b_j for nodes 4..9 with the edge
// order (0,1), (0,2), (0,3), (1,2), (1,3), (2,3).
inline constexpr std::array<std::array<int, 2>, 6> kTetEdges = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

inline P2Eval eval_p2(const RefPoint& p) {
  P2Eval e;
  // barycentric partials first, then project to the independent coords
  std::array<std::array<double, 4>, 10> db{};
  for (int i = 0; i < 4; ++i) {
    e.value[i] = p.b[i] * (2.0 * p.b[i] - 1.0);
    db[i][i] = 4.0 * p.b[i] - 1.0;
  }
  for (int k = 0; k < 6; ++k) {
    const int i = kTetEdges[k][0], j = kTetEdges[k][1];
    e.value[4 + k] = 4.0 * p.b[i] * p.b[j];
    db[4 + k][i] = 4.0 * p.b[j];
    db[4 + k][j] = 4.0 * p.b[i];
  }
  for (int n = 0; n < 10; ++n)
    e.grad[n] = Vec3(db[n][1] - db[n][0], db[n][2] - db[n][0],
                     db[n][3] - db[n][0]);
  return e;
}

// Everything tabulated once per quadrature rule and shared read-only.
struct ShapeTable {
  struct PointData {
    RefPoint point;
    double weight;
    std::array<double, 10> p2;
    std::array<Vec3, 10> p2_grad;
    std::array<double, 4> p1;
    std::array<Vec3, 4> p1_grad;
    double bubble;
    Vec3 bubble_grad;
    double p0 = 1.0;
  };
  std::vector<PointData> pts;

  int num_points() const { return static_cast<int>(pts.size()); }
};

inline ShapeTable tabulate(const QuadratureRule& rule) {
  ShapeTable table;
  table.pts.reserve(rule.points.size());
  for (size_t g = 0; g < rule.points.size(); ++g) {
    ShapeTable::PointData d;
    d.point = rule.points[g];
    d.weight = rule.weights[g];
    const P2Eval p2 = eval_p2(d.point);
    d.p2 = p2.value;
    d.p2_grad = p2.grad;
    const P1Eval p1 = eval_p1(d.point);
    d.p1 = p1.value;
    d.p1_grad = p1.grad;
    const BubbleEval bub = eval_bubble(d.point);
    d.bubble = bub.value;
    d.bubble_grad = Vec3(bub.dbary[1] - bub.dbary[0],
                         bub.dbary[2] - bub.dbary[0],
                         bub.dbary[3] - bub.dbary[0]);
    table.pts.push_back(d);
  }
  return table;
}

// Per-element isoparametric data: physical (material-coordinate) gradients of
// every tabulated function plus the constant Jacobian determinant. Gradients
// of affine-mapped simplices are J^{-T} times the reference gradients.
struct PhysicalShapes {
  struct PointData {
    std::array<Vec3, 10> du;        // P2 gradients w.r.t. X
    std::array<Vec3, 4> dalpha_v;   // P1 gradients w.r.t. X
    Vec3 dbubble;
  };
  std::vector<PointData> pts;
  double det_jacobian = 0.0;        // 6 * volume
  double volume = 0.0;
};

inline PhysicalShapes physical_gradients(const ShapeTable& table,
                                         const std::array<Vec3, 4>& X) {
  Mat3 J;
  J.col(0) = X[1] - X[0];
  J.col(1) = X[2] - X[0];
  J.col(2) = X[3] - X[0];
  const double det = J.determinant();
  if (det <= 0.0)
    throw InvertedStateError("inverted element: non-positive Jacobian");
  const Mat3 JinvT = J.inverse().transpose();

  PhysicalShapes ps;
  ps.det_jacobian = det;
  ps.volume = det / 6.0;
  ps.pts.resize(table.pts.size());
  for (size_t g = 0; g < table.pts.size(); ++g) {
    const auto& t = table.pts[g];
    auto& p = ps.pts[g];
    for (int n = 0; n < 10; ++n) p.du[n] = JinvT * t.p2_grad[n];
    for (int n = 0; n < 4; ++n) p.dalpha_v[n] = JinvT * t.p1_grad[n];
    p.dbubble = JinvT * t.bubble_grad;
  }
  return ps;
}

}  // namespace gdfem
