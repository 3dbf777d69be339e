// Closed-form inverse iso-parametric mappings and in/out classification
// for bar2, tri3, quad4, tet4 and hex8 elements.
//
// quad4 uses the eight-case closed form (coefficients a/b/c/d built from
// the corners, case selected by their zero pattern); hex8 uses the
// third-order inversion series for the trilinear map followed by a Newton
// polish on the exact forward map. Both formulations are validated by
// forward-map round-trip tests; a few coefficients differ from their
// commonly printed versions because the round trip fails otherwise.
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "arlequin/core.hpp"

namespace arlequin {

// In/out tolerance band: points up to this far outside the reference
// domain still classify as inside, so atoms sitting on element faces are
// never lost to roundoff.
inline constexpr double kInOutBand = 1e-9;

// Scale-relative singularity threshold for denominators/determinants.
inline constexpr double kDegenerateRel = 1e-14;

struct DegenerateElementError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two admissible roots in a quadratic branch (non-convex quad).
struct AmbiguousInverseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InverseResult {
  IsoCoords iso;
  InOut status = InOut::out;
  int branch = 0;       // quad4: selected case 1..8, otherwise 0
  int iterations = 0;   // hex8: Newton polish iterations
  bool converged = true;
};

inline InOut in_out_status(const IsoCoords& iso) {
  const double lo = (iso.kind == ElementKind::tri3 || iso.kind == ElementKind::tet4)
                        ? -kInOutBand
                        : -1.0 - kInOutBand;
  const double hi = 1.0 + kInOutBand;
  for (int i = 0; i < iso.size(); ++i)
    if (iso[i] < lo || iso[i] > hi) return InOut::out;
  return InOut::in;
}

// --- bar2 ---------------------------------------------------------------

inline InverseResult inverse_map_bar2(double x1, double x2, double x) {
  const double len = x2 - x1;
  if (std::abs(len) <= kDegenerateRel * std::max(std::abs(x1), std::abs(x2)))
    throw DegenerateElementError("bar2: coincident end points");
  InverseResult r;
  r.iso.kind = ElementKind::bar2;
  // signed length in the denominator so the forward interpolation
  // round-trips for either node ordering
  r.iso[0] = (2 * x - (x1 + x2)) / len;
  r.status = in_out_status(r.iso);
  return r;
}

// --- tri3 ---------------------------------------------------------------

inline InverseResult inverse_map_tri3(const std::array<Vec3, 3>& n, const Vec3& p) {
  const double x1 = n[0].x(), y1 = n[0].y();
  const double x2 = n[1].x(), y2 = n[1].y();
  const double x3 = n[2].x(), y3 = n[2].y();
  const double den = (y2 - y3) * (x1 - x3) - (y3 - y1) * (x3 - x2);
  double scale = 0;
  for (const auto& v : n) scale = std::max(scale, (v - n[0]).norm());
  if (std::abs(den) <= kDegenerateRel * scale * scale)
    throw DegenerateElementError("tri3: zero area");
  InverseResult r;
  r.iso.kind = ElementKind::tri3;
  r.iso[0] = ((p.x() - x3) * (y2 - y3) + (p.y() - y3) * (x3 - x2)) / den;
  r.iso[1] = ((p.x() - x3) * (y3 - y1) + (p.y() - y3) * (x1 - x3)) / den;
  r.iso[2] = 1.0 - (r.iso[0] + r.iso[1]);
  r.status = in_out_status(r.iso);
  return r;
}

// --- quad4 --------------------------------------------------------------

// Element-level coefficients of the bilinear system
//   d1 = b1*xi + c1*eta + a1*xi*eta
//   d2 = b2*xi + c2*eta + a2*xi*eta
// where d depends on the query point and a/b/c only on the corners.
struct QuadInverseCoefficients {
  double a1, a2, b1, b2, c1, c2;
  double sx, sy;      // corner coordinate sums, for the d terms
  double scale;       // element extent, for degeneracy thresholds
};

inline QuadInverseCoefficients quad_coefficients(const std::array<Vec3, 4>& n) {
  QuadInverseCoefficients q{};
  const double X1 = n[0].x(), X2 = n[1].x(), X3 = n[2].x(), X4 = n[3].x();
  const double Y1 = n[0].y(), Y2 = n[1].y(), Y3 = n[2].y(), Y4 = n[3].y();
  q.a1 = X1 - X2 + X3 - X4;
  q.a2 = Y1 - Y2 + Y3 - Y4;
  q.b1 = X1 - X2 - X3 + X4;
  q.b2 = Y1 - Y2 - Y3 + Y4;
  q.c1 = X1 + X2 - X3 - X4;
  q.c2 = Y1 + Y2 - Y3 - Y4;
  q.sx = X1 + X2 + X3 + X4;
  q.sy = Y1 + Y2 + Y3 + Y4;
  q.scale = 0;
  for (const auto& v : n) q.scale = std::max(q.scale, (v - n[0]).norm());
  return q;
}

namespace detail {

// Roots of A*x^2 + B*x + C = 0, degrading to the linear solution when A
// vanishes relative to the other coefficients.
inline int solve_quadratic(double A, double B, double C, double& r0, double& r1) {
  const double mag = std::max({std::abs(B), std::abs(C)});
  if (std::abs(A) <= kDegenerateRel * mag) {
    if (std::abs(B) <= kDegenerateRel * std::abs(C)) return 0;
    r0 = -C / B;
    return 1;
  }
  const double disc = B * B - 4 * A * C;
  if (disc < 0) return 0;
  const double sq = std::sqrt(disc);
  const double qq = -0.5 * (B + (B >= 0 ? sq : -sq));
  r0 = qq / A;
  r1 = (std::abs(qq) > 0) ? C / qq : r0;
  return 2;
}

// eta recovered from whichever of the two original bilinear equations has
// the better-conditioned denominator at this xi.
inline std::optional<double> eta_from_equations(const QuadInverseCoefficients& q, double d1,
                                                double d2, double xi) {
  const double den1 = q.c1 + q.a1 * xi;
  const double den2 = q.c2 + q.a2 * xi;
  const double tol = kDegenerateRel * q.scale;
  if (std::abs(den1) >= std::abs(den2)) {
    if (std::abs(den1) <= tol) return std::nullopt;
    return (d1 - q.b1 * xi) / den1;
  }
  if (std::abs(den2) <= tol) return std::nullopt;
  return (d2 - q.b2 * xi) / den2;
}

}  // namespace detail

inline InverseResult inverse_map_quad4(const QuadInverseCoefficients& q, const Vec3& p) {
  const double d1 = 4 * p.x() - q.sx;
  const double d2 = 4 * p.y() - q.sy;
  const double tolL = kDegenerateRel * q.scale;          // length-like terms
  const double tolL2 = kDegenerateRel * q.scale * q.scale;  // products

  InverseResult r;
  r.iso.kind = ElementKind::quad4;

  const bool a1z = std::abs(q.a1) <= tolL;
  const bool a2z = std::abs(q.a2) <= tolL;

  auto finish_linear = [&](double xi, std::optional<double> eta, int branch) {
    r.branch = branch;
    r.iso[0] = xi;
    if (!eta) {  // query outside the image of the map
      r.iso[1] = 2.0;
      r.status = InOut::out;
      return r;
    }
    r.iso[1] = *eta;
    r.status = in_out_status(r.iso);
    return r;
  };

  // Quadratic branches: pick the real root whose (xi, eta) lands in the
  // reference square; no admissible root means the point is outside.
  auto finish_quadratic = [&](double A, double B, double C, int branch) {
    r.branch = branch;
    double x0 = 0, x1 = 0;
    const int nroots = detail::solve_quadratic(A, B, C, x0, x1);
    if (nroots == 0) {
      r.iso[0] = 2.0;
      r.iso[1] = 2.0;
      r.status = InOut::out;
      return r;
    }
    struct Cand {
      double xi, eta;
      bool inside;
    };
    std::array<Cand, 2> cand{};
    int ncand = 0;
    for (int k = 0; k < nroots; ++k) {
      const double xi = (k == 0) ? x0 : x1;
      const auto eta = detail::eta_from_equations(q, d1, d2, xi);
      if (!eta) continue;
      IsoCoords probe = make_iso(ElementKind::quad4, {xi, *eta});
      cand[static_cast<size_t>(ncand++)] = {xi, *eta, in_out_status(probe) == InOut::in};
    }
    if (ncand == 0) {
      r.iso[0] = 2.0;
      r.iso[1] = 2.0;
      r.status = InOut::out;
      return r;
    }
    int n_inside = 0;
    for (int k = 0; k < ncand; ++k) n_inside += cand[static_cast<size_t>(k)].inside ? 1 : 0;
    if (n_inside == 2 &&
        (std::abs(cand[0].xi - cand[1].xi) > 1e-12 || std::abs(cand[0].eta - cand[1].eta) > 1e-12))
      throw AmbiguousInverseError("quad4: two admissible inverse images (non-convex element?)");
    // prefer the inside root; otherwise the one closest to the reference box
    int best = 0;
    double best_score = std::numeric_limits<double>::max();
    for (int k = 0; k < ncand; ++k) {
      const auto& c = cand[static_cast<size_t>(k)];
      const double score = c.inside ? -1.0 : std::max(std::abs(c.xi), std::abs(c.eta));
      if (score < best_score) {
        best_score = score;
        best = k;
      }
    }
    r.iso[0] = cand[static_cast<size_t>(best)].xi;
    r.iso[1] = cand[static_cast<size_t>(best)].eta;
    r.status = cand[static_cast<size_t>(best)].inside ? InOut::in : InOut::out;
    return r;
  };

  if (a1z && a2z) {
    // case 1: both bilinear terms vanish (parallelogram)
    const double den = q.b1 * q.c2 - q.b2 * q.c1;
    if (std::abs(den) <= tolL2) throw DegenerateElementError("quad4: degenerate parallelogram");
    return finish_linear((d1 * q.c2 - d2 * q.c1) / den,
                         (q.b1 * d2 - q.b2 * d1) / den, 1);
  }
  if (a1z) {
    if (std::abs(q.c1) <= tolL) {
      // case 2
      if (std::abs(q.b1) <= tolL) throw DegenerateElementError("quad4: collapsed x coefficients");
      const double xi = d1 / q.b1;
      const double den = q.a2 * d1 + q.b1 * q.c2;
      if (std::abs(den) <= kDegenerateRel * (std::abs(q.a2 * d1) + std::abs(q.b1 * q.c2)))
        return finish_linear(xi, detail::eta_from_equations(q, d1, d2, xi), 2);
      return finish_linear(xi, (q.b1 * d2 - q.b2 * d1) / den, 2);
    }
    // case 3
    return finish_quadratic(q.a2 * q.b1, q.c2 * q.b1 - q.a2 * d1 - q.b2 * q.c1,
                            d2 * q.c1 - q.c2 * d1, 3);
  }
  if (a2z) {
    if (std::abs(q.b2) <= tolL) {
      // case 4
      if (std::abs(q.c2) <= tolL) throw DegenerateElementError("quad4: collapsed y coefficients");
      const double eta = d2 / q.c2;
      // denominator b1*c2 + a1*d2 = c2*(b1 + a1*eta); the pure-corner form
      // printed elsewhere drops the a1 term and fails the round trip
      const double den = q.b1 * q.c2 + q.a1 * d2;
      if (std::abs(den) <= kDegenerateRel * (std::abs(q.b1 * q.c2) + std::abs(q.a1 * d2))) {
        r.branch = 4;
        r.iso[0] = 2.0;
        r.iso[1] = eta;
        r.status = InOut::out;
        return r;
      }
      r.branch = 4;
      r.iso[0] = (d1 * q.c2 - q.c1 * d2) / den;
      r.iso[1] = eta;
      r.status = in_out_status(r.iso);
      return r;
    }
    // case 5
    return finish_quadratic(q.a1 * q.b2, q.c1 * q.b2 - q.a1 * d2 - q.b1 * q.c2,
                            d1 * q.c2 - q.c1 * d2, 5);
  }

  const double ab = q.a2 * q.b1 - q.a1 * q.b2;
  const double ac = q.a2 * q.c1 - q.a1 * q.c2;
  const double ad = q.a2 * d1 - q.a1 * d2;
  if (std::abs(ab) <= tolL2) {
    // case 6
    if (std::abs(ac) <= tolL2)
      throw DegenerateElementError("quad4: rank-deficient bilinear system");
    const double eta = ad / ac;
    // xi from the d2 equation written with the combined constants
    const double den = q.b2 * ac + q.a2 * ad;
    if (std::abs(den) <= kDegenerateRel * (std::abs(q.b2 * ac) + std::abs(q.a2 * ad)))
      return finish_linear(0, detail::eta_from_equations(q, d1, d2, 0) ? std::optional<double>(eta)
                                                                       : std::nullopt,
                           6);
    return finish_linear((d2 * ac - q.c2 * ad) / den, eta, 6);
  }
  if (std::abs(ac) <= tolL2) {
    // case 7
    const double xi = ad / ab;
    const double den = q.c2 * ab + q.a2 * ad;
    if (std::abs(den) <= kDegenerateRel * (std::abs(q.c2 * ab) + std::abs(q.a2 * ad)))
      return finish_linear(xi, detail::eta_from_equations(q, d1, d2, xi), 7);
    return finish_linear(xi, (d2 * ab - q.b2 * ad) / den, 7);
  }
  // case 8
  {
    r = finish_quadratic(q.a2 * ab, q.c2 * ab - q.a2 * ad - q.b2 * ac, d2 * ac - q.c2 * ad, 8);
    // eta via the combined-constant relation when the equation fallback
    // was used keeps the closed-form branch exact
    if (r.status != InOut::out || std::abs(r.iso[0]) <= 1.5) {
      const double eta = (ad - ab * r.iso[0]) / ac;
      if (std::isfinite(eta)) {
        r.iso[1] = eta;
        if (r.status != InOut::out) r.status = in_out_status(r.iso);
      }
    }
    return r;
  }
}

inline InverseResult inverse_map_quad4(const std::array<Vec3, 4>& n, const Vec3& p) {
  return inverse_map_quad4(quad_coefficients(n), p);
}

// --- tet4 ---------------------------------------------------------------

namespace detail {

inline double det4(const std::array<std::array<double, 4>, 4>& m) {
  // expansion along the last column of ones via 3x3 minors
  auto det3 = [](double a, double b, double c, double d, double e, double f, double g, double h,
                 double i) { return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g); };
  double sum = 0;
  for (int row = 0; row < 4; ++row) {
    std::array<int, 3> rows{};
    int k = 0;
    for (int rr = 0; rr < 4; ++rr)
      if (rr != row) rows[static_cast<size_t>(k++)] = rr;
    const auto& r0 = m[static_cast<size_t>(rows[0])];
    const auto& r1 = m[static_cast<size_t>(rows[1])];
    const auto& r2 = m[static_cast<size_t>(rows[2])];
    const double minor =
        det3(r0[0], r0[1], r0[2], r1[0], r1[1], r1[2], r2[0], r2[1], r2[2]);
    const double sign = ((row + 3) % 2 == 0) ? 1.0 : -1.0;  // cofactor of column 3
    sum += sign * m[static_cast<size_t>(row)][3] * minor;
  }
  return sum;
}

}  // namespace detail

inline InverseResult inverse_map_tet4(const std::array<Vec3, 4>& n, const Vec3& p) {
  auto row = [](const Vec3& v) {
    return std::array<double, 4>{v.x(), v.y(), v.z(), 1.0};
  };
  std::array<std::array<double, 4>, 4> A{row(n[0]), row(n[1]), row(n[2]), row(n[3])};
  const double detA = detail::det4(A);
  double scale = 0;
  for (const auto& v : n) scale = std::max(scale, (v - n[0]).norm());
  if (std::abs(detA) <= kDegenerateRel * scale * scale * scale)
    throw DegenerateElementError("tet4: coplanar nodes");

  InverseResult r;
  r.iso.kind = ElementKind::tet4;
  double sum = 0;
  for (int i = 0; i < 3; ++i) {
    auto Ai = A;
    Ai[static_cast<size_t>(i)] = row(p);
    r.iso[i] = detail::det4(Ai) / detA;
    sum += r.iso[i];
  }
  r.iso[3] = 1.0 - sum;
  r.status = in_out_status(r.iso);
  return r;
}

// --- hex8 ---------------------------------------------------------------

// Precomputed inversion tables for one hexahedron. The trilinear forward
// map in centered form is
//   x' = e1*xi + e2*eta + e3*zeta + e4*eta*zeta + e5*xi*zeta + e6*xi*eta
//        + e7*xi*eta*zeta
// and the third-order inverse series is expressed through the scaled
// triple products P_ijk = e_i.(e_j x e_k) / e_123.
struct HexInverseTables {
  Vec3 center = Vec3::Zero();
  std::array<Vec3, 7> e{};
  double e123 = 0;
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d Jinv = Eigen::Matrix3d::Zero();
  double scale = 0;
  // series coefficients: quadratic q[a][b] for the product of the two
  // bar-xi components other than... stored as the symmetric tensors below
  double G1[3][3][3] = {};
  double G2[3][3][3][3] = {};
};

inline HexInverseTables hex_tables(const std::array<Vec3, 8>& n) {
  HexInverseTables t;
  for (const auto& v : n) t.center += v;
  t.center /= 8.0;
  for (const auto& v : n) t.scale = std::max(t.scale, (v - t.center).norm());

  for (int i = 0; i < 8; ++i) {
    const double sx = kHexXi[static_cast<size_t>(i)];
    const double se = kHexEta[static_cast<size_t>(i)];
    const double sz = kHexZeta[static_cast<size_t>(i)];
    const std::array<double, 7> w{sx, se, sz, se * sz, sx * sz, sx * se, sx * se * sz};
    for (int k = 0; k < 7; ++k) t.e[static_cast<size_t>(k)] += 0.125 * w[static_cast<size_t>(k)] * n[static_cast<size_t>(i)];
  }
  t.e123 = t.e[0].dot(t.e[1].cross(t.e[2]));
  if (std::abs(t.e123) <= kDegenerateRel * t.scale * t.scale * t.scale)
    throw DegenerateElementError("hex8: singular Jacobian at center");
  t.J.col(0) = t.e[0];
  t.J.col(1) = t.e[1];
  t.J.col(2) = t.e[2];
  t.Jinv = t.J.inverse();

  auto P = [&](int i, int j, int k) {
    return t.e[static_cast<size_t>(i - 1)].dot(
               t.e[static_cast<size_t>(j - 1)].cross(t.e[static_cast<size_t>(k - 1)])) /
           t.e123;
  };

  const double P423 = P(4, 2, 3), P523 = P(5, 2, 3), P623 = P(6, 2, 3), P723 = P(7, 2, 3);
  const double P143 = P(1, 4, 3), P153 = P(1, 5, 3), P163 = P(1, 6, 3), P173 = P(1, 7, 3);
  const double P124 = P(1, 2, 4), P125 = P(1, 2, 5), P126 = P(1, 2, 6), P127 = P(1, 2, 7);

  // quadratic tensor, symmetric in the trailing pair
  auto setG1 = [&](int a, int i, int j, double v) {
    t.G1[a][i][j] = v;
    t.G1[a][j][i] = v;
  };
  setG1(0, 0, 1, P623);
  setG1(0, 0, 2, P523);
  setG1(0, 1, 2, P423);
  setG1(1, 0, 1, P163);
  setG1(1, 0, 2, P153);
  setG1(1, 1, 2, P143);
  setG1(2, 0, 1, P126);
  setG1(2, 0, 2, P125);
  setG1(2, 1, 2, P124);  // row pattern P_12k; a transposed variant breaks the round trip

  // cubic tensor, symmetric over the trailing triple
  auto setG2 = [&](int a, int i, int j, int k, double v) {
    const int idx[3] = {i, j, k};
    int perm[3];
    for (int p0 = 0; p0 < 3; ++p0)
      for (int p1 = 0; p1 < 3; ++p1)
        for (int p2 = 0; p2 < 3; ++p2) {
          if (p0 == p1 || p1 == p2 || p0 == p2) continue;
          perm[0] = idx[p0];
          perm[1] = idx[p1];
          perm[2] = idx[p2];
          t.G2[a][perm[0]][perm[1]][perm[2]] = v;
        }
  };

  setG2(0, 0, 1, 2,
        P723 - (2 * P623 * P523 + P623 * P143 + P423 * P163 + P523 * P124 + P423 * P125));
  setG2(1, 0, 1, 2,
        P173 - (P163 * P523 + P153 * P623 + 2 * P163 * P143 + P153 * P124 + P143 * P125));
  setG2(2, 0, 1, 2,
        P127 - (P126 * P523 + P125 * P623 + P126 * P143 + P124 * P163 + 2 * P125 * P124));

  setG2(0, 0, 0, 1, -2 * (P623 * P163 + P523 * P126));
  setG2(0, 0, 0, 2, -2 * (P623 * P153 + P523 * P125));
  setG2(0, 1, 1, 0, -2 * (P623 * P623 + P423 * P126));
  setG2(0, 1, 1, 2, -2 * (P623 * P423 + P423 * P124));
  setG2(0, 2, 2, 0, -2 * (P523 * P523 + P423 * P153));
  setG2(0, 2, 2, 1, -2 * (P523 * P423 + P423 * P143));

  setG2(1, 0, 0, 1, -2 * (P163 * P163 + P153 * P126));
  setG2(1, 0, 0, 2, -2 * (P163 * P153 + P153 * P125));
  setG2(1, 1, 1, 0, -2 * (P163 * P623 + P143 * P126));
  setG2(1, 1, 1, 2, -2 * (P163 * P423 + P143 * P124));  // P143*P124, not P143^2
  setG2(1, 2, 2, 0, -2 * (P153 * P523 + P143 * P153));
  setG2(1, 2, 2, 1, -2 * (P153 * P423 + P143 * P143));

  setG2(2, 0, 0, 1, -2 * (P125 * P126 + P126 * P163));
  setG2(2, 0, 0, 2, -2 * (P153 * P126 + P125 * P125));
  setG2(2, 1, 1, 0, -2 * (P124 * P126 + P126 * P623));
  setG2(2, 1, 1, 2, -2 * (P423 * P126 + P124 * P124));
  setG2(2, 2, 2, 0, -2 * (P523 * P125 + P124 * P153));
  setG2(2, 2, 2, 1, -2 * (P423 * P125 + P124 * P143));
  return t;
}

// Forward trilinear map in centered form.
inline Vec3 hex_forward(const HexInverseTables& t, double xi, double eta, double zeta) {
  return t.center + t.e[0] * xi + t.e[1] * eta + t.e[2] * zeta + t.e[3] * (eta * zeta) +
         t.e[4] * (xi * zeta) + t.e[5] * (xi * eta) + t.e[6] * (xi * eta * zeta);
}

inline Eigen::Matrix3d hex_forward_jacobian(const HexInverseTables& t, double xi, double eta,
                                            double zeta) {
  Eigen::Matrix3d J;
  J.col(0) = t.e[0] + t.e[4] * zeta + t.e[5] * eta + t.e[6] * (eta * zeta);
  J.col(1) = t.e[1] + t.e[3] * zeta + t.e[5] * xi + t.e[6] * (xi * zeta);
  J.col(2) = t.e[2] + t.e[3] * eta + t.e[4] * xi + t.e[6] * (xi * eta);
  return J;
}

// Truncated third-order inversion series only (no polish). Exact for
// parallelepipeds, approximate for distorted hexes.
inline InverseResult inverse_map_hex8_series(const HexInverseTables& t, const Vec3& p) {
  const Eigen::Vector3d xb = t.Jinv * (p - t.center);
  InverseResult r;
  r.iso.kind = ElementKind::hex8;
  for (int a = 0; a < 3; ++a) {
    double quad = 0, cubic = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        quad += t.G1[a][i][j] * xb[i] * xb[j];
        for (int k = 0; k < 3; ++k) cubic += t.G2[a][i][j][k] * xb[i] * xb[j] * xb[k];
      }
    r.iso[a] = xb[a] - 0.5 * quad - cubic / 6.0;
  }
  r.status = in_out_status(r.iso);
  return r;
}

inline InverseResult inverse_map_hex8_series(const std::array<Vec3, 8>& n, const Vec3& p) {
  return inverse_map_hex8_series(hex_tables(n), p);
}

// Series seed plus Newton polish on the exact trilinear map. In/out
// decisions near faces need better than the series' truncation error.
inline InverseResult inverse_map_hex8(const HexInverseTables& t, const Vec3& p,
                                      int max_iter = 20, double tol_rel = 1e-12) {
  InverseResult r = inverse_map_hex8_series(t, p);
  const double tol = tol_rel * std::max(t.scale, 1e-300);
  double xi = r.iso[0], eta = r.iso[1], zeta = r.iso[2];
  r.converged = false;
  for (int it = 0; it < max_iter; ++it) {
    const Vec3 res = hex_forward(t, xi, eta, zeta) - p;
    if (res.norm() <= tol) {
      r.converged = true;
      break;
    }
    const Eigen::Matrix3d J = hex_forward_jacobian(t, xi, eta, zeta);
    const Eigen::Vector3d step = J.partialPivLu().solve(res);
    if (!step.allFinite()) break;
    xi -= step[0];
    eta -= step[1];
    zeta -= step[2];
    r.iterations = it + 1;
  }
  if (!r.converged) {
    const Vec3 res = hex_forward(t, xi, eta, zeta) - p;
    r.converged = res.norm() <= tol;
  }
  r.iso[0] = xi;
  r.iso[1] = eta;
  r.iso[2] = zeta;
  r.status = in_out_status(r.iso);
  return r;
}

inline InverseResult inverse_map_hex8(const std::array<Vec3, 8>& n, const Vec3& p) {
  return inverse_map_hex8(hex_tables(n), p);
}

// --- generic element-level entry points ---------------------------------

// Reusable inverter: builds the per-element tables once, then answers
// point queries. locate_atoms constructs one per candidate element.
class ElementInverter {
 public:
  ElementInverter(const Mesh& mesh, const Element& e) : kind_(e.kind) {
    const int nc = node_count(e.kind);
    if (static_cast<int>(e.connectivity.size()) != nc)
      throw std::invalid_argument("element " + std::to_string(e.id) +
                                  ": bad connectivity length");
    for (int i = 0; i < nc; ++i)
      corners_[static_cast<size_t>(i)] = mesh.node(e.connectivity[static_cast<size_t>(i)]).coords;
    switch (kind_) {
      case ElementKind::quad4:
        quad_ = quad_coefficients({corners_[0], corners_[1], corners_[2], corners_[3]});
        break;
      case ElementKind::hex8:
        hex_ = hex_tables(corners_);
        break;
      default:
        break;
    }
  }

  InverseResult invert(const Vec3& p) const {
    switch (kind_) {
      case ElementKind::bar2:
        return inverse_map_bar2(corners_[0].x(), corners_[1].x(), p.x());
      case ElementKind::tri3:
        return inverse_map_tri3({corners_[0], corners_[1], corners_[2]}, p);
      case ElementKind::quad4:
        return inverse_map_quad4(quad_, p);
      case ElementKind::tet4:
        return inverse_map_tet4({corners_[0], corners_[1], corners_[2], corners_[3]}, p);
      case ElementKind::hex8:
        return inverse_map_hex8(hex_, p);
    }
    throw std::logic_error("unreachable");
  }

  ElementKind kind() const { return kind_; }

 private:
  ElementKind kind_;
  std::array<Vec3, 8> corners_{};
  QuadInverseCoefficients quad_{};
  HexInverseTables hex_{};
};

inline InverseResult inverse_map(const Mesh& mesh, const Element& e, const Vec3& p) {
  return ElementInverter(mesh, e).invert(p);
}

}  // namespace arlequin
