// Core domain model: meshes, atoms, element-local coordinates and the
// linear shape-function kit shared by every other header.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace arlequin {

using Vec3 = Eigen::Vector3d;  // z component is 0 for 2D models

enum class ElementKind { bar2, tri3, quad4, tet4, hex8 };
enum class InOut { in, out };

inline int node_count(ElementKind k) {
  switch (k) {
    case ElementKind::bar2: return 2;
    case ElementKind::tri3: return 3;
    case ElementKind::quad4: return 4;
    case ElementKind::tet4: return 4;
    case ElementKind::hex8: return 8;
  }
  return 0;
}

// Spatial dimension the element is meant to live in.
inline int kind_dimension(ElementKind k) {
  switch (k) {
    case ElementKind::bar2: return 1;
    case ElementKind::tri3:
    case ElementKind::quad4: return 2;
    case ElementKind::tet4:
    case ElementKind::hex8: return 3;
  }
  return 0;
}

// Number of independent iso-parametric coordinates (barycentric kinds
// carry one redundant component that sums to 1).
inline int iso_size(ElementKind k) {
  switch (k) {
    case ElementKind::bar2: return 1;
    case ElementKind::tri3: return 3;
    case ElementKind::quad4: return 2;
    case ElementKind::tet4: return 4;
    case ElementKind::hex8: return 3;
  }
  return 0;
}

inline const char* kind_name(ElementKind k) {
  switch (k) {
    case ElementKind::bar2: return "bar2";
    case ElementKind::tri3: return "tri3";
    case ElementKind::quad4: return "quad4";
    case ElementKind::tet4: return "tet4";
    case ElementKind::hex8: return "hex8";
  }
  return "?";
}

inline ElementKind parse_kind(const std::string& s) {
  if (s == "bar2") return ElementKind::bar2;
  if (s == "tri3") return ElementKind::tri3;
  if (s == "quad4") return ElementKind::quad4;
  if (s == "tet4") return ElementKind::tet4;
  if (s == "hex8") return ElementKind::hex8;
  throw std::invalid_argument("unknown element kind: " + s);
}

struct Node {
  int id = -1;
  Vec3 coords = Vec3::Zero();
};

struct Element {
  int id = -1;
  ElementKind kind = ElementKind::quad4;
  std::vector<int> connectivity;  // node ids, ordering is normative (see inverse_iso)
};

struct Mesh {
  int dimension = 2;
  std::vector<Node> nodes;
  std::vector<Element> elements;

  // id -> vector index maps, rebuilt after construction/loading
  std::unordered_map<int, int> node_index;
  std::unordered_map<int, int> element_index;

  void rebuild_index() {
    node_index.clear();
    element_index.clear();
    node_index.reserve(nodes.size());
    element_index.reserve(elements.size());
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
      node_index.emplace(nodes[i].id, i);
    for (int i = 0; i < static_cast<int>(elements.size()); ++i)
      element_index.emplace(elements[i].id, i);
  }

  const Node& node(int id) const {
    auto it = node_index.find(id);
    if (it == node_index.end())
      throw std::out_of_range("no node with id " + std::to_string(id));
    return nodes[it->second];
  }
  const Element& element(int id) const {
    auto it = element_index.find(id);
    if (it == element_index.end())
      throw std::out_of_range("no element with id " + std::to_string(id));
    return elements[it->second];
  }
};

struct NeighborPair {
  int i = -1, j = -1;   // atom indices, i < j
  Vec3 r = Vec3::Zero();  // equilibrium distance vector, x_j - x_i
};

struct AtomSet {
  int dimension = 2;
  std::vector<int> ids;
  std::vector<Vec3> positions;
  std::vector<double> masses;
  std::vector<NeighborPair> pairs;

  int size() const { return static_cast<int>(positions.size()); }
};

// Iso-parametric coordinates of a point within one element.
// Layout per kind: bar2 (xi); tri3 (xi, eta, gamma); quad4 (xi, eta);
// tet4 (xi, eta, gamma, zeta); hex8 (xi, eta, zeta).
struct IsoCoords {
  ElementKind kind = ElementKind::quad4;
  std::array<double, 4> v{0, 0, 0, 0};

  int size() const { return iso_size(kind); }
  double operator[](int i) const { return v[static_cast<size_t>(i)]; }
  double& operator[](int i) { return v[static_cast<size_t>(i)]; }
};

inline IsoCoords make_iso(ElementKind kind, std::initializer_list<double> vals) {
  IsoCoords iso;
  iso.kind = kind;
  int i = 0;
  for (double x : vals) iso.v[static_cast<size_t>(i++)] = x;
  return iso;
}

struct ElementLocation {
  int atom = -1;
  int element = -1;
  IsoCoords iso;
  InOut status = InOut::out;
};

// --- mesh validation --------------------------------------------------

inline std::vector<std::string> validate_mesh(const Mesh& mesh) {
  std::vector<std::string> diags;
  if (mesh.dimension != 2 && mesh.dimension != 3)
    diags.push_back("mesh dimension must be 2 or 3, got " + std::to_string(mesh.dimension));

  std::unordered_map<int, int> node_seen;
  for (const auto& n : mesh.nodes) {
    if (!n.coords.allFinite())
      diags.push_back("node " + std::to_string(n.id) + ": non-finite coordinates");
    if (++node_seen[n.id] == 2)
      diags.push_back("duplicate node id " + std::to_string(n.id));
  }
  std::unordered_map<int, int> elem_seen;
  for (const auto& e : mesh.elements) {
    if (++elem_seen[e.id] == 2)
      diags.push_back("duplicate element id " + std::to_string(e.id));
    const int want = node_count(e.kind);
    if (static_cast<int>(e.connectivity.size()) != want) {
      diags.push_back("element " + std::to_string(e.id) + ": connectivity length " +
                      std::to_string(e.connectivity.size()) + ", expected " +
                      std::to_string(want) + " for " + kind_name(e.kind));
      continue;
    }
    for (int nid : e.connectivity)
      if (!node_seen.count(nid))
        diags.push_back("element " + std::to_string(e.id) + ": references missing node " +
                        std::to_string(nid));
  }
  return diags;
}

// --- shape functions ---------------------------------------------------

// Corner sign patterns for the tensor-product kinds. The quad4 assignment
// (node 1 at (+1,+1), counter-clockwise through (-1,+1), (-1,-1), (+1,-1))
// is normative: the closed-form inverse mapping in inverse_iso.hpp is
// derived against exactly this ordering.
inline constexpr std::array<double, 4> kQuadXi{+1, -1, -1, +1};
inline constexpr std::array<double, 4> kQuadEta{+1, +1, -1, -1};

inline constexpr std::array<double, 8> kHexXi{-1, +1, +1, -1, -1, +1, +1, -1};
inline constexpr std::array<double, 8> kHexEta{-1, -1, +1, +1, -1, -1, +1, +1};
inline constexpr std::array<double, 8> kHexZeta{-1, -1, -1, -1, +1, +1, +1, +1};

struct ShapeValues {
  std::array<double, 8> n{};
  int count = 0;
};

inline ShapeValues shape_values(ElementKind kind, const IsoCoords& iso) {
  if (iso.kind != kind)
    throw std::invalid_argument("iso coordinates are for a different element kind");
  ShapeValues s;
  s.count = node_count(kind);
  switch (kind) {
    case ElementKind::bar2: {
      const double xi = iso[0];
      s.n[0] = 0.5 * (1 - xi);
      s.n[1] = 0.5 * (1 + xi);
      break;
    }
    case ElementKind::tri3:
      s.n[0] = iso[0];
      s.n[1] = iso[1];
      s.n[2] = iso[2];
      break;
    case ElementKind::quad4: {
      const double xi = iso[0], eta = iso[1];
      for (int i = 0; i < 4; ++i)
        s.n[static_cast<size_t>(i)] =
            0.25 * (1 + kQuadXi[static_cast<size_t>(i)] * xi) *
            (1 + kQuadEta[static_cast<size_t>(i)] * eta);
      break;
    }
    case ElementKind::tet4:
      for (int i = 0; i < 4; ++i) s.n[static_cast<size_t>(i)] = iso[i];
      break;
    case ElementKind::hex8: {
      const double xi = iso[0], eta = iso[1], zeta = iso[2];
      for (int i = 0; i < 8; ++i)
        s.n[static_cast<size_t>(i)] =
            0.125 * (1 + kHexXi[static_cast<size_t>(i)] * xi) *
            (1 + kHexEta[static_cast<size_t>(i)] * eta) *
            (1 + kHexZeta[static_cast<size_t>(i)] * zeta);
      break;
    }
  }
  return s;
}

// Iso coordinates of corner `i` (0-based), matching the sign tables above.
inline IsoCoords corner_iso(ElementKind kind, int i) {
  IsoCoords iso;
  iso.kind = kind;
  switch (kind) {
    case ElementKind::bar2:
      iso[0] = (i == 0) ? -1.0 : 1.0;
      break;
    case ElementKind::tri3:
      iso[0] = iso[1] = iso[2] = 0;
      iso[i] = 1;
      break;
    case ElementKind::quad4:
      iso[0] = kQuadXi[static_cast<size_t>(i)];
      iso[1] = kQuadEta[static_cast<size_t>(i)];
      break;
    case ElementKind::tet4:
      iso[0] = iso[1] = iso[2] = iso[3] = 0;
      iso[i] = 1;
      break;
    case ElementKind::hex8:
      iso[0] = kHexXi[static_cast<size_t>(i)];
      iso[1] = kHexEta[static_cast<size_t>(i)];
      iso[2] = kHexZeta[static_cast<size_t>(i)];
      break;
  }
  return iso;
}

// Forward iso-parametric map: world position of `iso` within the element
// whose corner coordinates are given in `corners` (node-order array).
template <typename CornerRange>
Vec3 forward_map(ElementKind kind, const CornerRange& corners, const IsoCoords& iso) {
  const ShapeValues s = shape_values(kind, iso);
  Vec3 x = Vec3::Zero();
  for (int i = 0; i < s.count; ++i) x += s.n[static_cast<size_t>(i)] * corners[static_cast<size_t>(i)];
  return x;
}

// Derivatives of the shape functions with respect to the independent
// parametric coordinates (1 for bar2, 2 for tri3/quad4, 3 for tet4/hex8).
// For the barycentric kinds the independent parameters are the first
// iso components; the last component is 1 minus their sum.
struct ShapeGradients {
  std::array<Eigen::Vector3d, 8> d{};
  int count = 0;
  int params = 0;
};

inline ShapeGradients shape_gradients(ElementKind kind, const IsoCoords& iso) {
  ShapeGradients g;
  g.count = node_count(kind);
  switch (kind) {
    case ElementKind::bar2:
      g.params = 1;
      g.d[0] = Vec3(-0.5, 0, 0);
      g.d[1] = Vec3(0.5, 0, 0);
      break;
    case ElementKind::tri3:
      g.params = 2;
      g.d[0] = Vec3(1, 0, 0);
      g.d[1] = Vec3(0, 1, 0);
      g.d[2] = Vec3(-1, -1, 0);
      break;
    case ElementKind::quad4: {
      g.params = 2;
      const double xi = iso[0], eta = iso[1];
      for (int i = 0; i < 4; ++i) {
        const double sx = kQuadXi[static_cast<size_t>(i)], se = kQuadEta[static_cast<size_t>(i)];
        g.d[static_cast<size_t>(i)] = Vec3(0.25 * sx * (1 + se * eta), 0.25 * se * (1 + sx * xi), 0);
      }
      break;
    }
    case ElementKind::tet4:
      g.params = 3;
      g.d[0] = Vec3(1, 0, 0);
      g.d[1] = Vec3(0, 1, 0);
      g.d[2] = Vec3(0, 0, 1);
      g.d[3] = Vec3(-1, -1, -1);
      break;
    case ElementKind::hex8: {
      g.params = 3;
      const double xi = iso[0], eta = iso[1], zeta = iso[2];
      for (int i = 0; i < 8; ++i) {
        const double sx = kHexXi[static_cast<size_t>(i)], se = kHexEta[static_cast<size_t>(i)],
                     sz = kHexZeta[static_cast<size_t>(i)];
        g.d[static_cast<size_t>(i)] =
            Vec3(0.125 * sx * (1 + se * eta) * (1 + sz * zeta),
                 0.125 * se * (1 + sx * xi) * (1 + sz * zeta),
                 0.125 * sz * (1 + sx * xi) * (1 + se * eta));
      }
      break;
    }
  }
  return g;
}

// --- quadrature --------------------------------------------------------

struct QuadraturePoint {
  IsoCoords iso;
  double weight = 0;
};

// Rules: 2-point Gauss per axis for bar2/quad4/hex8, centroid for tri3,
// 4-point for tet4. Exact for the linear/bilinear integrands assembled here.
inline std::vector<QuadraturePoint> quadrature_rule(ElementKind kind) {
  constexpr double g = 0.57735026918962576451;  // 1/sqrt(3)
  std::vector<QuadraturePoint> pts;
  switch (kind) {
    case ElementKind::bar2:
      pts.push_back({make_iso(kind, {-g}), 1.0});
      pts.push_back({make_iso(kind, {+g}), 1.0});
      break;
    case ElementKind::tri3:
      pts.push_back({make_iso(kind, {1.0 / 3, 1.0 / 3, 1.0 / 3}), 0.5});
      break;
    case ElementKind::quad4:
      for (double e : {-g, g})
        for (double x : {-g, g}) pts.push_back({make_iso(kind, {x, e}), 1.0});
      break;
    case ElementKind::tet4: {
      constexpr double a = 0.58541019662496845446;
      constexpr double b = 0.13819660112501051518;
      const double w = 1.0 / 24;
      pts.push_back({make_iso(kind, {a, b, b, b}), w});
      pts.push_back({make_iso(kind, {b, a, b, b}), w});
      pts.push_back({make_iso(kind, {b, b, a, b}), w});
      pts.push_back({make_iso(kind, {b, b, b, a}), w});
      break;
    }
    case ElementKind::hex8:
      for (double z : {-g, g})
        for (double e : {-g, g})
          for (double x : {-g, g}) pts.push_back({make_iso(kind, {x, e, z}), 1.0});
      break;
  }
  return pts;
}

// Geometric Jacobian dx/dparam at `iso` (dim x params) and its determinant.
struct ElementJacobian {
  Eigen::Matrix3d J = Eigen::Matrix3d::Identity();  // top-left dim x params block
  double det = 0;
};

inline ElementJacobian element_jacobian(const Mesh& mesh, const Element& e, const IsoCoords& iso) {
  const ShapeGradients g = shape_gradients(e.kind, iso);
  const int dim = kind_dimension(e.kind);
  ElementJacobian out;
  Eigen::Matrix3d J = Eigen::Matrix3d::Identity();
  for (int a = 0; a < dim; ++a)
    for (int p = 0; p < g.params; ++p) {
      double sum = 0;
      for (int i = 0; i < g.count; ++i)
        sum += mesh.node(e.connectivity[static_cast<size_t>(i)]).coords[a] *
               g.d[static_cast<size_t>(i)][p];
      J(a, p) = sum;
    }
  out.J = J;
  if (dim == g.params) {
    out.det = (dim == 1)   ? J(0, 0)
              : (dim == 2) ? J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0)
                           : J.topLeftCorner<3, 3>().determinant();
  } else {
    out.det = 0;  // embedded element, caller handles
  }
  return out;
}

// World-space position of `iso` within element `e`.
inline Vec3 element_point(const Mesh& mesh, const Element& e, const IsoCoords& iso) {
  const ShapeValues s = shape_values(e.kind, iso);
  Vec3 x = Vec3::Zero();
  for (int i = 0; i < s.count; ++i)
    x += s.n[static_cast<size_t>(i)] * mesh.node(e.connectivity[static_cast<size_t>(i)]).coords;
  return x;
}

inline void element_bbox(const Mesh& mesh, const Element& e, Vec3& lo, Vec3& hi) {
  lo = Vec3::Constant(std::numeric_limits<double>::max());
  hi = Vec3::Constant(std::numeric_limits<double>::lowest());
  for (int nid : e.connectivity) {
    const Vec3& x = mesh.node(nid).coords;
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
}

// --- configuration -----------------------------------------------------

enum class AlphaMethod { direct, temperature };
enum class CouplingMethod { wcm, bdm };
enum class ScalingVariant { arlequin_direct, arlequin_temperature, none, constant_half };

inline const char* to_string(AlphaMethod m) {
  return m == AlphaMethod::direct ? "direct" : "temperature";
}
inline const char* to_string(CouplingMethod m) { return m == CouplingMethod::wcm ? "wcm" : "bdm"; }
inline const char* to_string(ScalingVariant v) {
  switch (v) {
    case ScalingVariant::arlequin_direct: return "arlequin_direct";
    case ScalingVariant::arlequin_temperature: return "arlequin_temperature";
    case ScalingVariant::none: return "none";
    case ScalingVariant::constant_half: return "constant_half";
  }
  return "?";
}

struct Config {
  Vec3 cell_size = Vec3(1, 1, 1);
  std::vector<Vec3> anchors;
  AlphaMethod alpha_method = AlphaMethod::direct;
  CouplingMethod coupling_method = CouplingMethod::wcm;
  ScalingVariant variant = ScalingVariant::arlequin_direct;
  double dt = 0.04;
  int steps = 220;
  double ic_amplitude = 0.0;
  double ic_sigma = 1.0;
  Vec3 ic_center = Vec3::Zero();
  bool ic_center_set = false;  // default: centroid of the atom set
  double alpha_min = 1e-3;
  double solver_tol = 1e-12;
  double density = -1.0;  // <0: derived as atom mass / Wigner-Seitz volume
  std::vector<int> snapshot_steps{120, 220};
  bool verify_localization = false;
  // pair potential parameters
  double epsilon = 1.0;
  double exponent_n = 6.0;
  double exponent_m = 12.0;
  double r0 = 1.2405;
};

inline std::vector<std::string> validate_config(const Config& c) {
  std::vector<std::string> diags;
  if (!(c.dt > 0)) diags.push_back("dt must be positive");
  if (c.steps < 0) diags.push_back("steps must be non-negative");
  if (!(c.alpha_min >= 0 && c.alpha_min < 0.5))
    diags.push_back("alpha_min must lie in [0, 0.5)");
  if (!(c.cell_size.array() > 0).all()) diags.push_back("cell_size components must be positive");
  if (!(c.exponent_m > c.exponent_n && c.exponent_n > 0))
    diags.push_back("potential exponents must satisfy m > n > 0");
  if (!(c.r0 > 0)) diags.push_back("r0 must be positive");
  return diags;
}

}  // namespace arlequin
