// SPDX-License-Identifier: Apache-2.0
#include "hexhp/masterel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hexhp/error.hpp"

namespace hexhp {

const char* space_name(Space s) {
  switch (s) {
    case Space::H1: return "contin";
    case Space::HCurl: return "tangen";
    case Space::HDiv: return "normal";
    case Space::L2: return "discon";
  }
  return "?";
}

int OrderTriple::max() const { return std::max({px, py, pz}); }
int OrderTriple::min() const { return std::min({px, py, pz}); }

namespace {

constexpr std::array<std::array<double, 3>, 8> kVertex = {{{0, 0, 0},
                                                            {1, 0, 0},
                                                            {1, 1, 0},
                                                            {0, 1, 0},
                                                            {0, 0, 1},
                                                            {1, 0, 1},
                                                            {1, 1, 1},
                                                            {0, 1, 1}}};
constexpr std::array<std::array<int, 2>, 12> kEdgeVerts = {{{0, 1},
                                                            {1, 2},
                                                            {3, 2},
                                                            {0, 3},
                                                            {4, 5},
                                                            {5, 6},
                                                            {7, 6},
                                                            {4, 7},
                                                            {0, 4},
                                                            {1, 5},
                                                            {2, 6},
                                                            {3, 7}}};
constexpr std::array<int, 6> kFaceNormal = {2, 2, 1, 0, 1, 0};
constexpr std::array<int, 6> kFaceSide = {0, 1, 0, 1, 1, 0};

struct Tables {
  std::array<std::array<int, 3>, 27> code;
  std::array<int, 27> from_code;
  std::array<std::array<int, 4>, 6> fverts;
  std::array<std::array<int, 4>, 6> fedges;
  std::array<int, 6> fsign;

  Tables() {
    for (int v = 0; v < 8; ++v)
      for (int d = 0; d < 3; ++d) code[v][d] = 2 * static_cast<int>(kVertex[v][d]);
    for (int e = 0; e < 12; ++e)
      for (int d = 0; d < 3; ++d)
        code[8 + e][d] = (code[kEdgeVerts[e][0]][d] + code[kEdgeVerts[e][1]][d]) / 2;
    for (int f = 0; f < 6; ++f)
      for (int d = 0; d < 3; ++d) code[20 + f][d] = d == kFaceNormal[f] ? 2 * kFaceSide[f] : 1;
    code[26] = {1, 1, 1};
    from_code.fill(-1);
    for (int i = 0; i < 27; ++i) from_code[code[i][0] * 9 + code[i][1] * 3 + code[i][2]] = i;

    for (int f = 0; f < 6; ++f) {
      auto ax = axes(f);
      auto at = [&](int ca, int cb) {
        std::array<int, 3> c{};
        c[kFaceNormal[f]] = 2 * kFaceSide[f];
        c[ax[0]] = ca;
        c[ax[1]] = cb;
        return from_code[c[0] * 9 + c[1] * 3 + c[2]];
      };
      fverts[f] = {at(0, 0), at(2, 0), at(2, 2), at(0, 2)};
      fedges[f] = {at(1, 0) - 8, at(2, 1) - 8, at(1, 2) - 8, at(0, 1) - 8};
      Vec3 ta = Vec3::Unit(ax[0]), tb = Vec3::Unit(ax[1]);
      double c = ta.cross(tb)[kFaceNormal[f]];
      fsign[f] = (kFaceSide[f] == 1 ? 1 : -1) * (c > 0 ? 1 : -1);
    }
  }
  static std::array<int, 2> axes(int f) {
    switch (kFaceNormal[f]) {
      case 0: return {1, 2};
      case 1: return {0, 2};
      default: return {0, 1};
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

void check_entity(int ent) {
  if (ent < 0 || ent >= kNumEntities) fail(ErrorCode::Contract, "entity index out of range");
}

}  // namespace

EntityKind entity_kind(int ent) {
  check_entity(ent);
  if (ent < 8) return EntityKind::Vertex;
  if (ent < 20) return EntityKind::Edge;
  if (ent < 26) return EntityKind::Face;
  return EntityKind::Middle;
}

const std::array<int, 3>& entity_code(int ent) {
  check_entity(ent);
  return tables().code[ent];
}

int entity_from_code(int a, int b, int c) { return tables().from_code[a * 9 + b * 3 + c]; }

const std::array<double, 3>& vertex_coords(int v) { return kVertex.at(v); }

std::array<int, 2> edge_vertices(int e) { return kEdgeVerts.at(e); }

int edge_axis(int e) {
  const auto& c = tables().code.at(8 + e);
  for (int d = 0; d < 3; ++d)
    if (c[d] == 1) return d;
  return -1;
}

int face_normal_axis(int f) { return kFaceNormal.at(f); }
int face_side(int f) { return kFaceSide.at(f); }
std::array<int, 2> face_axes(int f) {
  if (f < 0 || f > 5) fail(ErrorCode::Contract, "face index out of range");
  return Tables::axes(f);
}
std::array<int, 4> face_vertices(int f) { return tables().fverts.at(f); }
std::array<int, 4> face_edges(int f) { return tables().fedges.at(f); }
int face_normal_sign(int f) { return tables().fsign.at(f); }

std::vector<int> entity_closure(int ent) {
  const auto& c = entity_code(ent);
  std::vector<int> out;
  for (int i = 0; i < kNumEntities; ++i) {
    const auto& ci = tables().code[i];
    bool in = true;
    for (int d = 0; d < 3; ++d)
      if (c[d] != 1 && ci[d] != c[d]) in = false;
    if (in) out.push_back(i);
  }
  return out;
}

int entity_order(const ElementOrder& o, int ent, int d) {
  switch (entity_kind(ent)) {
    case EntityKind::Vertex: return 1;
    case EntityKind::Edge: return o.edge[ent - 8];
    case EntityKind::Face: {
      int f = ent - 20;
      auto ax = Tables::axes(f);
      if (d == ax[0]) return o.face[f][0];
      if (d == ax[1]) return o.face[f][1];
      return 1;
    }
    case EntityKind::Middle: return o.middle[d];
  }
  return 1;
}

ElementOrder ElementOrder::uniform(OrderTriple p) {
  ElementOrder o;
  for (int e = 0; e < 12; ++e) o.edge[e] = p[edge_axis(e)];
  for (int f = 0; f < 6; ++f) {
    auto ax = Tables::axes(f);
    o.face[f] = {p[ax[0]], p[ax[1]]};
  }
  o.middle = p;
  return o;
}

std::array<int, 19> ElementOrder::encode() const {
  std::array<int, 19> n{};
  for (int e = 0; e < 12; ++e) n[e] = edge[e];
  for (int f = 0; f < 6; ++f) n[12 + f] = 10 * face[f][0] + face[f][1];
  n[18] = middle.encode();
  return n;
}

ElementOrder ElementOrder::decode(const std::array<int, 19>& n) {
  ElementOrder o;
  for (int e = 0; e < 12; ++e) o.edge[e] = n[e];
  for (int f = 0; f < 6; ++f) o.face[f] = {n[12 + f] / 10, n[12 + f] % 10};
  o.middle = OrderTriple::decode(n[18]);
  return o;
}

FaceParam face_param(int f, const Vec2& t) {
  auto ax = face_axes(f);
  FaceParam fp;
  fp.xi.setZero();
  fp.xi[kFaceNormal[f]] = kFaceSide[f];
  fp.xi[ax[0]] = t[0];
  fp.xi[ax[1]] = t[1];
  fp.dxidt.setZero();
  fp.dxidt(ax[0], 0) = 1.0;
  fp.dxidt(ax[1], 1) = 1.0;
  return fp;
}

Vec3 edge_param(int e, double t) {
  auto v = kEdgeVerts.at(e);
  Vec3 a(kVertex[v[0]].data()), b(kVertex[v[1]].data());
  return a + t * (b - a);
}

// ---------------------------------------------------------------- quadrature

namespace {

struct GaussTable {
  std::array<std::vector<double>, kMaxQuadPoints + 1> x, w;
  GaussTable() {
    for (int n = 1; n <= kMaxQuadPoints; ++n) {
      x[n].resize(n);
      w[n].resize(n);
      for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
          double p0 = 1.0, p1 = z;
          for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
          }
          dp = n * (z * p1 - p0) / (z * z - 1.0);
          double dz = p1 / dp;
          z -= dz;
          if (std::abs(dz) < 1e-16) break;
        }
        {
          double p0 = 1.0, p1 = z;
          for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
          }
          dp = n * (z * p1 - p0) / (z * z - 1.0);
        }
        x[n][n - 1 - i] = 0.5 * (z + 1.0);
        w[n][n - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
      }
    }
  }
};

const GaussTable& gauss_table() {
  static const GaussTable t;
  return t;
}

void check_count(int n) {
  if (n < 1 || n > kMaxQuadPoints)
    fail(ErrorCode::Config, "quadrature point count " + std::to_string(n) + " outside [1,16]");
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  check_count(n);
  x = gauss_table().x[n];
  w = gauss_table().w[n];
}

QuadratureRule3D gauss_quadrature_3d(const std::array<int, 3>& counts) {
  for (int n : counts) check_count(n);
  const auto& g = gauss_table();
  QuadratureRule3D q;
  q.points.reserve(counts[0] * counts[1] * counts[2]);
  q.weights.reserve(counts[0] * counts[1] * counts[2]);
  for (int i = 0; i < counts[0]; ++i)
    for (int j = 0; j < counts[1]; ++j)
      for (int k = 0; k < counts[2]; ++k) {
        q.points.emplace_back(g.x[counts[0]][i], g.x[counts[1]][j], g.x[counts[2]][k]);
        q.weights.push_back(g.w[counts[0]][i] * g.w[counts[1]][j] * g.w[counts[2]][k]);
      }
  return q;
}

QuadratureRule2D gauss_quadrature_2d(int n1, int n2) {
  check_count(n1);
  check_count(n2);
  const auto& g = gauss_table();
  QuadratureRule2D q;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      q.points.emplace_back(g.x[n1][i], g.x[n2][j]);
      q.weights.push_back(g.w[n1][i] * g.w[n2][j]);
    }
  return q;
}

// ----------------------------------------------------------- shape functions

namespace {

// 1D H1 functions (1-x, x, integrated Legendre) with derivatives, and
// shifted Legendre L2 functions, per master direction.
struct Basis1D {
  double phi[3][kMaxOrder + 1];
  double dphi[3][kMaxOrder + 1];
  double psi[3][kMaxOrder + 1];

  void eval(const Vec3& xi, int pmax) {
    double P[kMaxOrder + 2];
    for (int d = 0; d < 3; ++d) {
      double x = xi[d], s = 2.0 * x - 1.0;
      P[0] = 1.0;
      P[1] = s;
      for (int k = 1; k < pmax; ++k) P[k + 1] = ((2 * k + 1) * s * P[k] - k * P[k - 1]) / (k + 1);
      phi[d][0] = 1.0 - x;
      phi[d][1] = x;
      dphi[d][0] = -1.0;
      dphi[d][1] = 1.0;
      for (int k = 2; k <= pmax; ++k) {
        phi[d][k] = (P[k] - P[k - 2]) / (2.0 * (2 * k - 1));
        dphi[d][k] = P[k - 1];
      }
      for (int k = 0; k < pmax; ++k) psi[d][k] = P[k];
    }
  }
};

struct Range {
  int lo, hi;  // inclusive
  int size() const { return hi >= lo ? hi - lo + 1 : 0; }
};

Range h1_range(int code, int q) {
  if (code == 0) return {0, 0};
  if (code == 2) return {1, 1};
  return {2, q};
}
Range l2_range(int q) { return {0, q - 1}; }

// Per-direction index ranges of the tensor factors of one component of an
// entity block; `h1dir[d]` tells whether direction d uses H1 factors.
struct CompRanges {
  Range r[3];
  bool h1[3];
  bool present;
  int size() const { return present ? r[0].size() * r[1].size() * r[2].size() : 0; }
};

CompRanges comp_ranges(Space s, int ent, int comp, const ElementOrder& o) {
  const auto& code = tables().code[ent];
  CompRanges cr{};
  cr.present = true;
  for (int d = 0; d < 3; ++d) {
    int q = entity_order(o, ent, d);
    bool use_h1 = true;
    switch (s) {
      case Space::H1: use_h1 = true; break;
      case Space::HCurl: use_h1 = d != comp; break;
      case Space::HDiv: use_h1 = d == comp; break;
      case Space::L2: use_h1 = false; break;
    }
    cr.h1[d] = use_h1;
    if (use_h1) {
      cr.r[d] = h1_range(code[d], q);
    } else {
      if (code[d] != 1) cr.present = false;
      cr.r[d] = l2_range(q);
    }
  }
  return cr;
}

int ncomp_of(Space s) { return (s == Space::HCurl || s == Space::HDiv) ? 3 : 1; }

void check_orders(const ElementOrder& o, int pmax) {
  auto bad = [&](int p) { return p < 1 || p > pmax; };
  bool err = false;
  for (int p : o.edge) err |= bad(p);
  for (auto& f : o.face) err |= bad(f[0]) || bad(f[1]);
  err |= bad(o.middle.px) || bad(o.middle.py) || bad(o.middle.pz);
  if (err) fail(ErrorCode::Order, "polynomial order outside [1," + std::to_string(pmax) + "]");
}

int max_order(const ElementOrder& o) {
  int m = o.middle.max();
  for (int p : o.edge) m = std::max(m, p);
  for (auto& f : o.face) m = std::max({m, f[0], f[1]});
  return m;
}

void evaluate(Space s, const Vec3& xi, const ElementOrder& o, ShapeSet& out) {
  Basis1D b;
  b.eval(xi, max_order(o));
  out.space = s;
  int n = dof_count(s, o);
  out.nrdof = n;
  out.value.clear();
  out.vec.clear();
  out.deriv.clear();
  out.div.clear();
  switch (s) {
    case Space::H1:
      out.value.resize(n);
      out.deriv.resize(n);
      break;
    case Space::HCurl:
      out.vec.resize(n);
      out.deriv.resize(n);
      break;
    case Space::HDiv:
      out.vec.resize(n);
      out.div.resize(n);
      break;
    case Space::L2: out.value.resize(n); break;
  }
  int k = 0;
  int nc = ncomp_of(s);
  for (int ent = 0; ent < kNumEntities; ++ent) {
    for (int c = 0; c < nc; ++c) {
      CompRanges cr = comp_ranges(s, ent, c, o);
      if (cr.size() == 0) continue;
      for (int i = cr.r[0].lo; i <= cr.r[0].hi; ++i)
        for (int j = cr.r[1].lo; j <= cr.r[1].hi; ++j)
          for (int l = cr.r[2].lo; l <= cr.r[2].hi; ++l) {
            int idx[3] = {i, j, l};
            double f[3], df[3];
            for (int d = 0; d < 3; ++d) {
              if (cr.h1[d]) {
                f[d] = b.phi[d][idx[d]];
                df[d] = b.dphi[d][idx[d]];
              } else {
                f[d] = b.psi[d][idx[d]];
                df[d] = 0.0;
              }
            }
            double val = f[0] * f[1] * f[2];
            Vec3 g(df[0] * f[1] * f[2], f[0] * df[1] * f[2], f[0] * f[1] * df[2]);
            switch (s) {
              case Space::H1:
                out.value[k] = val;
                out.deriv[k] = g;
                break;
              case Space::HCurl: {
                Vec3 e = Vec3::Unit(c);
                out.vec[k] = val * e;
                g[c] = 0.0;
                out.deriv[k] = g.cross(e);
                break;
              }
              case Space::HDiv:
                out.vec[k] = val * Vec3::Unit(c);
                out.div[k] = g[c];
                break;
              case Space::L2: out.value[k] = val; break;
            }
            ++k;
          }
    }
  }
}

}  // namespace

void shape_functions(Space s, const Vec3& xi, const ElementOrder& order, ShapeSet& out) {
  check_orders(order, kMaxP);
  evaluate(s, xi, order, out);
}

ShapeSet shape_functions(Space s, const Vec3& xi, const ElementOrder& order) {
  ShapeSet out;
  shape_functions(s, xi, order, out);
  return out;
}

ShapeSet shape_functions(Space s, const Vec3& xi, OrderTriple order,
                         const std::array<int, 12>& edge_orient,
                         const std::array<int, 6>& face_orient) {
  for (int o : edge_orient)
    if (o != 0) fail(ErrorCode::Unsupported, "nonzero edge orientation is not supported");
  for (int o : face_orient)
    if (o != 0) fail(ErrorCode::Unsupported, "nonzero face orientation is not supported");
  return shape_functions(s, xi, ElementOrder::uniform(order));
}

void broken_shape_functions(Space s, const Vec3& xi, OrderTriple order, ShapeSet& out) {
  ElementOrder o = ElementOrder::uniform(order);
  check_orders(o, kMaxOrder);
  evaluate(s, xi, o, out);
}

int entity_dof_count(Space s, int ent, const ElementOrder& order) {
  int n = 0;
  for (int c = 0; c < ncomp_of(s); ++c) n += comp_ranges(s, ent, c, order).size();
  return n;
}

std::array<int, 28> entity_offsets(Space s, const ElementOrder& order) {
  std::array<int, 28> off{};
  for (int ent = 0; ent < kNumEntities; ++ent)
    off[ent + 1] = off[ent] + entity_dof_count(s, ent, order);
  return off;
}

int dof_count(Space s, const ElementOrder& order) { return entity_offsets(s, order)[27]; }

int dof_count(Space s, OrderTriple p) {
  int px = p.px, py = p.py, pz = p.pz;
  switch (s) {
    case Space::H1: return (px + 1) * (py + 1) * (pz + 1);
    case Space::HCurl:
      return px * (py + 1) * (pz + 1) + (px + 1) * py * (pz + 1) + (px + 1) * (py + 1) * pz;
    case Space::HDiv: return (px + 1) * py * pz + px * (py + 1) * pz + px * py * (pz + 1);
    case Space::L2: return px * py * pz;
  }
  return 0;
}

int node_dof_count(Space s, EntityKind kind, int encoded) {
  switch (kind) {
    case EntityKind::Vertex: return s == Space::H1 ? 1 : 0;
    case EntityKind::Edge: {
      int p = encoded;
      if (s == Space::H1) return p - 1;
      if (s == Space::HCurl) return p;
      return 0;
    }
    case EntityKind::Face: {
      int p1 = encoded / 10, p2 = encoded % 10;
      if (s == Space::H1) return (p1 - 1) * (p2 - 1);
      if (s == Space::HCurl) return p1 * (p2 - 1) + (p1 - 1) * p2;
      if (s == Space::HDiv) return p1 * p2;
      return 0;
    }
    case EntityKind::Middle: {
      OrderTriple o = OrderTriple::decode(encoded);
      int px = o.px, py = o.py, pz = o.pz;
      switch (s) {
        case Space::H1: return (px - 1) * (py - 1) * (pz - 1);
        case Space::HCurl:
          return px * (py - 1) * (pz - 1) + (px - 1) * py * (pz - 1) + (px - 1) * (py - 1) * pz;
        case Space::HDiv: return (px - 1) * py * pz + px * (py - 1) * pz + px * py * (pz - 1);
        case Space::L2: return px * py * pz;
      }
    }
  }
  return 0;
}

}  // namespace hexhp
