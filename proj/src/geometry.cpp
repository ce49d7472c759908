// SPDX-License-Identifier: Apache-2.0
#include "hexhp/geometry.hpp"

#include "hexhp/error.hpp"

namespace hexhp {

namespace {

void trilinear(const Vec3& xi, double n[8], Vec3 dn[8]) {
  for (int v = 0; v < 8; ++v) {
    const auto& c = vertex_coords(v);
    double f[3], df[3];
    for (int d = 0; d < 3; ++d) {
      f[d] = c[d] > 0.5 ? xi[d] : 1.0 - xi[d];
      df[d] = c[d] > 0.5 ? 1.0 : -1.0;
    }
    n[v] = f[0] * f[1] * f[2];
    dn[v] = Vec3(df[0] * f[1] * f[2], f[0] * df[1] * f[2], f[0] * f[1] * df[2]);
  }
}

}  // namespace

Vec3 trilinear_map(const VertexCoords& xnod, const Vec3& xi) {
  double n[8];
  Vec3 dn[8];
  trilinear(xi, n, dn);
  Vec3 x = Vec3::Zero();
  for (int v = 0; v < 8; ++v) x += n[v] * xnod[v];
  return x;
}

GeometryData element_geometry(const VertexCoords& xnod, const Vec3& xi) {
  double n[8];
  Vec3 dn[8];
  trilinear(xi, n, dn);
  GeometryData g;
  g.x.setZero();
  g.dxdxi.setZero();
  for (int v = 0; v < 8; ++v) {
    g.x += n[v] * xnod[v];
    g.dxdxi += xnod[v] * dn[v].transpose();
  }
  g.rjac = g.dxdxi.determinant();
  double scale = g.dxdxi.cwiseAbs().maxCoeff();
  if (!(g.rjac > 1e-14 * scale * scale * scale))
    fail(ErrorCode::Mesh, "inverted or degenerate element (det J <= 0)");
  g.dxidx = g.dxdxi.inverse();
  return g;
}

GeometryData face_geometry(const VertexCoords& xnod, int f, const Vec2& t) {
  FaceParam fp = face_param(f, t);
  GeometryData g = element_geometry(xnod, fp.xi);
  g.dxdt = g.dxdxi * fp.dxidt;
  Vec3 c = g.dxdt.col(0).cross(g.dxdt.col(1));
  g.bjac = c.norm();
  g.rn = face_normal_sign(f) * c / g.bjac;
  return g;
}

void piola_transform(ShapeSet& s, const GeometryData& gd) {
  switch (s.space) {
    case Space::H1:
      for (auto& g : s.deriv) g = piola_h1_grad(g, gd);
      break;
    case Space::HCurl:
      for (auto& v : s.vec) v = piola_hcurl_value(v, gd);
      for (auto& c : s.deriv) c = piola_hcurl_curl(c, gd);
      break;
    case Space::HDiv:
      for (auto& v : s.vec) v = piola_hdiv_value(v, gd);
      for (auto& d : s.div) d = piola_hdiv_div(d, gd);
      break;
    case Space::L2:
      for (auto& q : s.value) q = piola_l2_value(q, gd);
      break;
  }
}

}  // namespace hexhp
