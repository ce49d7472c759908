// SPDX-License-Identifier: Apache-2.0
//
// Trilinear element maps and Piola transforms.
#pragma once

#include <array>

#include "hexhp/masterel.hpp"

namespace hexhp {

using VertexCoords = std::array<Vec3, 8>;

struct GeometryData {
  Vec3 x = Vec3::Zero();
  Mat3 dxdxi = Mat3::Identity();
  Mat3 dxidx = Mat3::Identity();
  double rjac = 1.0;
  // boundary points only
  Vec3 rn = Vec3::Zero();
  double bjac = 0.0;
  Mat32 dxdt = Mat32::Zero();
};

Vec3 trilinear_map(const VertexCoords& xnod, const Vec3& xi);
GeometryData element_geometry(const VertexCoords& xnod, const Vec3& xi);
// f is the 0-based face index; t the face parameter.
GeometryData face_geometry(const VertexCoords& xnod, int f, const Vec2& t);

// Piola maps from master to physical quantities.
inline double piola_h1_value(double v, const GeometryData&) { return v; }
inline Vec3 piola_h1_grad(const Vec3& g, const GeometryData& gd) {
  return gd.dxidx.transpose() * g;
}
inline Vec3 piola_hcurl_value(const Vec3& e, const GeometryData& gd) {
  return gd.dxidx.transpose() * e;
}
inline Vec3 piola_hcurl_curl(const Vec3& c, const GeometryData& gd) {
  return gd.dxdxi * c / gd.rjac;
}
inline Vec3 piola_hdiv_value(const Vec3& v, const GeometryData& gd) {
  return gd.dxdxi * v / gd.rjac;
}
inline double piola_hdiv_div(double d, const GeometryData& gd) { return d / gd.rjac; }
inline double piola_l2_value(double q, const GeometryData& gd) { return q / gd.rjac; }

// Applies the Piola map of the set's space in place.
void piola_transform(ShapeSet& s, const GeometryData& gd);

}  // namespace hexhp
