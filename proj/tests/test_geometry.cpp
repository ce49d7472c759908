// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "hexhp/error.hpp"
#include "hexhp/geometry.hpp"
#include "support.hpp"

using namespace hexhp;

namespace {

VertexCoords cube(double s = 1.0, const Vec3& shift = Vec3::Zero()) {
  VertexCoords x;
  for (int v = 0; v < 8; ++v) {
    const auto& c = vertex_coords(v);
    x[v] = shift + s * Vec3(c[0], c[1], c[2]);
  }
  return x;
}

VertexCoords distorted() {
  VertexCoords x = cube();
  x[6] += Vec3(0.2, 0.1, 0.15);
  x[1] += Vec3(0.1, -0.05, 0.0);
  x[4] += Vec3(-0.1, 0.05, 0.1);
  return x;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("identity and scaled cubes") {
    GeometryData g = element_geometry(cube(), Vec3(0.3, 0.4, 0.5));
    CHECK((g.x - Vec3(0.3, 0.4, 0.5)).norm() < 1e-15);
    CHECK((g.dxdxi - Mat3::Identity()).norm() < 1e-15);
    CHECK(g.rjac == doctest::Approx(1.0));
    GeometryData h = element_geometry(cube(2.0), Vec3(0.3, 0.4, 0.5));
    CHECK(h.rjac == doctest::Approx(8.0));
    CHECK((h.dxidx - 0.5 * Mat3::Identity()).norm() < 1e-15);
  }

  TEST_CASE("degenerate element is rejected") {
    VertexCoords x = cube();
    x[6] = x[0];
    x[7] = x[0];
    x[5] = x[0];
    x[4] = x[0];
    CHECK_THROWS_AS(element_geometry(x, Vec3(0.5, 0.5, 0.9)), Error);
  }

  TEST_CASE("inverse Jacobian and finite differences") {
    VertexCoords x = distorted();
    for (int t = 0; t < 20; ++t) {
      Vec3 xi = testsupport::random_point();
      GeometryData g = element_geometry(x, xi);
      CHECK((g.dxdxi * g.dxidx - Mat3::Identity()).norm() < 1e-12);
      CHECK(g.rjac > 0);
      Mat3 J;
      const double h = 1e-6;
      for (int d = 0; d < 3; ++d) {
        Vec3 a = xi, b = xi;
        a[d] += h;
        b[d] -= h;
        J.col(d) = (trilinear_map(x, a) - trilinear_map(x, b)) / (2 * h);
      }
      CHECK((J - g.dxdxi).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("face geometry normals and surface Jacobians") {
    GeometryData b = face_geometry(cube(), 0, Vec2(0.3, 0.6));
    CHECK((b.rn - Vec3(0, 0, -1)).norm() < 1e-14);
    CHECK(b.bjac == doctest::Approx(1.0));
    GeometryData r = face_geometry(cube(), 3, Vec2(0.3, 0.6));
    CHECK((r.rn - Vec3(1, 0, 0)).norm() < 1e-14);
    GeometryData t = face_geometry(cube(2.0), 1, Vec2(0.5, 0.5));
    CHECK(t.bjac == doctest::Approx(4.0));
    const Vec3 out[6] = {{0, 0, -1}, {0, 0, 1}, {0, -1, 0}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}};
    for (int f = 0; f < 6; ++f) {
      GeometryData g = face_geometry(cube(), f, Vec2(0.2, 0.7));
      CHECK((g.rn - out[f]).norm() < 1e-14);
    }
    for (int f = 0; f < 6; ++f) {
      GeometryData g = face_geometry(distorted(), f, Vec2(0.4, 0.3));
      CHECK(std::abs(g.rn.norm() - 1.0) < 1e-12);
      // outward: points away from the element center
      Vec3 c = trilinear_map(distorted(), Vec3(0.5, 0.5, 0.5));
      CHECK(g.rn.dot(g.x - c) > 0);
    }
  }

  TEST_CASE("Piola transforms under scaling") {
    GeometryData g = element_geometry(cube(2.0), Vec3(0.5, 0.5, 0.5));
    CHECK((piola_h1_grad(Vec3(1, 0, 0), g) - Vec3(0.5, 0, 0)).norm() < 1e-15);
    CHECK(piola_l2_value(1.0, g) == doctest::Approx(0.125));
    CHECK((piola_hdiv_value(Vec3(1, 0, 0), g) - Vec3(0.25, 0, 0)).norm() < 1e-15);
    CHECK((piola_hcurl_value(Vec3(1, 0, 0), g) - Vec3(0.5, 0, 0)).norm() < 1e-15);
    CHECK(piola_hdiv_div(1.0, g) == doctest::Approx(0.125));
    GeometryData id = element_geometry(cube(), Vec3(0.2, 0.3, 0.4));
    Vec3 v(0.3, -0.2, 0.7);
    CHECK((piola_h1_grad(v, id) - v).norm() < 1e-15);
    CHECK((piola_hcurl_curl(v, id) - v).norm() < 1e-15);
    CHECK((piola_hdiv_value(v, id) - v).norm() < 1e-15);
  }

  TEST_CASE("pullback consistency for an affine map") {
    VertexCoords x = cube(1.0);
    // affine shear
    for (auto& p : x) p = Vec3(p[0] + 0.3 * p[1], 1.5 * p[1], p[2] + 0.2 * p[0]);
    auto r = gauss_quadrature_3d({3, 3, 3});
    const ElementOrder o = ElementOrder::uniform(OrderTriple::iso(2));
    const int n = dof_count(Space::L2, o);
    for (int k = 0; k < n; ++k) {
      double phys = 0, master = 0;
      for (size_t q = 0; q < r.points.size(); ++q) {
        GeometryData g = element_geometry(x, r.points[q]);
        ShapeSet s = shape_functions(Space::L2, r.points[q], o);
        phys += r.weights[q] * g.rjac * piola_l2_value(s.value[k], g);
        master += r.weights[q] * s.value[k];
      }
      CHECK(std::abs(phys - master) < 1e-12);
    }
  }

  TEST_CASE("normal flux of H(div) functions") {
    // scaled cube: physical normal trace = master normal trace / bjac
    VertexCoords x = cube(2.0);
    const ElementOrder o = ElementOrder::uniform(OrderTriple::iso(2));
    for (int f = 0; f < 6; ++f) {
      GeometryData g = face_geometry(x, f, Vec2(0.3, 0.8));
      ShapeSet s = shape_functions(Space::HDiv, g.x / 2.0, o);
      const int n = face_normal_axis(f);
      const double sgn = face_side(f) ? 1.0 : -1.0;
      for (int k = 0; k < s.nrdof; ++k) {
        const double phys = piola_hdiv_value(s.vec[k], g).dot(g.rn);
        CHECK(std::abs(phys - sgn * s.vec[k][n] / g.bjac) < 1e-12);
      }
    }
  }
}
