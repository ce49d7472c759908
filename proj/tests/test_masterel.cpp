// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "hexhp/error.hpp"
#include "hexhp/masterel.hpp"
#include "support.hpp"

using namespace hexhp;
using testsupport::random_point;

namespace {

// Tensor enumeration of the first-family spaces: count index tuples.
int enumerate(Space s, OrderTriple p) {
  auto box = [](int a, int b, int c) {
    int n = 0;
    for (int i = 0; i < a; ++i)
      for (int j = 0; j < b; ++j)
        for (int k = 0; k < c; ++k) ++n;
    return n;
  };
  const int x = p.px, y = p.py, z = p.pz;
  switch (s) {
    case Space::H1: return box(x + 1, y + 1, z + 1);
    case Space::HCurl: return box(x, y + 1, z + 1) + box(x + 1, y, z + 1) + box(x + 1, y + 1, z);
    case Space::HDiv: return box(x + 1, y, z) + box(x, y + 1, z) + box(x, y, z + 1);
    case Space::L2: return box(x, y, z);
  }
  return -1;
}

ShapeSet shapes(Space s, const Vec3& xi, OrderTriple p) {
  return shape_functions(s, xi, ElementOrder::uniform(p));
}

// Derivative of function k by central differences of the value (scalar) or
// of each vector component.
Eigen::Matrix3d fd_jacobian(Space s, OrderTriple p, int k, const Vec3& xi, double h) {
  Eigen::Matrix3d J;
  for (int d = 0; d < 3; ++d) {
    Vec3 a = xi, b = xi;
    a[d] += h;
    b[d] -= h;
    ShapeSet sa = shapes(s, a, p), sb = shapes(s, b, p);
    Vec3 va = s == Space::H1 ? sa.deriv[k] : (s == Space::HCurl ? sa.deriv[k] : sa.vec[k]);
    Vec3 vb = s == Space::H1 ? sb.deriv[k] : (s == Space::HCurl ? sb.deriv[k] : sb.vec[k]);
    J.col(d) = (va - vb) / (2 * h);
  }
  return J;
}

Vec3 interior_point() {
  return Vec3(testsupport::uniform(0.05, 0.95), testsupport::uniform(0.05, 0.95),
              testsupport::uniform(0.05, 0.95));
}

}  // namespace

TEST_SUITE("masterel") {
  TEST_CASE("order triple encoding round trip") {
    for (int a = 1; a <= 9; ++a)
      for (int b = 1; b <= 9; ++b)
        for (int c = 1; c <= 9; ++c) {
          OrderTriple t{a, b, c};
          CHECK(OrderTriple::decode(t.encode()) == t);
        }
    CHECK(OrderTriple{2, 3, 4}.encode() == 234);
  }

  TEST_CASE("dof counts match tensor enumeration") {
    CHECK(dof_count(Space::H1, OrderTriple::iso(2)) == 27);
    CHECK(dof_count(Space::HCurl, OrderTriple::iso(2)) == 54);
    CHECK(dof_count(Space::HDiv, OrderTriple::iso(2)) == 36);
    CHECK(dof_count(Space::L2, OrderTriple::iso(1)) == 1);
    for (Space s : {Space::H1, Space::HCurl, Space::HDiv, Space::L2})
      for (int a = 1; a <= 4; ++a)
        for (int b = 1; b <= 4; ++b)
          for (int c = 1; c <= 4; ++c) {
            OrderTriple p{a, b, c};
            CHECK(dof_count(s, p) == enumerate(s, p));
            CHECK(dof_count(s, ElementOrder::uniform(p)) == enumerate(s, p));
            CHECK(shapes(s, Vec3(0.3, 0.4, 0.5), p).nrdof == enumerate(s, p));
          }
  }

  TEST_CASE("entity offsets partition the element dofs") {
    for (Space s : {Space::H1, Space::HCurl, Space::HDiv, Space::L2}) {
      ElementOrder o = ElementOrder::uniform({2, 3, 4});
      auto off = entity_offsets(s, o);
      CHECK(off[0] == 0);
      for (int e = 0; e < kNumEntities; ++e) CHECK(off[e + 1] - off[e] == entity_dof_count(s, e, o));
      CHECK(off[kNumEntities] == dof_count(s, o));
    }
  }

  TEST_CASE("gauss quadrature examples") {
    auto r = gauss_quadrature_3d({1, 1, 1});
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].isApprox(Vec3(0.5, 0.5, 0.5)));
    CHECK(r.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

    std::vector<double> x, w;
    gauss_legendre(2, x, w);
    CHECK(x[0] == doctest::Approx(0.5 - std::sqrt(3.0) / 6).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(0.5 + std::sqrt(3.0) / 6).epsilon(1e-15));
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-15));
    double cube = 0;
    for (int i = 0; i < 2; ++i) cube += w[i] * x[i] * x[i] * x[i];
    CHECK(std::abs(cube - 0.25) < 1e-15);

    auto r3 = gauss_quadrature_3d({3, 3, 3});
    double s = 0;
    for (size_t q = 0; q < r3.points.size(); ++q) {
      const Vec3& p = r3.points[q];
      s += r3.weights[q] * p[0] * p[0] * p[1] * p[1] * p[2] * p[2];
    }
    CHECK(std::abs(s - 1.0 / 27.0) < 1e-14);
    CHECK(gauss_quadrature_3d({2, 3, 4}).points.size() == 24);
  }

  TEST_CASE("quadrature weights sum to one and reject bad counts") {
    for (int n = 1; n <= kMaxQuadPoints; ++n) {
      auto r = gauss_quadrature_3d({n, n, n});
      double s = 0;
      for (double w : r.weights) {
        CHECK(w > 0);
        s += w;
      }
      CHECK(std::abs(s - 1.0) < 1e-13);
    }
    CHECK_THROWS_AS(gauss_quadrature_3d({0, 1, 1}), Error);
    CHECK_THROWS_AS(gauss_quadrature_3d({17, 1, 1}), Error);
  }

  TEST_CASE("H1 partition of unity at order one") {
    ShapeSet s = shapes(Space::H1, Vec3(0.3, 0.4, 0.5), OrderTriple::iso(1));
    REQUIRE(s.nrdof == 8);
    double sum = 0;
    for (double v : s.value) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-15);
  }

  TEST_CASE("L2 functions of order two are orthogonal") {
    const OrderTriple p = OrderTriple::iso(2);
    auto r = gauss_quadrature_3d({4, 4, 4});
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(8, 8);
    for (size_t q = 0; q < r.points.size(); ++q) {
      ShapeSet s = shapes(Space::L2, r.points[q], p);
      REQUIRE(s.nrdof == 8);
      Eigen::Map<Eigen::VectorXd> v(s.value.data(), 8);
      G += r.weights[q] * v * v.transpose();
    }
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        if (i != j) CHECK(std::abs(G(i, j)) < 1e-12);
  }

  TEST_CASE("orientation flags and order range are validated") {
    std::array<int, 12> eo{};
    std::array<int, 6> fo{};
    CHECK_NOTHROW(shape_functions(Space::H1, Vec3(0.5, 0.5, 0.5), OrderTriple::iso(2), eo, fo));
    eo[3] = 1;
    CHECK_THROWS_AS(shape_functions(Space::H1, Vec3(0.5, 0.5, 0.5), OrderTriple::iso(2), eo, fo), Error);
    eo[3] = 0;
    fo[1] = 2;
    CHECK_THROWS_AS(shape_functions(Space::HDiv, Vec3(0.5, 0.5, 0.5), OrderTriple::iso(2), eo, fo), Error);
    fo[1] = 0;
    try {
      shape_functions(Space::H1, Vec3(0.5, 0.5, 0.5), OrderTriple{10, 1, 1}, eo, fo);
      FAIL("order 10 accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Order);
    }
  }

  TEST_CASE("face parametrization") {
    auto a = face_param(0, Vec2(0.25, 0.75));
    CHECK(a.xi.isApprox(Vec3(0.25, 0.75, 0.0)));
    auto b = face_param(1, Vec2(0.0, 0.0));
    CHECK((b.xi - Vec3(0, 0, 1)).norm() < 1e-15);
    for (int k = 0; k < 5; ++k) {
      auto c = face_param(3, Vec2(testsupport::uniform(), testsupport::uniform()));
      CHECK(c.xi[0] == 1.0);
      CHECK(c.dxidt.row(0).norm() == 0.0);
    }
    CHECK_THROWS_AS(face_param(6, Vec2(0, 0)), Error);
  }

  TEST_CASE("exact sequence nulls by finite differences") {
    const double h = 1e-5;
    for (int p = 1; p <= 3; ++p) {
      const OrderTriple o = OrderTriple::iso(p);
      for (int t = 0; t < 10; ++t) {
        Vec3 xi = interior_point();
        ShapeSet sh = shapes(Space::H1, xi, o);
        for (int k = 0; k < sh.nrdof; ++k) {
          Eigen::Matrix3d J = fd_jacobian(Space::H1, o, k, xi, h);  // Hessian of phi
          Vec3 curl(J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1));
          CHECK(curl.norm() < 1e-6);
        }
        ShapeSet se = shapes(Space::HCurl, xi, o);
        for (int k = 0; k < se.nrdof; ++k) {
          Eigen::Matrix3d J = fd_jacobian(Space::HCurl, o, k, xi, h);  // derivative of the curl
          CHECK(std::abs(J.trace()) < 1e-6);
        }
      }
    }
  }

  TEST_CASE("derivative outputs agree with finite differences") {
    const double h = 1e-6;
    const OrderTriple o{2, 3, 2};
    for (int t = 0; t < 5; ++t) {
      Vec3 xi = interior_point();
      ShapeSet s = shapes(Space::H1, xi, o);
      for (int k = 0; k < s.nrdof; ++k) {
        Vec3 g;
        for (int d = 0; d < 3; ++d) {
          Vec3 a = xi, b = xi;
          a[d] += h;
          b[d] -= h;
          g[d] = (shapes(Space::H1, a, o).value[k] - shapes(Space::H1, b, o).value[k]) / (2 * h);
        }
        CHECK((g - s.deriv[k]).norm() < 1e-7);
      }
      ShapeSet e = shapes(Space::HCurl, xi, o);
      for (int k = 0; k < e.nrdof; ++k) {
        Eigen::Matrix3d J;
        for (int d = 0; d < 3; ++d) {
          Vec3 a = xi, b = xi;
          a[d] += h;
          b[d] -= h;
          J.col(d) = (shapes(Space::HCurl, a, o).vec[k] - shapes(Space::HCurl, b, o).vec[k]) / (2 * h);
        }
        Vec3 curl(J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1));
        CHECK((curl - e.deriv[k]).norm() < 1e-7);
      }
      ShapeSet v = shapes(Space::HDiv, xi, o);
      for (int k = 0; k < v.nrdof; ++k) {
        double div = 0;
        for (int d = 0; d < 3; ++d) {
          Vec3 a = xi, b = xi;
          a[d] += h;
          b[d] -= h;
          div += (shapes(Space::HDiv, a, o).vec[k][d] - shapes(Space::HDiv, b, o).vec[k][d]) / (2 * h);
        }
        CHECK(std::abs(div - v.div[k]) < 1e-7);
      }
    }
  }

  TEST_CASE("span containment along the sequence") {
    for (int p = 1; p <= 3; ++p) {
      const OrderTriple o = OrderTriple::iso(p);
      std::vector<Vec3> pts;
      for (int i = 0; i < 100; ++i) pts.push_back(random_point());
      auto check = [&](Space from, Space to) {
        const int nf = dof_count(from, o), nt = dof_count(to, o);
        const int w = to == Space::L2 ? 1 : 3;
        Eigen::MatrixXd A(w * pts.size(), nt), B(w * pts.size(), nf);
        for (size_t i = 0; i < pts.size(); ++i) {
          ShapeSet sf = shapes(from, pts[i], o), st = shapes(to, pts[i], o);
          for (int k = 0; k < nt; ++k)
            for (int d = 0; d < w; ++d) A(w * i + d, k) = w == 1 ? st.value[k] : st.vec[k][d];
          for (int k = 0; k < nf; ++k)
            for (int d = 0; d < w; ++d)
              B(w * i + d, k) = from == Space::HDiv ? sf.div[k] : sf.deriv[k][d];
        }
        Eigen::MatrixXd X = A.colPivHouseholderQr().solve(B);
        return (A * X - B).cwiseAbs().maxCoeff();
      };
      CHECK(check(Space::H1, Space::HCurl) < 1e-10);
      CHECK(check(Space::HCurl, Space::HDiv) < 1e-10);
      CHECK(check(Space::HDiv, Space::L2) < 1e-10);
    }
  }

  TEST_CASE("trace locality of face blocks") {
    const ElementOrder o = ElementOrder::uniform(OrderTriple::iso(3));
    for (Space s : {Space::H1, Space::HCurl, Space::HDiv}) {
      auto off = entity_offsets(s, o);
      for (int f = 0; f < 6; ++f)
        for (int g = 0; g < 6; ++g) {
          if (f == g) continue;
          const int n = face_normal_axis(g);
          for (int t = 0; t < 5; ++t) {
            Vec3 xi = face_param(g, Vec2(testsupport::uniform(), testsupport::uniform())).xi;
            ShapeSet sh = shape_functions(s, xi, o);
            for (int k = off[20 + f]; k < off[21 + f]; ++k) {
              if (s == Space::H1) {
                CHECK(std::abs(sh.value[k]) < 1e-12);
              } else if (s == Space::HDiv) {
                CHECK(std::abs(sh.vec[k][n]) < 1e-12);
              } else {
                Vec3 v = sh.vec[k];
                v[n] = 0.0;  // tangential part
                CHECK(v.norm() < 1e-12);
              }
            }
          }
        }
    }
  }

  TEST_CASE("shape sets are linearly independent") {
    for (Space s : {Space::H1, Space::HCurl, Space::HDiv, Space::L2})
      for (int p = 1; p <= 4; ++p) {
        const OrderTriple o{p, std::max(1, p - 1), p};
        const int n = dof_count(s, o);
        auto r = gauss_quadrature_3d({o.px + 2, o.py + 2, o.pz + 2});
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
        for (size_t q = 0; q < r.points.size(); ++q) {
          ShapeSet sh = shapes(s, r.points[q], o);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              G(i, j) += r.weights[q] * ((s == Space::H1 || s == Space::L2)
                                             ? sh.value[i] * sh.value[j]
                                             : sh.vec[i].dot(sh.vec[j]));
        }
        Eigen::LLT<Eigen::MatrixXd> llt(G);
        CHECK(llt.info() == Eigen::Success);
      }
  }

  TEST_CASE("broken shapes span the same functions as conforming ones") {
    const OrderTriple o{3, 2, 4};
    for (Space s : {Space::H1, Space::HCurl, Space::HDiv, Space::L2}) {
      std::vector<Vec3> pts;
      for (int i = 0; i < 80; ++i) pts.push_back(random_point());
      const int n = dof_count(s, o);
      const int w = (s == Space::H1 || s == Space::L2) ? 1 : 3;
      Eigen::MatrixXd A(w * pts.size(), n), B(w * pts.size(), n);
      for (size_t i = 0; i < pts.size(); ++i) {
        ShapeSet a = shapes(s, pts[i], o), b;
        broken_shape_functions(s, pts[i], o, b);
        REQUIRE(b.nrdof == n);
        for (int k = 0; k < n; ++k)
          for (int d = 0; d < w; ++d) {
            A(w * i + d, k) = w == 1 ? a.value[k] : a.vec[k][d];
            B(w * i + d, k) = w == 1 ? b.value[k] : b.vec[k][d];
          }
      }
      Eigen::MatrixXd X = A.colPivHouseholderQr().solve(B);
      CHECK((A * X - B).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}
