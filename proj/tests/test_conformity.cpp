// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "hexhp/conformity.hpp"
#include "hexhp/error.hpp"
#include "support.hpp"

using namespace hexhp;
using testsupport::uniform;

namespace {

// Random master point on local entity `ent`.
Vec3 point_on(int ent) {
  const auto& c = entity_code(ent);
  Vec3 x;
  for (int d = 0; d < 3; ++d) x[d] = c[d] == 1 ? uniform() : c[d] / 2.0;
  return x;
}

double trace_of(Space s, const ShapeSet& set, int k, int ent) {
  if (s == Space::H1) return set.value[k];
  return set.vec[k][face_normal_axis(ent - 20)];
}

// Rebuilds the son's coefficients on the closure of child entity `i` from
// random father coefficients and compares traces pointwise.
double constraint_trace_error(Space s, int oct, int i, const ElementOrder& oA,
                              const ElementOrder& oC) {
  const int j = parent_entity_index(oct, i);
  auto offA = entity_offsets(s, oA);
  auto offC = entity_offsets(s, oC);
  Eigen::VectorXd a = Eigen::VectorXd::Random(offA[kNumEntities]);
  Eigen::VectorXd child = Eigen::VectorXd::Zero(offC[kNumEntities]);
  for (int ic : entity_closure(i)) {
    if (entity_dof_count(s, ic, oC) == 0) continue;
    int jc = parent_entity_index(oct, ic);
    const Eigen::MatrixXd& R = constraint_coefficients(s, jc, oct, ic, oA, oC);
    Eigen::VectorXd restricted(R.cols());
    int n = 0;
    for (int e : entity_closure(jc))
      for (int k = offA[e]; k < offA[e + 1]; ++k) restricted[n++] = a[k];
    REQUIRE(n == R.cols());
    child.segment(offC[ic], offC[ic + 1] - offC[ic]) = R * restricted;
  }
  (void)j;
  const auto& vo = vertex_coords(oct);
  const Vec3 shift(vo[0], vo[1], vo[2]);
  const double scale = s == Space::HDiv ? 4.0 : 1.0;
  double err = 0.0;
  for (int t = 0; t < 20; ++t) {
    Vec3 xc = point_on(i);
    ShapeSet sc = shape_functions(s, xc, oC);
    ShapeSet sp = shape_functions(s, (shift + xc) / 2.0, oA);
    double vc = 0.0, vp = 0.0;
    for (int ic : entity_closure(i))
      for (int k = offC[ic]; k < offC[ic + 1]; ++k) vc += child[k] * trace_of(s, sc, k, i);
    for (int k = 0; k < offA[kNumEntities]; ++k) vp += a[k] * trace_of(s, sp, k, i);
    err = std::max(err, std::abs(scale * vc - vp));
  }
  return err;
}

double h1_value(const ElementOrder& o, const Eigen::VectorXd& coef, const Vec3& xi) {
  ShapeSet s = shape_functions(Space::H1, xi, o);
  double v = 0.0;
  for (int k = 0; k < s.nrdof; ++k) v += coef[k] * s.value[k];
  return v;
}

// Master coordinates of physical x in an axis-aligned element.
Vec3 to_master(const VertexCoords& xn, const Vec3& x) {
  return (x - xn[0]).cwiseQuotient(xn[6] - xn[0]);
}

void fill_random_dofs(Mesh& m) {
  for (int id = 1; id <= m.nrnodes(); ++id)
    for (auto& d : m.node(id).dofs)
      for (double& v : d) v = uniform(-1, 1);
  m.set_solved(true);
}

}  // namespace

TEST_SUITE("conformity") {
  TEST_CASE("edge midpoint vertex at order one") {
    ElementOrder o = ElementOrder::uniform(OrderTriple::iso(1));
    // son in octant 0; its vertex 1 is the midpoint of father edge 8
    REQUIRE(parent_entity_index(0, 1) == 8);
    const Eigen::MatrixXd& R = constraint_coefficients(Space::H1, 8, 0, 1, o, o);
    REQUIRE(R.rows() == 1);
    REQUIRE(R.cols() == 2);
    CHECK(R(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(R(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("constrained traces reproduce the father trace") {
    for (int p = 1; p <= 4; ++p) {
      ElementOrder o = ElementOrder::uniform(OrderTriple::iso(p));
      for (int oct = 0; oct < 8; ++oct)
        for (int i = 0; i < kMiddle; ++i) {
          int j = parent_entity_index(oct, i);
          if (j == kMiddle) continue;  // interior of the father: unconstrained
          CHECK(constraint_trace_error(Space::H1, oct, i, o, o) < 1e-12);
          if (i >= 20) CHECK(constraint_trace_error(Space::HDiv, oct, i, o, o) < 1e-12);
        }
    }
    // anisotropic father, son of the same orders
    ElementOrder oa = ElementOrder::uniform(OrderTriple{2, 3, 1});
    for (int oct = 0; oct < 8; ++oct)
      for (int i = 8; i < kMiddle; ++i)
        if (parent_entity_index(oct, i) != kMiddle)
          CHECK(constraint_trace_error(Space::H1, oct, i, oa, oa) < 1e-12);
  }

  TEST_CASE("quadrant flux is a quarter of a constant father flux") {
    ElementOrder o = ElementOrder::uniform(OrderTriple::iso(1));
    // son octant 0, face 0 (z = 0) lies in father face 20
    const int i = 20;
    const int j = parent_entity_index(0, i);
    REQUIRE(j == 20);
    const Eigen::MatrixXd& R = constraint_coefficients(Space::HDiv, j, 0, i, o, o);
    REQUIRE(R.rows() == 1);
    auto q = gauss_quadrature_2d(3, 3);
    double child = 0.0, parent_quadrant = 0.0, parent_full = 0.0;
    auto off = entity_offsets(Space::HDiv, o);
    const int k = off[i];
    for (size_t n = 0; n < q.points.size(); ++n) {
      Vec3 x(q.points[n][0], q.points[n][1], 0.0);
      child += q.weights[n] * shape_functions(Space::HDiv, x, o).vec[k][2];
      parent_full += q.weights[n] * shape_functions(Space::HDiv, x, o).vec[k][2];
      parent_quadrant +=
          0.25 * q.weights[n] * shape_functions(Space::HDiv, x / 2.0, o).vec[k][2];
    }
    CHECK(R(0, 0) * child == doctest::Approx(parent_quadrant).epsilon(1e-13));
    CHECK(parent_quadrant == doctest::Approx(0.25 * parent_full).epsilon(1e-13));
  }

  TEST_CASE("unsupported constraint cases") {
    ElementOrder o = ElementOrder::uniform(OrderTriple::iso(1));
    CHECK_THROWS_AS(constraint_coefficients(Space::L2, 20, 0, 20, o, o), Error);
    CHECK_THROWS_AS(constraint_coefficients(Space::H1, 21, 0, 20, o, o), Error);
  }

  TEST_CASE("conforming element expands by the identity") {
    Mesh m = testsupport::box_mesh(ProblemKind::Ultraweak, 1, 1, 1, 2);
    ModifiedElement me = modified_element(m, 1);
    for (const auto& b : me.attrs) {
      CHECK(b.nloc == b.nmod);
      CHECK(b.C.isIdentity(0.0));
    }
  }

  TEST_CASE("hanging vertices average their parents") {
    Mesh m = testsupport::box_mesh(ProblemKind::Galerkin, 2, 1, 1, 1);
    m.refine(2);
    int total_rows = 0;
    for (int s : m.node(2).sons) {
      ModifiedElement me = modified_element(m, s);
      const auto& C = me.attrs[0].C;
      for (int r = 0; r < C.rows(); ++r) {
        double sum = C.row(r).sum();
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        int nz = (C.row(r).array().abs() > 0).count();
        if (nz > 1) {
          ++total_rows;
          // edge midpoints take two halves, face centres four quarters
          for (int c = 0; c < C.cols(); ++c)
            if (C(r, c) != 0.0) CHECK((std::abs(C(r, c) - 0.5) < 1e-12 || std::abs(C(r, c) - 0.25) < 1e-12));
        }
      }
    }
    CHECK(total_rows > 0);
  }

  TEST_CASE("traces agree across constrained faces") {
    Mesh m = testsupport::box_mesh(ProblemKind::Galerkin, 2, 1, 1, 3);
    m.refine(2);
    fill_random_dofs(m);
    VertexCoords xc = m.element_vertices(1);
    Eigen::VectorXd uc = gather_solution(m, 1, 0);
    ElementOrder oc = m.element_order(1);
    for (int s : m.node(2).sons) {
      VertexCoords xs = m.element_vertices(s);
      if (std::abs(xs[0][0] - 0.5) > 1e-12) continue;
      Eigen::VectorXd us = gather_solution(m, s, 0);
      for (int t = 0; t < 10; ++t) {
        Vec3 x(0.5, xs[0][1] + 0.5 * uniform(), xs[0][2] + 0.5 * uniform());
        double a = h1_value(m.element_order(s), us, to_master(xs, x));
        double b = h1_value(oc, uc, to_master(xc, x));
        CHECK(std::abs(a - b) < 1e-12);
      }
    }
  }

  TEST_CASE("2-irregular configurations are rejected") {
    Mesh m = testsupport::box_mesh(ProblemKind::Galerkin, 2, 1, 1, 1);
    m.refine(1);
    int s = 0;
    for (int c : m.node(1).sons)
      if (std::abs(m.element_vertices(c)[6][0] - 0.5) < 1e-12) s = c;
    REQUIRE(s != 0);
    m.refine(s);
    int g = 0;
    for (int c : m.node(s).sons)
      if (std::abs(m.element_vertices(c)[6][0] - 0.5) < 1e-12) g = c;
    REQUIRE(g != 0);
    try {
      modified_element(m, g);
      FAIL("expected an irregularity error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Irregular);
    }
    m.close_mesh();
    CHECK_NOTHROW(modified_element(m, g));
  }

  TEST_CASE("gather_solution") {
    Mesh m = testsupport::box_mesh(ProblemKind::Galerkin, 1, 1, 1, 1);
    CHECK_THROWS_AS(gather_solution(m, 1, 0), Error);
    auto pb = testsupport::make_problem(ProblemKind::Galerkin, SolutionKind::Linear);
    Mesh q = testsupport::problem_mesh(pb, 2, 1, 1, 1);
    q.refine(2);
    q.close_mesh();
    update_gdof(q);
    set_dirichlet_flags(q, pb);
    apply_dirichlet(q, pb);
    assemble_and_solve(q, element_routine(pb));
    for (int mdle : q.traverse_active()) {
      Eigen::VectorXd u = gather_solution(q, mdle, 0);
      VertexCoords x = q.element_vertices(mdle);
      for (int v = 0; v < 8; ++v) CHECK(u[v] == doctest::Approx(x[v][0]).epsilon(1e-10));
    }
    // disabled attributes are still gathered
    q.physics().attrs[0].enabled = false;
    CHECK_NOTHROW(gather_solution(q, q.traverse_active()[0], 0));
  }

  TEST_CASE("face centre of a bilinear parent") {
    Mesh m = testsupport::box_mesh(ProblemKind::Galerkin, 2, 1, 1, 1);
    m.refine(2);
    fill_random_dofs(m);
    // coarse shared face: x = 0.5 on element 1
    int F = 0;
    for (int f = 0; f < 6; ++f)
      if (m.initial_element(1).neighbors[f] == 2) F = f;
    auto fv = face_vertices(F);
    double avg = 0.0;
    for (int v : fv) avg += m.node(m.element_nodes(1)[v]).dofs[0][0] / 4.0;
    int checked = 0;
    for (int s : m.node(2).sons) {
      Eigen::VectorXd u = gather_solution(m, s, 0);
      VertexCoords x = m.element_vertices(s);
      for (int v = 0; v < 8; ++v)
        if ((x[v] - Vec3(0.5, 0.5, 0.5)).norm() < 1e-12) {
          CHECK(u[v] == doctest::Approx(avg).epsilon(1e-13));
          ++checked;
        }
    }
    CHECK(checked == 4);
  }

  TEST_CASE("Dirichlet interpolation of linear data") {
    auto pb = testsupport::make_problem(ProblemKind::Galerkin, SolutionKind::Linear);
    Mesh m = testsupport::problem_mesh(pb, 1, 1, 1, 2);
    for (int id = 1; id <= m.nrnodes(); ++id) {
      const Node& n = m.node(id);
      if (n.kind == EntityKind::Vertex)
        CHECK(n.dofs[0][0] == doctest::Approx(n.coords[0]).epsilon(1e-14));
      else if (n.kind != EntityKind::Middle)
        for (double v : n.dofs[0]) CHECK(std::abs(v) < 1e-12);
    }
  }

  TEST_CASE("edge projection reproduces x squared") {
    Mesh m = testsupport::box_mesh(ProblemKind::Galerkin, 1, 1, 1, 2);
    m.set_bcond(0, 0, 0, 1);
    update_Ddof(m, [](const Vec3& x, int, int, double& u, Vec3& g) {
      u = x[0] * x[0];
      g = Vec3(2 * x[0], 0, 0);
    });
    Eigen::VectorXd c = local_values(m, modified_element(m, 1), 0);
    ElementOrder o = m.element_order(1);
    for (int t = 0; t < 10; ++t) {
      double s = uniform();
      CHECK(h1_value(o, c, Vec3(s, 0, 0)) == doctest::Approx(s * s).epsilon(1e-12));
    }
  }

  TEST_CASE("boundary polynomials of degree p are interpolated exactly") {
    for (int p = 1; p <= 4; ++p) {
      Mesh m = testsupport::box_mesh(ProblemKind::Galerkin, 1, 1, 1, p);
      m.set_bcond(0, 0, 0, 1);
      auto poly = [p](const Vec3& x) {
        return std::pow(x[0], p) * x[1] + std::pow(x[2], p) - std::pow(x[1], p) * x[2];
      };
      update_Ddof(m, [&](const Vec3& x, int, int, double& u, Vec3& g) {
        const double h = 1e-6;
        u = poly(x);
        for (int d = 0; d < 3; ++d) {
          Vec3 e = Vec3::Zero();
          e[d] = h;
          g[d] = (poly(x + e) - poly(x - e)) / (2 * h);
        }
      });
      Eigen::VectorXd c = local_values(m, modified_element(m, 1), 0);
      ElementOrder o = m.element_order(1);
      for (int f = 0; f < 6; ++f)
        for (int t = 0; t < 10; ++t) {
          Vec3 x = point_on(20 + f);
          CHECK(std::abs(h1_value(o, c, x) - poly(x)) < 1e-10);
        }
    }
  }

  TEST_CASE("homogeneous Dirichlet data skips interpolation") {
    Mesh m = testsupport::box_mesh(ProblemKind::Galerkin, 1, 1, 1, 2);
    m.physics().attrs[0].homogeneous_dirichlet = true;
    m.set_bcond(0, 0, 0, 1);
    fill_random_dofs(m);
    int calls = 0;
    update_Ddof(m, [&](const Vec3&, int, int, double& u, Vec3& g) {
      ++calls;
      u = 1.0;
      g = Vec3::Zero();
    });
    CHECK(calls == 0);
    for (int id = 1; id <= m.nrnodes(); ++id)
      if (m.node(id).kind != EntityKind::Middle)
        for (double v : m.node(id).dofs[0]) CHECK(v == 0.0);
  }

  TEST_CASE("Dirichlet flags on flux attributes are unsupported") {
    Mesh m = testsupport::box_mesh(ProblemKind::Primal, 1, 1, 1, 1);
    m.set_bcond(0, 1, 0, 1);
    try {
      update_Ddof(m, [](const Vec3&, int, int, double& u, Vec3& g) {
        u = 0;
        g = Vec3::Zero();
      });
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Unsupported);
    }
  }

  TEST_CASE("geometry dofs of refined elements") {
    GeometryInput g = box_geometry(1, 1, 1, Vec3::Zero(), Vec3(2, 1, 1));
    Mesh m(g, default_physics(ProblemKind::Galerkin), OrderTriple::iso(1));
    m.refine(1);
    int centre = 0;
    for (int id = 1; id <= m.nrnodes(); ++id)
      if (m.node(id).kind == EntityKind::Vertex && (m.node(id).coords - Vec3(1, 0.5, 0.5)).norm() < 1e-15)
        centre = id;
    REQUIRE(centre != 0);
    m.node(centre).coords = Vec3(9, 9, 9);
    update_gdof(m);
    CHECK((m.node(centre).coords - Vec3(1, 0.5, 0.5)).norm() < 1e-15);
    std::vector<Vec3> snap;
    for (int id = 1; id <= m.nrnodes(); ++id) snap.push_back(m.node(id).coords);
    update_gdof(m);
    for (int id = 1; id <= m.nrnodes(); ++id) CHECK(m.node(id).coords == snap[id - 1]);
  }
}
