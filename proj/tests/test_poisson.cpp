// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "hexhp/error.hpp"
#include "support.hpp"

using namespace hexhp;
using testsupport::make_problem;
using testsupport::problem_mesh;

namespace {

// One element refined, neighbours closed, data re-applied.
Mesh irregular_mesh(const PoissonProblem& pb, int p) {
  Mesh m = problem_mesh(pb, 2, 1, 1, p);
  m.refine(1);
  for (int s : m.node(1).sons)
    if (std::abs(m.element_vertices(s)[6][0] - 0.5) < 1e-12) {
      m.refine(s);
      break;
    }
  m.close_mesh();
  update_gdof(m);
  set_dirichlet_flags(m, pb);
  apply_dirichlet(m, pb);
  return m;
}

double solve_and_error(const PoissonProblem& pb, Mesh& m, double* sigma_err = nullptr) {
  assemble_and_solve(m, element_routine(pb));
  ExactError e = compute_exact_error(pb, m);
  if (sigma_err) *sigma_err = e.h1;
  return pb.kind == ProblemKind::Ultraweak ? e.l2 : std::max(e.l2, e.h1);
}

double trace_value(const Mesh& m, int mdle, int attr, const Vec3& xi, int normal_axis) {
  ModifiedElement me = modified_element(m, mdle);
  Eigen::VectorXd c = local_values(m, me, attr);
  Space s = m.physics().attrs[attr].space;
  ShapeSet sh = shape_functions(s, xi, m.element_order(mdle));
  double v = 0.0;
  for (int k = 0; k < c.size(); ++k) v += c[k] * (s == Space::H1 ? sh.value[k] : sh.vec[k][normal_axis]);
  return v;
}

}  // namespace

TEST_SUITE("poisson") {
  TEST_CASE("manufactured solutions satisfy the equation") {
    const double h = 1e-4;
    for (auto k : {SolutionKind::Smooth, SolutionKind::Linear, SolutionKind::Quadratic,
                   SolutionKind::BoundaryLayer}) {
      ManufacturedSolution s;
      s.kind = k;
      for (int t = 0; t < 20; ++t) {
        Vec3 x = testsupport::random_point();
        double lap = 0.0;
        Vec3 g;
        for (int d = 0; d < 3; ++d) {
          Vec3 e = Vec3::Zero();
          e[d] = h;
          lap += (s.u(x + e) - 2 * s.u(x) + s.u(x - e)) / (h * h);
          g[d] = (s.u(x + 0.1 * e) - s.u(x - 0.1 * e)) / (0.2 * h);
        }
        CHECK(std::abs(-lap - s.f(x)) < 1e-5 * std::max(1.0, std::abs(s.f(x))));
        CHECK((g - s.grad(x)).norm() < 1e-6 * std::max(1.0, g.norm()));
      }
    }
    ManufacturedSolution lin{SolutionKind::Linear};
    CHECK(lin.f(Vec3(0.3, 0.2, 0.1)) == 0.0);
    ManufacturedSolution quad{SolutionKind::Quadratic};
    CHECK(quad.f(Vec3(0.3, 0.2, 0.1)) == -6.0);
    ManufacturedSolution sm{SolutionKind::Smooth};
    Vec3 x(0.3, 0.7, 0.2);
    CHECK(sm.f(x) == doctest::Approx(3 * std::numbers::pi * std::numbers::pi * sm.u(x)));
    PoissonProblem pb;
    pb.exact = false;
    CHECK(pb.source(x) == 0.0);
  }

  TEST_CASE("Galerkin element matrices on the unit cube") {
    auto pb = make_problem(ProblemKind::Galerkin, SolutionKind::Quadratic);
    Mesh m = testsupport::box_mesh(ProblemKind::Galerkin, 1, 1, 1, 1);
    AlocBloc ab;
    ab.reset({8});
    elem_galerkin(pb, m, 1, ab);
    CHECK(ab.itest[0] == 1);
    CHECK(ab.itrial[0] == 1);
    const auto& K = ab.block(0, 0);
    REQUIRE(K.rows() == 8);
    for (int i = 0; i < 8; ++i) {
      CHECK(std::abs(K.row(i).sum()) < 1e-13);
      CHECK(K(i, i) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
      // f = -6: each load entry is -6 times the integral 1/8
      CHECK(ab.bloc[0][i] == doctest::Approx(-6.0 / 8.0).epsilon(1e-13));
    }
    CHECK((K - K.transpose()).norm() < 1e-12);
  }

  TEST_CASE("condensed DPG blocks are symmetric") {
    for (auto k : {ProblemKind::Primal, ProblemKind::Ultraweak}) {
      auto pb = make_problem(k, SolutionKind::Smooth);
      Mesh m = problem_mesh(pb, 1, 1, 1, 2);
      ModifiedElement me = modified_element(m, 1);
      std::vector<int> sizes;
      for (const auto& b : me.attrs) sizes.push_back(b.nloc);
      AlocBloc ab;
      ab.reset(sizes);
      element_routine(pb)(m, 1, ab);
      for (int i = 0; i < ab.nattr; ++i)
        for (int j = 0; j < ab.nattr; ++j) {
          CHECK(ab.itest[i] == 1);
          CHECK((ab.block(i, j) - ab.block(j, i).transpose()).norm() <= 1e-12 * (1 + ab.block(i, j).norm()));
        }
    }
  }

  TEST_CASE("ultraweak test space size") {
    auto pb = make_problem(ProblemKind::Ultraweak, SolutionKind::Smooth, 1);
    Mesh m = problem_mesh(pb, 1, 1, 1, 2);
    DpgLocal loc = dpg_local_system(pb, m, 1);
    CHECK(loc.sys.ntest == 172);
    CHECK(loc.sys.ntest == dof_count(Space::H1, OrderTriple::iso(3)) + dof_count(Space::HDiv, OrderTriple::iso(3)));
    CHECK_THROWS_AS(dpg_local_system(make_problem(ProblemKind::Galerkin, SolutionKind::Smooth), m, 1), Error);
  }

  TEST_CASE("Gram matrices are positive definite on distorted elements") {
    for (int p = 1; p <= 3; ++p)
      for (int t = 0; t < 3; ++t) {
        GeometryInput g = box_geometry(1, 1, 1);
        for (auto& x : g.points) x += 0.1 * Vec3(testsupport::uniform(-1, 1), testsupport::uniform(-1, 1), testsupport::uniform(-1, 1));
        for (auto k : {ProblemKind::Primal, ProblemKind::Ultraweak}) {
          auto pb = make_problem(k, SolutionKind::Smooth, 1);
          Mesh m(g, default_physics(k), OrderTriple::iso(p));
          DpgLocal loc = dpg_local_system(pb, m, 1);
          CHECK_NOTHROW(packed_cholesky(loc.sys.gram));
        }
      }
  }

  TEST_CASE("linear patch tests") {
    for (auto k : {ProblemKind::Galerkin, ProblemKind::Primal, ProblemKind::Ultraweak}) {
      CAPTURE(problem_name(k));
      auto pb = make_problem(k, SolutionKind::Linear);
      const int p = k == ProblemKind::Ultraweak ? 2 : 1;
      Mesh one = problem_mesh(pb, 1, 1, 1, p);
      double s1 = 0.0, s2 = 0.0;
      CHECK(solve_and_error(pb, one, &s1) < 1e-9);
      Mesh irr = irregular_mesh(pb, p);
      CHECK(solve_and_error(pb, irr, &s2) < 1e-9);
      if (k == ProblemKind::Ultraweak) {
        CHECK(s1 < 1e-9);
        CHECK(s2 < 1e-9);
      }
      if (k != ProblemKind::Galerkin)
        for (int mdle : irr.traverse_active()) CHECK(elem_residual(pb, irr, mdle) <= 1e-12);
    }
  }

  TEST_CASE("ultraweak traces of the linear solution") {
    auto pb = make_problem(ProblemKind::Ultraweak, SolutionKind::Linear);
    Mesh m = problem_mesh(pb, 1, 1, 1, 2);
    assemble_and_solve(m, element_routine(pb));
    for (int t = 0; t < 10; ++t) {
      double a = testsupport::uniform(), b = testsupport::uniform();
      for (double side : {0.0, 1.0}) {
        Vec3 xi(side, a, b);
        CHECK(trace_value(m, 1, 0, xi, 0) == doctest::Approx(side).epsilon(1e-9));
        // flux along +x: outward +1 on x = 1, -1 on x = 0
        CHECK(trace_value(m, 1, 1, xi, 0) == doctest::Approx(1.0).epsilon(1e-9));
        Vec3 yi(a, side, b);
        CHECK(std::abs(trace_value(m, 1, 1, yi, 1)) < 1e-9);
        CHECK(trace_value(m, 1, 0, yi, 1) == doctest::Approx(a).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("lowest-order ultraweak field is piecewise constant") {
    // the field space at order one holds constants only: u = x is projected
    // while the gradient is still recovered exactly
    auto pb = make_problem(ProblemKind::Ultraweak, SolutionKind::Linear);
    Mesh m = problem_mesh(pb, 1, 1, 1, 1);
    double sigma = 0.0;
    double l2 = solve_and_error(pb, m, &sigma);
    CHECK(sigma < 1e-9);
    CHECK(l2 == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-9));
  }

  TEST_CASE("residual is defined for DPG problems only") {
    auto gal = make_problem(ProblemKind::Galerkin, SolutionKind::Smooth);
    Mesh m = problem_mesh(gal, 1, 1, 1, 1);
    assemble_and_solve(m, element_routine(gal));
    try {
      elem_residual(gal, m, 1);
      FAIL("expected an unsupported error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Unsupported);
    }
  }

  TEST_CASE("global residual decreases under h-refinement") {
    auto pb = make_problem(ProblemKind::Primal, SolutionKind::Smooth);
    Mesh m = problem_mesh(pb, 1, 1, 1, 1);
    double prev = INFINITY;
    for (int step = 0; step < 3; ++step) {
      assemble_and_solve(m, element_routine(pb));
      double r = 0.0;
      for (int mdle : m.traverse_active()) {
        double e = elem_residual(pb, m, mdle);
        CHECK(e >= 0.0);
        r += e;
      }
      CHECK(r < prev);
      prev = r;
      m.global_refinement(GlobalRefinement::HRef);
      update_gdof(m);
      set_dirichlet_flags(m, pb);
      apply_dirichlet(m, pb);
    }
  }

  TEST_CASE("exact error of the zero solution is the norm of u") {
    auto pb = make_problem(ProblemKind::Galerkin, SolutionKind::Smooth);
    Mesh m = testsupport::box_mesh(ProblemKind::Galerkin, 4, 4, 4, 4);
    m.set_solved(true);
    ExactError e = compute_exact_error(pb, m);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(e.l2 == doctest::Approx(std::sqrt(1.0 / 8.0)).epsilon(1e-8));
    CHECK(e.h1 == doctest::Approx(std::sqrt(3.0 * pi2 / 8.0)).epsilon(1e-8));
    CHECK(e.elem_h1_sq.size() == 64);
    pb.exact = false;
    CHECK_THROWS_AS(compute_exact_error(pb, m), Error);
  }

  TEST_CASE("halving the mesh halves the H1 error at order one") {
    auto pb = make_problem(ProblemKind::Galerkin, SolutionKind::Smooth);
    double err[2];
    for (int i = 0; i < 2; ++i) {
      Mesh m = problem_mesh(pb, 2 << i, 2 << i, 2 << i, 1);
      assemble_and_solve(m, element_routine(pb));
      err[i] = compute_exact_error(pb, m).h1;
    }
    CHECK(err[0] / err[1] > 1.8);
    CHECK(err[0] / err[1] < 2.2);
  }

  TEST_CASE("unflagged blocks are never read") {
    std::istringstream in("1000 MAXNODS\n2 NR_PHYSA\nfield contin 1\naux contin 1\n");
    PhysicsTable t = parse_physics(in);
    t.attrs[1].enabled = false;
    auto pb = make_problem(ProblemKind::Galerkin, SolutionKind::Smooth);
    auto run = [&](bool poison) {
      Mesh m(box_geometry(2, 1, 1), t, OrderTriple::iso(2));
      m.set_bcond(0, 0, 0, 1);
      apply_dirichlet(m, pb);
      SolverOptions o;
      o.keep_system = true;
      o.workers = 1;
      return assemble_and_solve(m, [&](const Mesh& mesh, int mdle, AlocBloc& ab) {
        elem_galerkin(pb, mesh, mdle, ab);
        if (poison) {
          ab.block(0, 1).setConstant(NAN);
          ab.block(1, 0).setConstant(NAN);
          ab.block(1, 1).setConstant(NAN);
          ab.bloc[1].setConstant(NAN);
        }
      });
    };
    auto clean = run(false), dirty = run(true);
    CHECK(Eigen::MatrixXd(clean.system.A) == Eigen::MatrixXd(dirty.system.A));
    CHECK(clean.x == dirty.x);
  }

  TEST_CASE("toggling an attribute leaves the system unchanged") {
    auto pb = make_problem(ProblemKind::Ultraweak, SolutionKind::Smooth);
    Mesh m = problem_mesh(pb, 2, 1, 1, 2);
    SolverOptions o;
    o.keep_system = true;
    o.workers = 1;
    auto a = assemble_and_solve(m, element_routine(pb), o);
    const int full = count_global_dofs(m, false);
    m.physics().attrs[3].enabled = false;
    CHECK(count_global_dofs(m, false) < full);
    m.physics().attrs[3].enabled = true;
    auto b = assemble_and_solve(m, element_routine(pb), o);
    CHECK(Eigen::MatrixXd(a.system.A) == Eigen::MatrixXd(b.system.A));
    CHECK(a.system.b == b.system.b);
  }
}
