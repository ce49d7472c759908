// SPDX-License-Identifier: Apache-2.0
#include "hexhp/conformity.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <unordered_map>

#include "hexhp/error.hpp"
#include "hexhp/geometry.hpp"

namespace hexhp {

namespace {

struct Term {
  int node;
  int k;  // scalar function index within the node
  double c;
};
using Row = std::vector<Term>;

int entity_order_code(const ElementOrder& o, int ent) {
  switch (entity_kind(ent)) {
    case EntityKind::Vertex: return 0;
    case EntityKind::Edge: return o.edge[ent - 8];
    case EntityKind::Face: return 10 * o.face[ent - 20][0] + o.face[ent - 20][1];
    case EntityKind::Middle: return o.middle.encode();
  }
  return 0;
}

// Sample points of an entity of the master cube together with the trace
// components that have to match there.
std::vector<Vec3> entity_samples(int ent, int n) {
  std::vector<Vec3> pts;
  switch (entity_kind(ent)) {
    case EntityKind::Vertex: {
      const auto& v = vertex_coords(ent);
      pts.emplace_back(v[0], v[1], v[2]);
      break;
    }
    case EntityKind::Edge: {
      std::vector<double> x, w;
      gauss_legendre(n, x, w);
      for (double t : x) pts.push_back(edge_param(ent - 8, t));
      break;
    }
    case EntityKind::Face: {
      auto q = gauss_quadrature_2d(n, n);
      for (const auto& t : q.points) pts.push_back(face_param(ent - 20, t).xi);
      break;
    }
    case EntityKind::Middle: fail(ErrorCode::Contract, "middle entities carry no constraints");
  }
  return pts;
}

std::vector<int> trace_components(Space s, int ent) {
  switch (s) {
    case Space::H1: return {0};
    case Space::HCurl:
      if (entity_kind(ent) == EntityKind::Edge) return {edge_axis(ent - 8)};
      if (entity_kind(ent) == EntityKind::Face) {
        auto ax = face_axes(ent - 20);
        return {ax[0], ax[1]};
      }
      return {};
    case Space::HDiv:
      if (entity_kind(ent) == EntityKind::Face) return {face_normal_axis(ent - 20)};
      return {};
    case Space::L2: return {};
  }
  return {};
}

double trace_value(Space s, const ShapeSet& set, int k, int comp) {
  return s == Space::H1 ? set.value[k] : set.vec[k][comp];
}

// Son fields expressed in father master coordinates: covariant fields double,
// fluxes scale with the face area ratio.
double son_scale(Space s) {
  switch (s) {
    case Space::HCurl: return 2.0;
    case Space::HDiv: return 4.0;
    default: return 1.0;
  }
}

Eigen::MatrixXd compute_constraint(Space s, int j, int oct, int i, const ElementOrder& oA,
                                   const ElementOrder& oC) {
  auto clA = entity_closure(j);
  auto clC = entity_closure(i);
  auto offA = entity_offsets(s, oA);
  auto offC = entity_offsets(s, oC);
  std::vector<int> colsA, colsC;
  int ibeg = -1, iend = -1;
  int qmax = 1;
  for (int e : clA) {
    for (int k = offA[e]; k < offA[e + 1]; ++k) colsA.push_back(k);
    for (int d = 0; d < 3; ++d) qmax = std::max(qmax, entity_order(oA, e, d));
  }
  for (int e : clC) {
    if (e == i) ibeg = static_cast<int>(colsC.size());
    for (int k = offC[e]; k < offC[e + 1]; ++k) colsC.push_back(k);
    if (e == i) iend = static_cast<int>(colsC.size());
    for (int d = 0; d < 3; ++d) qmax = std::max(qmax, entity_order(oC, e, d));
  }
  auto comps = trace_components(s, i);
  auto pts = entity_samples(i, qmax + 2);
  const int nr = static_cast<int>(pts.size() * comps.size());
  Eigen::MatrixXd Mc(nr, colsC.size()), Mp(nr, colsA.size());
  const auto& vo = vertex_coords(oct);
  const Vec3 shift(vo[0], vo[1], vo[2]);
  const double scale = son_scale(s);
  ShapeSet sc, sp;
  int r = 0;
  for (const auto& xc : pts) {
    shape_functions(s, xc, oC, sc);
    shape_functions(s, Vec3((shift + xc) / 2.0), oA, sp);
    for (int comp : comps) {
      for (size_t c = 0; c < colsC.size(); ++c) Mc(r, c) = scale * trace_value(s, sc, colsC[c], comp);
      for (size_t c = 0; c < colsA.size(); ++c) Mp(r, c) = trace_value(s, sp, colsA[c], comp);
      ++r;
    }
  }
  Eigen::MatrixXd X = Mc.colPivHouseholderQr().solve(Mp);
  double res = (Mc * X - Mp).norm();
  if (!(res <= 1e-10 * std::max(1.0, Mp.norm())))
    fail(ErrorCode::Numeric, "hanging-node constraint is not exact (residual " +
                                 std::to_string(res) + "); son entity order below parent order");
  Eigen::MatrixXd R = X.middleRows(ibeg, iend - ibeg);
  for (Eigen::Index a = 0; a < R.size(); ++a)
    if (std::abs(R.data()[a]) < 1e-14) R.data()[a] = 0.0;
  return R;
}

std::mutex g_cache_mutex;
std::map<std::vector<int>, Eigen::MatrixXd> g_cache;

std::vector<Row> expand_entity(const Mesh& m, Space s, int elem, int ent, const ElementOrder& o,
                               int depth) {
  const int N = m.element_nodes(elem)[ent];
  const int n = entity_dof_count(s, ent, o);
  std::vector<Row> rows(n);
  if (n == 0) return rows;
  const int P = ent == kMiddle ? 0 : m.constraining_parent(N);
  if (P == 0) {
    if (ent != kMiddle && m.multiply_constrained(N))
      fail(ErrorCode::Irregular, "node " + std::to_string(N) + " of element " +
                                     std::to_string(elem) + " is 2-irregular; close the mesh");
    for (int k = 0; k < n; ++k) rows[k].push_back({N, k, 1.0});
    return rows;
  }
  if (m.multiply_constrained(N) || depth > 3)
    fail(ErrorCode::Irregular, "node " + std::to_string(N) + " of element " + std::to_string(elem) +
                                   " is 2-irregular; close the mesh");
  const int A = m.father_element(elem);
  const int oct = m.octant(elem);
  const int j = parent_entity_index(oct, ent);
  if (A == 0 || m.element_nodes(A)[j] != P)
    fail(ErrorCode::Contract, "constraint bookkeeping mismatch at node " + std::to_string(N));
  const ElementOrder oA = m.element_order(A);
  const Eigen::MatrixXd& R = constraint_coefficients(s, j, oct, ent, oA, o);
  int col = 0;
  for (int jj : entity_closure(j)) {
    int nj = entity_dof_count(s, jj, oA);
    if (nj == 0) continue;
    auto sub = expand_entity(m, s, A, jj, oA, depth + 1);
    for (int r = 0; r < n; ++r)
      for (int q = 0; q < nj; ++q) {
        double c = R(r, col + q);
        if (c == 0.0) continue;
        for (const auto& t : sub[q]) rows[r].push_back({t.node, t.k, c * t.c});
      }
    col += nj;
  }
  for (auto& row : rows) {
    std::sort(row.begin(), row.end(),
              [](const Term& a, const Term& b) { return a.node != b.node ? a.node < b.node : a.k < b.k; });
    Row merged;
    for (const auto& t : row) {
      if (!merged.empty() && merged.back().node == t.node && merged.back().k == t.k)
        merged.back().c += t.c;
      else
        merged.push_back(t);
    }
    row.clear();
    for (const auto& t : merged)
      if (std::abs(t.c) > 1e-14) row.push_back(t);
  }
  return rows;
}

}  // namespace

int parent_entity_index(int octant, int ent) {
  const auto& vo = vertex_coords(octant);
  const auto& c = entity_code(ent);
  int m[3];
  for (int d = 0; d < 3; ++d) {
    int p = 2 * static_cast<int>(vo[d]) + c[d];
    m[d] = p == 0 ? 0 : (p == 4 ? 2 : 1);
  }
  return entity_from_code(m[0], m[1], m[2]);
}

const Eigen::MatrixXd& constraint_coefficients(Space s, int j, int oct, int i,
                                               const ElementOrder& oA, const ElementOrder& oC) {
  if (s == Space::L2) fail(ErrorCode::Unsupported, "L2 functions carry no constraints");
  if (oct < 0 || oct > 7 || i < 0 || i >= kMiddle || j < 0 || j >= kMiddle)
    fail(ErrorCode::Unsupported, "unsupported constraint case");
  if (parent_entity_index(oct, i) != j)
    fail(ErrorCode::Unsupported, "son entity does not lie on the given parent entity");
  std::vector<int> key{static_cast<int>(s), j, oct, i};
  for (int e : entity_closure(j)) key.push_back(entity_order_code(oA, e));
  for (int e : entity_closure(i)) key.push_back(entity_order_code(oC, e));
  {
    std::lock_guard<std::mutex> lk(g_cache_mutex);
    auto it = g_cache.find(key);
    if (it != g_cache.end()) return it->second;
  }
  Eigen::MatrixXd R = compute_constraint(s, j, oct, i, oA, oC);
  std::lock_guard<std::mutex> lk(g_cache_mutex);
  return g_cache.emplace(std::move(key), std::move(R)).first->second;
}

int local_dof_count(const PhysicsAttr& a, const ElementOrder& o) {
  auto off = entity_offsets(a.space, o);
  return (a.is_trace ? off[kMiddle] : off[kNumEntities]) * a.ncomp;
}

ModifiedElement modified_element(const Mesh& mesh, int mdle) {
  const auto& ph = mesh.physics();
  ModifiedElement me;
  me.mdle = mdle;
  me.order = mesh.element_order(mdle);
  if (!mesh.node(mdle).sons.empty())
    fail(ErrorCode::State, "modified_element: element " + std::to_string(mdle) + " is not active");

  std::map<Space, std::vector<std::vector<Row>>> by_space;
  for (const auto& at : ph.attrs) {
    if (by_space.count(at.space)) continue;
    std::vector<std::vector<Row>> ents(kNumEntities);
    for (int e = 0; e < kNumEntities; ++e) ents[e] = expand_entity(mesh, at.space, mdle, e, me.order, 0);
    by_space.emplace(at.space, std::move(ents));
  }
  std::vector<int> nodes;
  for (const auto& [s, ents] : by_space)
    for (const auto& rows : ents)
      for (const auto& row : rows)
        for (const auto& t : row) nodes.push_back(t.node);
  // Constrained nodes of the element carry no independent dofs.
  for (int id : mesh.element_nodes(mdle))
    if (id == mdle || mesh.constraining_parent(id) == 0) nodes.push_back(id);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  me.nodes = nodes;
  std::unordered_map<int, int> pos;
  for (size_t i = 0; i < nodes.size(); ++i) pos[nodes[i]] = static_cast<int>(i);

  for (int a = 0; a < ph.nr_physa(); ++a) {
    const auto& at = ph.attrs[a];
    ModifiedElement::Block b;
    b.space = at.space;
    b.ncomp = at.ncomp;
    const int nc = at.ncomp;
    b.node_offset.assign(nodes.size() + 1, 0);
    for (size_t i = 0; i < nodes.size(); ++i)
      b.node_offset[i + 1] = b.node_offset[i] + mesh.node_attr_dofs(nodes[i], a);
    b.nmod = b.node_offset.back();
    b.nloc = local_dof_count(at, me.order);
    b.C = Eigen::MatrixXd::Zero(b.nloc, b.nmod);
    const auto& ents = by_space.at(at.space);
    const int nent = at.is_trace ? kMiddle : kNumEntities;
    int l = 0;
    for (int e = 0; e < nent; ++e)
      for (const auto& row : ents[e]) {
        for (const auto& t : row) {
          int base = b.node_offset[pos.at(t.node)];
          for (int c = 0; c < nc; ++c) b.C(l * nc + c, base + t.k * nc + c) = t.c;
        }
        ++l;
      }
    if (l * nc != b.nloc) fail(ErrorCode::Contract, "modified element row count mismatch");
    b.dirichlet.assign(b.nmod, 0);
    b.bubble.assign(b.nmod, 0);
    const int c0 = ph.comp_offset(a);
    for (size_t i = 0; i < nodes.size(); ++i) {
      const Node& nd = mesh.node(nodes[i]);
      for (int d = b.node_offset[i]; d < b.node_offset[i + 1]; ++d) {
        int c = (d - b.node_offset[i]) % nc;
        if (nd.kind == EntityKind::Middle) {
          b.bubble[d] = nodes[i] == mdle && !at.is_trace;
        } else if (at.space == Space::H1 && nd.bcond[c0 + c] == 1) {
          b.dirichlet[d] = 1;
        }
      }
    }
    me.attrs.push_back(std::move(b));
  }
  return me;
}

Eigen::VectorXd modified_values(const Mesh& mesh, const ModifiedElement& me, int a) {
  const auto& b = me.attrs.at(a);
  Eigen::VectorXd v(b.nmod);
  for (size_t i = 0; i < me.nodes.size(); ++i) {
    const auto& d = mesh.node(me.nodes[i]).dofs.at(a);
    int n = b.node_offset[i + 1] - b.node_offset[i];
    if (static_cast<int>(d.size()) != n)
      fail(ErrorCode::Contract, "node " + std::to_string(me.nodes[i]) + " dof storage size mismatch");
    for (int k = 0; k < n; ++k) v[b.node_offset[i] + k] = d[k];
  }
  return v;
}

Eigen::VectorXd local_values(const Mesh& mesh, const ModifiedElement& me, int a) {
  return me.attrs.at(a).C * modified_values(mesh, me, a);
}

Eigen::VectorXd gather_solution(const Mesh& mesh, int mdle, int a) {
  if (!mesh.solved()) fail(ErrorCode::State, "gather_solution: mesh has no current solution");
  if (a < 0 || a >= mesh.physics().nr_physa())
    fail(ErrorCode::Contract, "gather_solution: attribute index out of range");
  return local_values(mesh, modified_element(mesh, mdle), a);
}

namespace {

// Seminorm projection of (data - lift) onto the bubbles of one edge or face
// entity, in the entity's parameter space.
std::vector<double> project_entity(const Mesh& mesh, int mdle, int ent, int a, int comp,
                                   const DirichletFn& fn) {
  const auto& at = mesh.physics().attrs[a];
  const int nc = at.ncomp;
  ModifiedElement me = modified_element(mesh, mdle);
  const auto& b = me.attrs[a];
  const int N = mesh.element_nodes(mdle)[ent];
  Eigen::VectorXd mod = modified_values(mesh, me, a);
  auto it = std::find(me.nodes.begin(), me.nodes.end(), N);
  int ni = static_cast<int>(it - me.nodes.begin());
  for (int d = b.node_offset[ni]; d < b.node_offset[ni + 1]; ++d) mod[d] = 0.0;
  Eigen::VectorXd loc = b.C * mod;

  const ElementOrder& o = me.order;
  auto off = entity_offsets(Space::H1, o);
  const int nb = off[ent + 1] - off[ent];
  const VertexCoords xnod = mesh.element_vertices(mdle);
  const bool edge = entity_kind(ent) == EntityKind::Edge;
  int p = edge ? o.edge[ent - 8] : std::max(o.face[ent - 20][0], o.face[ent - 20][1]);
  const int nq = p + 2;

  std::vector<Vec3> xis;
  std::vector<Mat32> dts;
  std::vector<double> ws;
  if (edge) {
    std::vector<double> x, w;
    gauss_legendre(nq, x, w);
    for (size_t q = 0; q < x.size(); ++q) {
      xis.push_back(edge_param(ent - 8, x[q]));
      Mat32 d = Mat32::Zero();
      d(edge_axis(ent - 8), 0) = 1.0;
      dts.push_back(d);
      ws.push_back(w[q]);
    }
  } else {
    auto rule = gauss_quadrature_2d(nq, nq);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      auto fp = face_param(ent - 20, rule.points[q]);
      xis.push_back(fp.xi);
      dts.push_back(fp.dxidt);
      ws.push_back(rule.weights[q]);
    }
  }
  const int nt = edge ? 1 : 2;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nb, nb);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(nb);
  ShapeSet sh;
  for (size_t q = 0; q < xis.size(); ++q) {
    shape_functions(Space::H1, xis[q], o, sh);
    GeometryData gd = element_geometry(xnod, xis[q]);
    double u;
    Vec3 g;
    fn(gd.x, a, comp, u, g);
    for (int t = 0; t < nt; ++t) {
      Vec3 dxi = dts[q].col(t);
      double du = g.dot(gd.dxdxi * dxi);
      double dl = 0.0;
      for (int k = 0; k < static_cast<int>(loc.size() / nc); ++k) dl += loc[k * nc + comp] * sh.deriv[k].dot(dxi);
      for (int k = 0; k < nb; ++k) {
        double dk = sh.deriv[off[ent] + k].dot(dxi);
        r[k] += ws[q] * dk * (du - dl);
        for (int l = 0; l < nb; ++l) M(k, l) += ws[q] * dk * sh.deriv[off[ent] + l].dot(dxi);
      }
    }
  }
  Eigen::VectorXd c = M.ldlt().solve(r);
  return std::vector<double>(c.data(), c.data() + c.size());
}

}  // namespace

void update_Ddof(Mesh& mesh, const DirichletFn& fn) {
  const auto& ph = mesh.physics();
  for (int id = 1; id <= mesh.nrnodes(); ++id) {
    const Node& nd = mesh.node(id);
    for (int a = 0; a < ph.nr_physa(); ++a) {
      if (ph.attrs[a].space == Space::H1) continue;
      for (int c = 0; c < ph.attrs[a].ncomp; ++c)
        if (nd.bcond[ph.comp_offset(a) + c] == 1)
          fail(ErrorCode::Unsupported, "Dirichlet data for attribute '" + ph.attrs[a].nickname +
                                           "' (" + space_name(ph.attrs[a].space) +
                                           ") is not supported");
    }
  }
  std::unordered_map<int, std::pair<int, int>> owner;
  const auto& order = mesh.traverse_active();
  for (int m : order) {
    const auto& en = mesh.element_nodes(m);
    for (int e = 0; e < kMiddle; ++e) owner.emplace(en[e], std::pair{m, e});
  }
  for (EntityKind kind : {EntityKind::Vertex, EntityKind::Edge, EntityKind::Face}) {
    for (int id = 1; id <= mesh.nrnodes(); ++id) {
      const Node& nd = mesh.node(id);
      if (nd.kind != kind || !nd.active || mesh.constraining_parent(id)) continue;
      auto ow = owner.find(id);
      if (ow == owner.end()) continue;
      for (int a = 0; a < ph.nr_physa(); ++a) {
        const auto& at = ph.attrs[a];
        if (at.space != Space::H1) continue;
        const int nc = at.ncomp;
        for (int c = 0; c < nc; ++c) {
          if (nd.bcond[ph.comp_offset(a) + c] != 1) continue;
          auto& dofs = mesh.node(id).dofs[a];
          const int nf = static_cast<int>(dofs.size()) / nc;
          if (at.homogeneous_dirichlet) {
            for (int k = 0; k < nf; ++k) dofs[k * nc + c] = 0.0;
            continue;
          }
          if (kind == EntityKind::Vertex) {
            double u;
            Vec3 g;
            fn(nd.coords, a, c, u, g);
            dofs[c] = u;
          } else if (nf > 0) {
            auto v = project_entity(mesh, ow->second.first, ow->second.second, a, c, fn);
            auto& d2 = mesh.node(id).dofs[a];
            for (int k = 0; k < nf; ++k) d2[k * nc + c] = v[k];
          }
        }
      }
    }
  }
}

void update_gdof(Mesh& mesh) {
  for (int id = 1; id <= mesh.nrnodes(); ++id) {
    const Node& m = mesh.node(id);
    if (m.kind != EntityKind::Middle || m.sons.empty()) continue;
    const VertexCoords xf = mesh.element_vertices(id);
    for (int o = 0; o < 8; ++o) {
      const auto& vo = vertex_coords(o);
      const auto& en = mesh.node(m.sons[o]).elem_nodes;
      for (int v = 0; v < 8; ++v) {
        const auto& vv = vertex_coords(v);
        Vec3 xi((vo[0] + vv[0]) / 2.0, (vo[1] + vv[1]) / 2.0, (vo[2] + vv[2]) / 2.0);
        mesh.node(en[v]).coords = trilinear_map(xf, xi);
      }
    }
  }
}

}  // namespace hexhp
