// SPDX-License-Identifier: Apache-2.0
#include "hexhp/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "hexhp/error.hpp"

namespace hexhp {

// ------------------------------------------------------------ geometry file

namespace {

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    auto p = line.find_first_not_of(" \t\r");
    if (p != std::string::npos && line[p] != '#') return line;
  }
  fail(ErrorCode::Mesh, std::string("geometry file: unexpected end of file, expected ") + what);
}

int header_count(std::istream& in, const char* key) {
  std::istringstream ss(next_line(in, key));
  std::string k;
  int n = -1;
  if (!(ss >> k >> n) || k != key || n < 0)
    fail(ErrorCode::Mesh, std::string("geometry file: expected '") + key + " <count>'");
  return n;
}

}  // namespace

GeometryInput parse_geometry(std::istream& in) {
  GeometryInput g;
  {
    std::istringstream ss(next_line(in, "HEXMESH"));
    std::string k;
    int v = 0;
    if (!(ss >> k >> v) || k != "HEXMESH" || v != 1)
      fail(ErrorCode::Mesh, "geometry file: first line must be 'HEXMESH 1'");
  }
  int np = header_count(in, "NPOINTS");
  for (int i = 0; i < np; ++i) {
    std::istringstream ss(next_line(in, "point"));
    Vec3 x;
    if (!(ss >> x[0] >> x[1] >> x[2])) fail(ErrorCode::Mesh, "geometry file: malformed point");
    g.points.push_back(x);
  }
  int ne = header_count(in, "NELEMS");
  if (ne < 1) fail(ErrorCode::Mesh, "geometry file: at least one element required");
  for (int i = 0; i < ne; ++i) {
    std::istringstream ss(next_line(in, "element"));
    std::array<int, 8> v{};
    for (auto& p : v) {
      if (!(ss >> p)) fail(ErrorCode::Mesh, "geometry file: element needs 8 point indices");
      if (p < 1 || p > np) fail(ErrorCode::Mesh, "geometry file: point index out of range");
      --p;
    }
    g.elems.push_back(v);
  }
  std::string line;
  bool have_bfaces = false;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::string k;
    int nb = -1;
    if (!(ss >> k >> nb) || k != "NBFACES" || nb < 0)
      fail(ErrorCode::Mesh, "geometry file: expected 'NBFACES <count>'");
    for (int i = 0; i < nb; ++i) {
      std::istringstream bs(next_line(in, "boundary face"));
      int e, f, b;
      if (!(bs >> e >> f >> b)) fail(ErrorCode::Mesh, "geometry file: malformed boundary face");
      if (e < 1 || e > ne || f < 1 || f > 6 || b < 0 || b > 9)
        fail(ErrorCode::Mesh, "geometry file: boundary face entry out of range");
      g.bfaces.push_back({e - 1, f - 1, b});
    }
    have_bfaces = true;
    break;
  }
  (void)have_bfaces;
  return g;
}

GeometryInput read_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open geometry file '" + path + "'");
  return parse_geometry(in);
}

void write_geometry(std::ostream& out, const GeometryInput& g) {
  out << "HEXMESH 1\n";
  out << "NPOINTS " << g.points.size() << "\n";
  out << std::setprecision(17);
  for (const auto& p : g.points) out << p[0] << " " << p[1] << " " << p[2] << "\n";
  out << "NELEMS " << g.elems.size() << "\n";
  for (const auto& e : g.elems) {
    for (int i = 0; i < 8; ++i) out << (i ? " " : "") << e[i] + 1;
    out << "\n";
  }
  out << "NBFACES " << g.bfaces.size() << "\n";
  for (const auto& b : g.bfaces) out << b.elem + 1 << " " << b.face + 1 << " " << b.bid << "\n";
}

GeometryInput box_geometry(int nx, int ny, int nz, const Vec3& lo, const Vec3& hi) {
  if (nx < 1 || ny < 1 || nz < 1) fail(ErrorCode::Config, "box mesh needs positive divisions");
  GeometryInput g;
  auto pid = [&](int i, int j, int k) { return i + (nx + 1) * (j + (ny + 1) * k); };
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        g.points.emplace_back(lo[0] + (hi[0] - lo[0]) * i / nx, lo[1] + (hi[1] - lo[1]) * j / ny,
                              lo[2] + (hi[2] - lo[2]) * k / nz);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        g.elems.push_back({pid(i, j, k), pid(i + 1, j, k), pid(i + 1, j + 1, k), pid(i, j + 1, k),
                           pid(i, j, k + 1), pid(i + 1, j, k + 1), pid(i + 1, j + 1, k + 1),
                           pid(i, j + 1, k + 1)});
  return g;
}

// -------------------------------------------------------------------- mesh

namespace {

// Orientation class of a face: sign of (t1 x t2) relative to the positive
// master normal axis.  Shared faces must agree for normal traces to match.
int face_class(int f) {
  auto ax = face_axes(f);
  return Vec3::Unit(ax[0]).cross(Vec3::Unit(ax[1]))[face_normal_axis(f)] > 0 ? 1 : -1;
}

}  // namespace

Mesh::Mesh(const GeometryInput& geom, const PhysicsTable& physics, OrderTriple p0,
           const std::vector<BcAssignment>& bcs)
    : physics_(physics) {
  physics_.validate();
  if (p0.min() < 1 || p0.max() > kMaxP) fail(ErrorCode::Order, "initial order outside [1,MAXP]");
  const int ne = static_cast<int>(geom.elems.size());
  if (ne < 1) fail(ErrorCode::Mesh, "mesh needs at least one element");
  const int np = static_cast<int>(geom.points.size());
  for (const auto& e : geom.elems) {
    std::set<int> s(e.begin(), e.end());
    if (s.size() != 8) fail(ErrorCode::Mesh, "element with repeated vertices");
    for (int p : e)
      if (p < 0 || p >= np) fail(ErrorCode::Mesh, "element vertex index out of range");
  }
  nodes_.reserve(std::max<int>(physics_.maxnods > 0 ? std::min(physics_.maxnods, 1 << 20) : 0,
                               27 * ne));
  elems_.resize(ne);
  for (int i = 0; i < ne; ++i) new_node(EntityKind::Middle, p0.encode(), 0);

  std::vector<int> vnode(np, 0);
  struct EdgeRec {
    int id, a, b;
  };
  struct FaceRec {
    int id;
    std::array<int, 4> seq;
    int cls;
    int elem, face;
  };
  std::map<std::pair<int, int>, EdgeRec> edges;
  std::map<std::array<int, 4>, FaceRec> faces;
  std::map<std::array<int, 3>, int> triples;

  for (int iel = 0; iel < ne; ++iel) {
    const auto& pts = geom.elems[iel];
    VertexCoords xnod;
    for (int v = 0; v < 8; ++v) xnod[v] = geom.points[pts[v]];
    for (int v = 0; v < 8; ++v) element_geometry(xnod, Vec3(vertex_coords(v).data()));
    element_geometry(xnod, Vec3(0.5, 0.5, 0.5));

    auto& el = elems_[iel];
    el.neighbors.fill(0);
    el.boundary_id.fill(-1);
    el.nodes[kMiddle] = iel + 1;
    for (int v = 0; v < 8; ++v) {
      int& id = vnode[pts[v]];
      if (id == 0) {
        id = new_node(EntityKind::Vertex, 0, 0);
        nodes_[id - 1].coords = geom.points[pts[v]];
      }
      el.nodes[v] = id;
    }
    for (int e = 0; e < 12; ++e) {
      auto ev = edge_vertices(e);
      int a = pts[ev[0]], b = pts[ev[1]];
      auto key = std::minmax(a, b);
      auto it = edges.find({key.first, key.second});
      if (it == edges.end()) {
        int id = new_node(EntityKind::Edge, p0[edge_axis(e)], 0);
        it = edges.emplace(std::pair{key.first, key.second}, EdgeRec{id, a, b}).first;
      } else if (it->second.a != a || it->second.b != b) {
        fail(ErrorCode::Unsupported, "element " + std::to_string(iel + 1) +
                                         ": edge orientation differs from its neighbor "
                                         "(only orientation 0 is supported)");
      }
      el.nodes[8 + e] = it->second.id;
    }
    for (int f = 0; f < 6; ++f) {
      auto fv = face_vertices(f);
      std::array<int, 4> seq{pts[fv[0]], pts[fv[1]], pts[fv[2]], pts[fv[3]]};
      std::array<int, 4> key = seq;
      std::sort(key.begin(), key.end());
      auto it = faces.find(key);
      if (it == faces.end()) {
        auto ax = face_axes(f);
        int id = new_node(EntityKind::Face, 10 * p0[ax[0]] + p0[ax[1]], 0);
        it = faces.emplace(key, FaceRec{id, seq, face_class(f), iel, f}).first;
        for (int skip = 0; skip < 4; ++skip) {
          std::array<int, 3> t{};
          for (int i = 0, k = 0; i < 4; ++i)
            if (i != skip) t[k++] = key[i];
          auto [tt, inserted] = triples.emplace(t, id);
          if (!inserted && tt->second != id)
            fail(ErrorCode::Mesh, "inconsistent connectivity: faces share three vertices");
        }
      } else {
        auto& rec = it->second;
        if (rec.elem < 0)
          fail(ErrorCode::Mesh, "a face is shared by more than two elements");
        if (rec.seq != seq || rec.cls != face_class(f))
          fail(ErrorCode::Unsupported, "element " + std::to_string(iel + 1) +
                                           ": face orientation differs from its neighbor "
                                           "(only orientation 0 is supported)");
        el.neighbors[f] = rec.elem + 1;
        elems_[rec.elem].neighbors[rec.face] = iel + 1;
        rec.elem = -1;
      }
      el.nodes[20 + f] = it->second.id;
    }
    nodes_[iel].elem_nodes = el.nodes;
  }

  for (auto& el : elems_) {
    for (int f = 0; f < 6; ++f)
      if (el.neighbors[f] == 0) el.boundary_id[f] = 0;
    el.bcond.assign(physics_.nrindex(), 0);
    el.phys = (1u << physics_.nr_physa()) - 1u;
  }
  for (const auto& b : geom.bfaces) {
    if (b.elem < 0 || b.elem >= ne || b.face < 0 || b.face > 5)
      fail(ErrorCode::Mesh, "boundary face entry out of range");
    if (elems_[b.elem].neighbors[b.face] != 0)
      fail(ErrorCode::Mesh, "boundary id assigned to an interior face");
    elems_[b.elem].boundary_id[b.face] = b.bid;
  }
  for (int i = 0; i < nrnodes(); ++i) nodes_[i].case_mask = (1u << physics_.nr_physa()) - 1u;
  for (const auto& bc : bcs) {
    for (auto& el : elems_) {
      if (bc.attr < 0 || bc.attr >= physics_.nr_physa() || bc.comp < 0 ||
          bc.comp >= physics_.attrs[bc.attr].ncomp || bc.flag < 0 || bc.flag > 9)
        fail(ErrorCode::Config, "invalid boundary condition assignment");
      int c = physics_.comp_offset(bc.attr) + bc.comp;
      auto digits = decode_bc(el.bcond[c]);
      for (int f = 0; f < 6; ++f)
        if (el.neighbors[f] == 0 && el.boundary_id[f] == bc.boundary_id) digits[f] = bc.flag;
      el.bcond[c] = encode_bc(digits);
    }
  }
  derive_node_masks();
  update();
}

const InitialElement& Mesh::initial_element(int iel) const {
  if (iel < 1 || iel > nrelis()) fail(ErrorCode::Contract, "initial element id out of range");
  return elems_[iel - 1];
}

const Node& Mesh::node(int id) const {
  if (id < 1 || id > nrnodes()) fail(ErrorCode::Contract, "node id " + std::to_string(id) + " out of range");
  return nodes_[id - 1];
}

Node& Mesh::node(int id) {
  if (id < 1 || id > nrnodes()) fail(ErrorCode::Contract, "node id " + std::to_string(id) + " out of range");
  return nodes_[id - 1];
}

bool Mesh::is_middle(int id) const { return node(id).kind == EntityKind::Middle; }

int Mesh::node_attr_dofs(int id, int a) const {
  const Node& nd = node(id);
  const auto& at = physics_.attrs[a];
  if (nd.kind == EntityKind::Middle && at.is_trace) return 0;
  return node_dof_count(at.space, nd.kind, nd.order) * at.ncomp;
}

void Mesh::allocate_dofs(int id) {
  Node& nd = node(id);
  nd.dofs.resize(physics_.nr_physa());
  for (int a = 0; a < physics_.nr_physa(); ++a) nd.dofs[a].assign(node_attr_dofs(id, a), 0.0);
}

int Mesh::new_node(EntityKind kind, int order, int father) {
  if (!warned_capacity_ && physics_.maxnods > 0 && nrnodes() >= physics_.maxnods) {
    std::fprintf(stderr, "warning: node table exceeds MAXNODS=%d, growing\n", physics_.maxnods);
    warned_capacity_ = true;
  }
  Node nd;
  nd.kind = kind;
  nd.order = order;
  nd.father = father;
  nd.active = kind == EntityKind::Middle;
  nd.bcond.assign(physics_.nrindex(), 0);
  if (father) {
    const Node& fa = nodes_[father - 1];
    nd.case_mask = fa.case_mask;
    nd.level = fa.level + (fa.kind == EntityKind::Middle ? 1 : 0);
    if (fa.kind != EntityKind::Middle) nd.bcond = fa.bcond;
    if (kind == EntityKind::Middle) nd.level = fa.level + 1;
  }
  nodes_.push_back(std::move(nd));
  int id = nrnodes();
  allocate_dofs(id);
  return id;
}

void Mesh::check_active_middle(int mdle, const char* what) const {
  if (mdle < 1 || mdle > nrnodes() || !is_middle(mdle))
    fail(ErrorCode::Contract, std::string(what) + ": node " + std::to_string(mdle) +
                                  " is not a middle node");
  if (!node(mdle).sons.empty())
    fail(ErrorCode::State, std::string(what) + ": element " + std::to_string(mdle) +
                               " is not active");
}

const std::vector<int>& Mesh::traverse_active() {
  update();
  return elem_order_;
}

void Mesh::update() {
  elem_order_.clear();
  std::vector<int> stack;
  for (int iel = nrelis(); iel >= 1; --iel) stack.push_back(iel);
  while (!stack.empty()) {
    int m = stack.back();
    stack.pop_back();
    const Node& nd = nodes_[m - 1];
    if (nd.sons.empty()) {
      elem_order_.push_back(m);
    } else {
      for (auto it = nd.sons.rbegin(); it != nd.sons.rend(); ++it) stack.push_back(*it);
    }
  }
  for (auto& nd : nodes_)
    if (nd.kind != EntityKind::Middle) nd.active = false;
  for (int m : elem_order_) {
    const auto& en = nodes_[m - 1].elem_nodes;
    for (int i = 0; i < kMiddle; ++i) nodes_[en[i] - 1].active = true;
  }
}

int Mesh::get_isoref(int mdle) const {
  if (mdle < 1 || mdle > nrnodes() || !is_middle(mdle))
    fail(ErrorCode::Contract, "get_isoref: node " + std::to_string(mdle) + " is not a middle node");
  return 111;
}

void Mesh::refine(int mdle, int kref) {
  check_active_middle(mdle, "refine");
  if (kref != 111)
    fail(ErrorCode::Unsupported, "refinement flag " + std::to_string(kref) +
                                     " not supported (isotropic 111 only)");
  refine_impl(mdle);
  update();
}

void Mesh::refine_impl(int mdle) {
  const std::array<int, 27> fn = nodes_[mdle - 1].elem_nodes;
  const VertexCoords xnod = element_vertices(mdle);
  const OrderTriple pm = OrderTriple::decode(nodes_[mdle - 1].order);

  int lat[5][5][5] = {};
  auto at = [&](const std::array<int, 3>& p) -> int& { return lat[p[0]][p[1]][p[2]]; };
  auto make_vertex = [&](int father, const std::array<int, 3>& p) {
    int id = new_node(EntityKind::Vertex, 0, father);
    nodes_[id - 1].coords = trilinear_map(xnod, Vec3(p[0], p[1], p[2]) / 4.0);
    return id;
  };

  for (int ent = 0; ent < kNumEntities; ++ent) {
    auto c = entity_code(ent);
    at({2 * c[0], 2 * c[1], 2 * c[2]}) = fn[ent];
  }

  for (int e = 0; e < 12; ++e) {
    int E = fn[8 + e];
    int d = edge_axis(e);
    auto c = entity_code(8 + e);
    std::array<int, 3> base{2 * c[0], 2 * c[1], 2 * c[2]};
    auto pos = [&](int v) {
      auto p = base;
      p[d] = v;
      return p;
    };
    if (nodes_[E - 1].sons.empty()) {
      int ord = nodes_[E - 1].order;
      int h0 = new_node(EntityKind::Edge, ord, E);
      int h1 = new_node(EntityKind::Edge, ord, E);
      int mid = make_vertex(E, pos(2));
      nodes_[E - 1].sons = {h0, h1, mid};
      nodes_[E - 1].ref_kind = 1;
    }
    const auto& s = nodes_[E - 1].sons;
    at(pos(1)) = s[0];
    at(pos(3)) = s[1];
    at(pos(2)) = s[2];
  }

  for (int f = 0; f < 6; ++f) {
    int F = fn[20 + f];
    auto ax = face_axes(f);
    int n = face_normal_axis(f);
    int nv = 4 * face_side(f);
    auto pos = [&](int ta, int tb) {
      std::array<int, 3> p{};
      p[n] = nv;
      p[ax[0]] = ta;
      p[ax[1]] = tb;
      return p;
    };
    if (nodes_[F - 1].sons.empty()) {
      int ord = nodes_[F - 1].order;
      std::vector<int> s;
      for (int q = 0; q < 4; ++q) s.push_back(new_node(EntityKind::Face, ord, F));
      for (int h = 0; h < 2; ++h) s.push_back(new_node(EntityKind::Edge, ord / 10, F));
      for (int h = 0; h < 2; ++h) s.push_back(new_node(EntityKind::Edge, ord % 10, F));
      s.push_back(make_vertex(F, pos(2, 2)));
      nodes_[F - 1].sons = s;
      nodes_[F - 1].ref_kind = 11;
    }
    const auto& s = nodes_[F - 1].sons;
    at(pos(1, 1)) = s[0];
    at(pos(3, 1)) = s[1];
    at(pos(1, 3)) = s[2];
    at(pos(3, 3)) = s[3];
    at(pos(1, 2)) = s[4];
    at(pos(3, 2)) = s[5];
    at(pos(2, 1)) = s[6];
    at(pos(2, 3)) = s[7];
    at(pos(2, 2)) = s[8];
  }

  // interior of the middle node
  at({2, 2, 2}) = make_vertex(mdle, {2, 2, 2});
  for (int d = 0; d < 3; ++d)
    for (int h = 0; h < 2; ++h) {
      std::array<int, 3> p{2, 2, 2};
      p[d] = 1 + 2 * h;
      at(p) = new_node(EntityKind::Edge, pm[d], mdle);
    }
  for (int n = 2; n >= 0; --n) {
    int a = n == 0 ? 1 : 0, b = n == 2 ? 1 : 2;
    for (int jb = 0; jb < 2; ++jb)
      for (int ja = 0; ja < 2; ++ja) {
        std::array<int, 3> p{};
        p[n] = 2;
        p[a] = 1 + 2 * ja;
        p[b] = 1 + 2 * jb;
        at(p) = new_node(EntityKind::Face, 10 * pm[a] + pm[b], mdle);
      }
  }
  std::vector<int> sons;
  for (int o = 0; o < 8; ++o) {
    int id = new_node(EntityKind::Middle, pm.encode(), mdle);
    sons.push_back(id);
  }
  for (int o = 0; o < 8; ++o) {
    const auto& vo = vertex_coords(o);
    std::array<int, 3> off{2 * static_cast<int>(vo[0]), 2 * static_cast<int>(vo[1]),
                           2 * static_cast<int>(vo[2])};
    auto& en = nodes_[sons[o] - 1].elem_nodes;
    for (int ent = 0; ent < kNumEntities; ++ent) {
      auto c = entity_code(ent);
      en[ent] = at({off[0] + c[0], off[1] + c[1], off[2] + c[2]});
    }
    en[kMiddle] = sons[o];
  }
  Node& m = nodes_[mdle - 1];
  m.sons = sons;
  m.ref_kind = 111;
  m.active = false;
  solved_ = false;
  ++revision_;
}

int Mesh::constraining_parent(int id) const {
  int p = node(id).father;
  if (p == 0 || is_middle(p) || !node(p).active) return 0;
  return p;
}

bool Mesh::multiply_constrained(int id) const {
  int p = node(id).father;
  int depth = 1;
  while (p != 0 && !is_middle(p)) {
    if (depth >= 2 && node(p).active) return true;
    p = node(p).father;
    ++depth;
  }
  return false;
}

int Mesh::close_mesh() {
  update();
  int count = 0;
  for (;;) {
    std::unordered_map<int, std::vector<int>> users;
    std::set<int> coarse;
    for (int m : elem_order_) {
      const auto& en = nodes_[m - 1].elem_nodes;
      for (int i = 0; i < kMiddle; ++i) {
        int p = nodes_[en[i] - 1].father;
        int depth = 1;
        while (p != 0 && !is_middle(p)) {
          if (depth >= 2 && nodes_[p - 1].active) coarse.insert(p);
          p = nodes_[p - 1].father;
          ++depth;
        }
      }
    }
    if (coarse.empty()) break;
    std::set<int> targets;
    for (int m : elem_order_) {
      const auto& en = nodes_[m - 1].elem_nodes;
      for (int i = 0; i < kMiddle; ++i)
        if (coarse.count(en[i])) targets.insert(m);
    }
    for (int m : targets) {
      refine_impl(m);
      ++count;
    }
    update();
  }
  return count;
}

void Mesh::global_refinement(GlobalRefinement kind) {
  update();
  if (kind == GlobalRefinement::HRef) {
    std::vector<int> act = elem_order_;
    for (int m : act) refine_impl(m);
    update();
    return;
  }
  int delta = kind == GlobalRefinement::PRef ? 1 : -1;
  auto ok = [&](int p) { return delta > 0 ? p < kMaxP : p > 1; };
  for (const auto& nd : nodes_) {
    bool good = true;
    switch (nd.kind) {
      case EntityKind::Vertex: break;
      case EntityKind::Edge: good = ok(nd.order); break;
      case EntityKind::Face: good = ok(nd.order / 10) && ok(nd.order % 10); break;
      case EntityKind::Middle: {
        auto o = OrderTriple::decode(nd.order);
        good = ok(o.px) && ok(o.py) && ok(o.pz);
        break;
      }
    }
    if (!good)
      fail(ErrorCode::Order, delta > 0 ? "global p-refinement would exceed MAXP"
                                       : "global p-unrefinement would drop below order 1");
  }
  for (int id = 1; id <= nrnodes(); ++id) {
    const Node& nd = nodes_[id - 1];
    switch (nd.kind) {
      case EntityKind::Vertex: break;
      case EntityKind::Edge: set_node_order(id, nd.order + delta); break;
      case EntityKind::Face: set_node_order(id, nd.order + 11 * delta); break;
      case EntityKind::Middle: set_node_order(id, nd.order + 111 * delta); break;
    }
  }
  solved_ = false;
  ++revision_;
}

void Mesh::set_node_order(int id, int order) {
  Node& nd = nodes_[id - 1];
  if (nd.order == order) return;
  nd.order = order;
  allocate_dofs(id);
  solved_ = false;
  ++revision_;
}

void Mesh::adaptive_pref(const std::vector<std::pair<int, OrderTriple>>& targets, PRule rule) {
  update();
  for (const auto& [m, p] : targets) {
    check_active_middle(m, "adaptive_pref");
    if (p.min() < 1 || p.max() > kMaxP) fail(ErrorCode::Order, "target order outside [1,MAXP]");
  }
  for (const auto& [m, p] : targets) set_node_order(m, p.encode());

  auto pick = [&](int a, int b) { return rule == PRule::Min ? std::min(a, b) : std::max(a, b); };
  std::unordered_map<int, std::array<int, 2>> fo;
  auto add_face = [&](int id, std::array<int, 2> v) {
    auto [it, fresh] = fo.emplace(id, v);
    if (!fresh) it->second = {pick(it->second[0], v[0]), pick(it->second[1], v[1])};
  };
  for (int m : elem_order_) {
    auto p = OrderTriple::decode(nodes_[m - 1].order);
    const auto& en = nodes_[m - 1].elem_nodes;
    for (int f = 0; f < 6; ++f) {
      auto ax = face_axes(f);
      std::array<int, 2> v{p[ax[0]], p[ax[1]]};
      int F = en[20 + f];
      add_face(F, v);
      if (int P = constraining_parent(F)) add_face(P, v);
    }
  }
  for (const auto& [id, v] : fo) set_node_order(id, 10 * v[0] + v[1]);

  // A constrained entity must carry at least its parent's order so that the
  // parent trace stays inside the child space.
  auto parent_component = [&](int m, int ent, int d) {
    int A = nodes_[m - 1].father;
    int P = constraining_parent(nodes_[m - 1].elem_nodes[ent]);
    const auto& an = nodes_[A - 1].elem_nodes;
    int j = static_cast<int>(std::find(an.begin(), an.end(), P) - an.begin());
    int po = nodes_[P - 1].order;
    if (j >= 20 && j < 26) {
      auto ax = face_axes(j - 20);
      int p = d == ax[0] ? po / 10 : po % 10;
      // an interior edge of the face also sees the parallel boundary edges
      if (ent >= 8 && ent < 20)
        for (int e : face_edges(j - 20))
          if (edge_axis(e) == d) p = std::max(p, nodes_[an[8 + e] - 1].order);
      return p;
    }
    return po;
  };
  for (int m : elem_order_) {
    const auto& en = nodes_[m - 1].elem_nodes;
    for (int f = 0; f < 6; ++f) {
      int F = en[20 + f];
      if (!constraining_parent(F)) continue;
      auto ax = face_axes(f);
      int o = nodes_[F - 1].order;
      int p1 = std::max(o / 10, parent_component(m, 20 + f, ax[0]));
      int p2 = std::max(o % 10, parent_component(m, 20 + f, ax[1]));
      set_node_order(F, 10 * p1 + p2);
    }
  }

  std::unordered_map<int, int> eo;
  auto add_edge = [&](int id, int v) {
    auto [it, fresh] = eo.emplace(id, v);
    if (!fresh) it->second = pick(it->second, v);
  };
  for (int m : elem_order_) {
    const auto& en = nodes_[m - 1].elem_nodes;
    for (int f = 0; f < 6; ++f) {
      auto ax = face_axes(f);
      int o = nodes_[en[20 + f] - 1].order;
      for (int e : face_edges(f)) {
        int v = edge_axis(e) == ax[0] ? o / 10 : o % 10;
        int E = en[8 + e];
        add_edge(E, v);
        int P = constraining_parent(E);
        if (P && nodes_[P - 1].kind == EntityKind::Edge) add_edge(P, v);
      }
    }
  }
  for (const auto& [id, v] : eo) set_node_order(id, v);
  for (int m : elem_order_) {
    const auto& en = nodes_[m - 1].elem_nodes;
    for (int e = 0; e < 12; ++e) {
      int E = en[8 + e];
      if (!constraining_parent(E)) continue;
      set_node_order(E, std::max(nodes_[E - 1].order, parent_component(m, 8 + e, edge_axis(e))));
    }
  }
}

void Mesh::execute_pref(const std::vector<int>& mdles, PRule rule) {
  std::vector<std::pair<int, OrderTriple>> t;
  for (int m : mdles) {
    check_active_middle(m, "execute_pref");
    auto p = OrderTriple::decode(node(m).order);
    t.push_back({m, {p.px + 1, p.py + 1, p.pz + 1}});
  }
  adaptive_pref(t, rule);
}

const std::array<int, 27>& Mesh::element_nodes(int mdle) const {
  if (!is_middle(mdle)) fail(ErrorCode::Contract, "node " + std::to_string(mdle) + " is not a middle node");
  return node(mdle).elem_nodes;
}

ElementOrder Mesh::element_order(int mdle) const {
  const auto& en = element_nodes(mdle);
  ElementOrder o;
  for (int e = 0; e < 12; ++e) o.edge[e] = nodes_[en[8 + e] - 1].order;
  for (int f = 0; f < 6; ++f) {
    int c = nodes_[en[20 + f] - 1].order;
    o.face[f] = {c / 10, c % 10};
  }
  o.middle = OrderTriple::decode(nodes_[mdle - 1].order);
  return o;
}

VertexCoords Mesh::element_vertices(int mdle) const {
  const auto& en = element_nodes(mdle);
  VertexCoords x;
  for (int v = 0; v < 8; ++v) x[v] = nodes_[en[v] - 1].coords;
  return x;
}

ElementInfo Mesh::element_info(int mdle) const {
  check_active_middle(mdle, "element_info");
  ElementInfo info;
  info.order = element_order(mdle);
  info.norder = info.order.encode();
  info.xnod = element_vertices(mdle);
  info.nodes = element_nodes(mdle);
  return info;
}

int Mesh::father_element(int mdle) const {
  if (!is_middle(mdle)) fail(ErrorCode::Contract, "father_element: not a middle node");
  return node(mdle).father;
}

int Mesh::octant(int mdle) const {
  int f = father_element(mdle);
  if (f == 0) return -1;
  const auto& s = node(f).sons;
  return static_cast<int>(std::find(s.begin(), s.end(), mdle) - s.begin());
}

void Mesh::set_bcond(int bid, int attr, int comp, int flag) {
  if (attr < 0 || attr >= physics_.nr_physa())
    fail(ErrorCode::Config, "set_bcond: attribute index out of range");
  if (comp < 0 || comp >= physics_.attrs[attr].ncomp)
    fail(ErrorCode::Config, "set_bcond: component index out of range");
  if (flag < 0 || flag > 9) fail(ErrorCode::Config, "set_bcond: flag outside 0..9");
  if (bid < 0 || bid > 9) fail(ErrorCode::Config, "set_bcond: boundary id outside 0..9");
  int c = physics_.comp_offset(attr) + comp;
  for (auto& el : elems_) {
    auto digits = decode_bc(el.bcond[c]);
    for (int f = 0; f < 6; ++f)
      if (el.neighbors[f] == 0 && el.boundary_id[f] == bid) digits[f] = flag;
    el.bcond[c] = encode_bc(digits);
  }
  derive_node_masks();
}

void Mesh::derive_node_masks() {
  const int nc = physics_.nrindex();
  for (auto& nd : nodes_) nd.bcond.assign(nc, 0);
  for (const auto& el : elems_) {
    for (int c = 0; c < nc; ++c) {
      auto digits = decode_bc(el.bcond[c]);
      for (int f = 0; f < 6; ++f) {
        if (digits[f] != 1) continue;
        for (int ent : entity_closure(20 + f)) nodes_[el.nodes[ent] - 1].bcond[c] = 1;
      }
    }
  }
  for (auto& nd : nodes_) {
    if (nd.father == 0) continue;
    const Node& fa = nodes_[nd.father - 1];
    if (fa.kind != EntityKind::Middle) nd.bcond = fa.bcond;
  }
  ++revision_;
}

}  // namespace hexhp
