// SPDX-License-Identifier: Apache-2.0
//
// Master hexahedron [0,1]^3, Gauss-Legendre rules and hierarchical
// shape functions for the H1 / H(curl) / H(div) / L2 sequence.
//
// Local entity numbering (0-based): vertices 0..7, edges 8..19,
// faces 20..25, middle 26.  Faces 0..5 are z=0, z=1, y=0, x=1, y=1, x=0.
#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

namespace hexhp {

inline constexpr int kMaxP = 9;
inline constexpr int kMaxEnrichment = 3;
inline constexpr int kMaxOrder = kMaxP + kMaxEnrichment;
inline constexpr int kMaxQuadPoints = 16;
inline constexpr int kNumEntities = 27;
inline constexpr int kMiddle = 26;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

enum class Space { H1, HCurl, HDiv, L2 };
const char* space_name(Space s);

struct OrderTriple {
  int px = 1, py = 1, pz = 1;

  int operator[](int d) const { return d == 0 ? px : (d == 1 ? py : pz); }
  int encode() const { return 100 * px + 10 * py + pz; }
  static OrderTriple decode(int code) { return {code / 100, (code / 10) % 10, code % 10}; }
  static OrderTriple iso(int p) { return {p, p, p}; }
  int max() const;
  int min() const;
  friend bool operator==(const OrderTriple&, const OrderTriple&) = default;
};

// Orders of all entities of one element.  Face orders are given along the
// two face axes in increasing master-direction order.
struct ElementOrder {
  std::array<int, 12> edge{};
  std::array<std::array<int, 2>, 6> face{};
  OrderTriple middle;

  static ElementOrder uniform(OrderTriple p);
  std::array<int, 19> encode() const;
  static ElementOrder decode(const std::array<int, 19>& norder);
  friend bool operator==(const ElementOrder&, const ElementOrder&) = default;
};

enum class EntityKind { Vertex, Edge, Face, Middle };

EntityKind entity_kind(int ent);
// Position of an entity in the 3x3x3 lattice of the refined cube; a
// coordinate equal to 1 means the entity spans that direction.
const std::array<int, 3>& entity_code(int ent);
int entity_from_code(int a, int b, int c);
const std::array<double, 3>& vertex_coords(int v);
std::array<int, 2> edge_vertices(int e);
int edge_axis(int e);
int face_normal_axis(int f);
int face_side(int f);
std::array<int, 2> face_axes(int f);
// Corners in face-parameter order (0,0),(1,0),(1,1),(0,1).
std::array<int, 4> face_vertices(int f);
// Edges t2=0, t1=1, t2=1, t1=0.
std::array<int, 4> face_edges(int f);
// +1 if t1 x t2 points out of the element, -1 otherwise.
int face_normal_sign(int f);
// Entities in the closure of `ent` (including itself), sorted.
std::vector<int> entity_closure(int ent);
// Order of entity `ent` along master direction d.
int entity_order(const ElementOrder& o, int ent, int d);

struct FaceParam {
  Vec3 xi;
  Mat32 dxidt;
};
FaceParam face_param(int f, const Vec2& t);
Vec3 edge_param(int e, double t);

// Gauss-Legendre on [0,1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

struct QuadratureRule3D {
  std::vector<Vec3> points;
  std::vector<double> weights;
};
struct QuadratureRule2D {
  std::vector<Vec2> points;
  std::vector<double> weights;
};
QuadratureRule3D gauss_quadrature_3d(const std::array<int, 3>& counts);
QuadratureRule2D gauss_quadrature_2d(int n1, int n2);

struct ShapeSet {
  Space space = Space::H1;
  int nrdof = 0;
  std::vector<double> value;  // H1, L2
  std::vector<Vec3> vec;      // H(curl), H(div)
  std::vector<Vec3> deriv;    // H1 gradient, H(curl) curl
  std::vector<double> div;    // H(div) divergence
};

// Conforming element functions for the given entity orders (orders 1..kMaxP).
void shape_functions(Space s, const Vec3& xi, const ElementOrder& order, ShapeSet& out);
ShapeSet shape_functions(Space s, const Vec3& xi, const ElementOrder& order);
ShapeSet shape_functions(Space s, const Vec3& xi, OrderTriple order,
                         const std::array<int, 12>& edge_orient,
                         const std::array<int, 6>& face_orient);
// Element-wise functions of a broken (enriched) space, orders up to kMaxOrder.
void broken_shape_functions(Space s, const Vec3& xi, OrderTriple order, ShapeSet& out);

int dof_count(Space s, OrderTriple order);
int dof_count(Space s, const ElementOrder& order);
int entity_dof_count(Space s, int ent, const ElementOrder& order);
// Start offset of each entity block; entry 27 is the total.
std::array<int, 28> entity_offsets(Space s, const ElementOrder& order);
// Dof count of a single node of the given kind carrying an encoded order.
int node_dof_count(Space s, EntityKind kind, int encoded_order);

}  // namespace hexhp
