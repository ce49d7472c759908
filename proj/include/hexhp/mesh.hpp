// SPDX-License-Identifier: Apache-2.0
//
// Initial-element table and node tree of an hp hexahedral mesh.
// Node ids are 1-based and equal the node's position in the node table;
// initial element i owns middle node i.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hexhp/geometry.hpp"
#include "hexhp/masterel.hpp"
#include "hexhp/physics.hpp"

namespace hexhp {

struct GeometryInput {
  struct BoundaryFace {
    int elem;  // 0-based
    int face;  // 0-based
    int bid;
  };
  std::vector<Vec3> points;
  std::vector<std::array<int, 8>> elems;  // 0-based point indices
  std::vector<BoundaryFace> bfaces;
};

GeometryInput parse_geometry(std::istream& in);
GeometryInput read_geometry(const std::string& path);
void write_geometry(std::ostream& out, const GeometryInput& g);
// Structured nx*ny*nz brick mesh of [lo,hi]; all exterior faces get id 0.
GeometryInput box_geometry(int nx, int ny, int nz, const Vec3& lo = Vec3::Zero(),
                           const Vec3& hi = Vec3::Ones());

struct BcAssignment {
  int boundary_id;
  int attr;
  int comp;  // 0-based within the attribute
  int flag;
};

struct Node {
  EntityKind kind = EntityKind::Vertex;
  int order = 0;
  bool active = false;  // middles: unrefined; other nodes: used by an active element
  int father = 0;       // 0 = none
  std::vector<int> sons;
  int ref_kind = 0;
  int level = 0;
  std::vector<std::uint8_t> bcond;  // per flattened component
  std::uint32_t case_mask = 0;
  Vec3 coords = Vec3::Zero();  // vertices only
  std::vector<std::vector<double>> dofs;  // per attribute, components innermost
  std::array<int, 27> elem_nodes{};       // middles only
};

struct InitialElement {
  std::array<int, 27> nodes{};
  std::array<int, 6> neighbors{};    // 1-based element id, 0 on the boundary
  std::array<int, 6> boundary_id{};  // -1 for interior faces
  std::vector<int> bcond;            // per flattened component, encoded face digits
  std::uint32_t phys = 0;
};

struct ElementInfo {
  std::array<int, 19> norder{};
  ElementOrder order;
  std::array<int, 12> edge_orient{};
  std::array<int, 6> face_orient{};
  VertexCoords xnod;
  std::array<int, 27> nodes{};
};

enum class GlobalRefinement { HRef, PRef, PUnref };
enum class PRule { Min, Max };

class Mesh {
 public:
  Mesh(const GeometryInput& geom, const PhysicsTable& physics, OrderTriple initial_order,
       const std::vector<BcAssignment>& bcs = {});

  const PhysicsTable& physics() const { return physics_; }
  PhysicsTable& physics() { return physics_; }

  int nrelis() const { return static_cast<int>(elems_.size()); }
  int nreles() const { return static_cast<int>(elem_order_.size()); }
  int nrnodes() const { return static_cast<int>(nodes_.size()); }
  int maxnods() const { return physics_.maxnods; }
  const std::vector<int>& elem_order() const { return elem_order_; }
  const InitialElement& initial_element(int iel) const;

  const Node& node(int id) const;
  Node& node(int id);
  bool is_middle(int id) const;

  // Natural order: depth-first pre-order over the refinement forest.
  const std::vector<int>& traverse_active();

  // Son o is the octant touching master vertex o.
  void refine(int mdle, int kref = 111);
  int get_isoref(int mdle) const;
  // Returns the number of elements refined.
  int close_mesh();
  void global_refinement(GlobalRefinement kind);
  void adaptive_pref(const std::vector<std::pair<int, OrderTriple>>& targets, PRule rule);
  void execute_pref(const std::vector<int>& mdles, PRule rule);

  ElementInfo element_info(int mdle) const;
  ElementOrder element_order(int mdle) const;
  VertexCoords element_vertices(int mdle) const;
  const std::array<int, 27>& element_nodes(int mdle) const;
  int father_element(int mdle) const;
  int octant(int mdle) const;

  // Parent node constraining `id` (used father entity), or 0.
  int constraining_parent(int id) const;
  // True if some ancestor beyond the father is used (2-irregular).
  bool multiply_constrained(int id) const;

  void set_bcond(int boundary_id, int attr, int comp, int flag);
  void derive_node_masks();

  bool solved() const { return solved_; }
  void set_solved(bool s) { solved_ = s; }
  // Bumped on every structural or order change.
  std::uint64_t revision() const { return revision_; }

  void allocate_dofs(int id);
  int node_attr_dofs(int id, int attr) const;

 private:
  int new_node(EntityKind kind, int order, int father);
  void refine_impl(int mdle);
  void update();
  void check_active_middle(int mdle, const char* what) const;
  void set_node_order(int id, int order);

  PhysicsTable physics_;
  std::vector<InitialElement> elems_;
  std::vector<Node> nodes_;
  std::vector<int> elem_order_;
  bool solved_ = false;
  bool warned_capacity_ = false;
  std::uint64_t revision_ = 0;
};

}  // namespace hexhp
