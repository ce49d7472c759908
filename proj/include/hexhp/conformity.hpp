// SPDX-License-Identifier: Apache-2.0
//
// Constrained approximation on 1-irregular meshes: hanging-node constraint
// coefficients, modified elements, solution gathering and Dirichlet data.
#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "hexhp/mesh.hpp"

namespace hexhp {

// Coefficients expressing the functions of child entity `child_entity`
// (element octant `octant` of a refined father) through the functions of the
// father's closure of `parent_entity`.  Rows follow the child entity's
// functions; columns the father's closure entities in increasing local index,
// each with its functions in shape-function order.
const Eigen::MatrixXd& constraint_coefficients(Space s, int parent_entity, int octant,
                                               int child_entity, const ElementOrder& parent_order,
                                               const ElementOrder& child_order);

// Local index (in the father) of the entity containing entity `ent` of the
// son sitting in `octant`.
int parent_entity_index(int octant, int ent);

struct ModifiedElement {
  struct Block {
    Space space = Space::H1;
    int ncomp = 1;
    int nloc = 0;  // local dofs, components innermost
    int nmod = 0;
    std::vector<int> node_offset;  // per modified node, start of its dofs; size nodes+1
    Eigen::MatrixXd C;              // nloc x nmod
    std::vector<char> dirichlet;    // per modified dof
    std::vector<char> bubble;       // per modified dof
  };
  int mdle = 0;
  ElementOrder order;
  std::vector<int> nodes;  // modified nodes, sorted by id
  std::vector<Block> attrs;
};

// Local dofs of attribute `a` on an element of the given order.
int local_dof_count(const PhysicsAttr& a, const ElementOrder& o);

ModifiedElement modified_element(const Mesh& mesh, int mdle);

// Current modified-dof values of attribute `a` read from node storage.
Eigen::VectorXd modified_values(const Mesh& mesh, const ModifiedElement& me, int a);
// Local coefficients C * modified values, without the solved-state check.
Eigen::VectorXd local_values(const Mesh& mesh, const ModifiedElement& me, int a);
// Local coefficients of a solved mesh.
Eigen::VectorXd gather_solution(const Mesh& mesh, int mdle, int a);

// Dirichlet data for component `comp` of attribute `attr` at physical x.
using DirichletFn = std::function<void(const Vec3& x, int attr, int comp, double& u, Vec3& grad)>;

void update_Ddof(Mesh& mesh, const DirichletFn& fn);
void update_gdof(Mesh& mesh);

}  // namespace hexhp
