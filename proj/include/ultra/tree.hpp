#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ultra/rational.hpp"

namespace ultra {

using VertexId = std::size_t;
inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();

/// Children-list description of a rooted tree. Vertex ids are 0..children.size()-1.
struct TreeDescription {
  VertexId root = 0;
  std::vector<std::vector<VertexId>> children;
  bool allow_degree_one = false;
};

/// Finite rooted tree whose leaves play the role of the boundary.
///
/// Leaves are indexed in depth-first order (children visited in input order),
/// so the leaves below any vertex occupy a contiguous index range. All
/// boundary-indexed vectors and matrices in this library use that order.
class Tree {
 public:
  /// Validates and builds. Throws InvalidInput on a cycle, a vertex with two
  /// parents, a disconnected vertex (a second root), an interior vertex with a
  /// single child (unless allowed), or fewer than two leaves.
  static Tree build(const TreeDescription& description);

  /// Same checks; `parent[v] == kNoVertex` marks the root. Children keep
  /// increasing id order.
  static Tree from_parents(const std::vector<VertexId>& parent, bool allow_degree_one = false);

  std::size_t size() const { return parent_.size(); }
  VertexId root() const { return root_; }
  VertexId parent(VertexId v) const { return parent_.at(v); }
  std::span<const VertexId> children(VertexId v) const { return children_.at(v); }
  bool is_leaf(VertexId v) const { return children_.at(v).empty(); }
  std::size_t depth(VertexId v) const { return depth_.at(v); }
  bool allows_degree_one() const { return allow_degree_one_; }

  /// Leaves in depth-first order.
  const std::vector<VertexId>& leaves() const { return leaves_; }
  std::size_t leaf_count() const { return leaves_.size(); }
  /// Position of `leaf` in leaves(); throws InvalidInput for interior vertices.
  std::size_t leaf_index(VertexId leaf) const;
  /// Half-open range of leaf indices below `v` (a single index for a leaf).
  std::pair<std::size_t, std::size_t> leaf_range(VertexId v) const { return leaf_range_.at(v); }
  bool is_ancestor_or_self(VertexId ancestor, VertexId v) const;

  /// Interior vertices in preorder (root first).
  const std::vector<VertexId>& interior() const { return interior_; }
  /// All vertices in preorder: every parent precedes its children.
  const std::vector<VertexId>& preorder() const { return preorder_; }

  /// Parent first (if any), then children in order.
  std::vector<VertexId> neighbours(VertexId v) const;
  bool adjacent(VertexId u, VertexId v) const;

  TreeDescription description() const;

 private:
  Tree() = default;
  void finalize();

  VertexId root_ = 0;
  bool allow_degree_one_ = false;
  std::vector<VertexId> parent_;
  std::vector<std::vector<VertexId>> children_;
  std::vector<std::size_t> depth_;
  std::vector<VertexId> leaves_;
  std::vector<std::size_t> leaf_pos_;
  std::vector<std::pair<std::size_t, std::size_t>> leaf_range_;
  std::vector<VertexId> interior_;
  std::vector<VertexId> preorder_;
};

/// Complete tree: every interior vertex has `branching` children, all leaves
/// at distance `depth` from the root. Vertices are numbered breadth-first.
Tree generate_regular_tree(std::size_t branching, std::size_t depth);

VertexId lowest_common_ancestor(const Tree& tree, VertexId u, VertexId v);

/// Last common vertex of the geodesics base→u and base→v.
VertexId confluent(const Tree& tree, VertexId u, VertexId v, VertexId base);
inline VertexId confluent(const Tree& tree, VertexId u, VertexId v) {
  return lowest_common_ancestor(tree, u, v);
}

/// Geodesic from u to v, both endpoints included.
std::vector<VertexId> geodesic(const Tree& tree, VertexId u, VertexId v);

/// Positive labels on interior vertices, strictly decreasing away from the
/// root. Leaf slots are unused. T is Rational for exact work and double for
/// standardized elements.
template <class T>
class BasicUltrametricElement {
 public:
  /// `values` is indexed by vertex id; entries at leaves are ignored.
  BasicUltrametricElement(const Tree& tree, std::vector<T> values) : values_(std::move(values)) {
    if (values_.size() != tree.size()) throw InvalidInput("ultrametric element: wrong number of values");
    for (VertexId v : tree.interior()) {
      if (!(values_[v] > 0)) throw InvalidInput("ultrametric element: non-positive value at vertex " + std::to_string(v));
      VertexId p = tree.parent(v);
      if (p != kNoVertex && !(values_[v] < values_[p])) {
        throw InvalidInput("ultrametric element: value at vertex " + std::to_string(v) +
                           " is not below its parent " + std::to_string(p));
      }
    }
    for (VertexId leaf : tree.leaves()) values_[leaf] = T{};
  }

  const T& operator()(VertexId v) const { return values_.at(v); }
  const std::vector<T>& values() const { return values_; }

 private:
  std::vector<T> values_;
};

using UltrametricElement = BasicUltrametricElement<Rational>;
using RealUltrametricElement = BasicUltrametricElement<double>;

/// d(ξ,η) = φ(ξ∧η) for distinct leaves, 0 on the diagonal.
Rational boundary_distance(const Tree& tree, const UltrametricElement& phi, VertexId xi, VertexId eta);

/// Full leaf-by-leaf distance matrix, leaves in Tree::leaves() order.
std::vector<std::vector<Rational>> boundary_metric(const Tree& tree, const UltrametricElement& phi);

/// Vertex x on the root→ξ path whose leaf set is the closed ball B(ξ, r):
/// the highest x with φ(x) ≤ r, or ξ itself when r < φ(parent(ξ)).
VertexId ball(const Tree& tree, const UltrametricElement& phi, VertexId xi, const Rational& radius);

/// Finite metric space given by a symmetric distance matrix.
struct UltrametricSpace {
  std::vector<std::string> points;
  std::vector<std::vector<Rational>> dist;
};

/// Raised when a distance matrix breaks the ultrametric inequality.
class MetricViolation : public InvalidInput {
 public:
  MetricViolation(std::size_t i, std::size_t j, std::size_t k, const std::string& what)
      : InvalidInput(what), triple_{i, j, k} {}
  /// d(i,k) > max(d(i,j), d(j,k)).
  std::array<std::size_t, 3> triple() const { return triple_; }

 private:
  std::array<std::size_t, 3> triple_;
};

struct BallTree {
  Tree tree;
  UltrametricElement phi;
  /// point_of_leaf[v] is the input point index for leaf v, kNoVertex for interior v.
  std::vector<std::size_t> point_of_leaf;
  /// leaf vertex for each input point.
  std::vector<VertexId> leaf_of_point;
};

/// Tree of closed balls: interior vertices are balls of two or more points
/// (labelled by their diameter), leaves are the points. Vertices are numbered
/// in preorder; sibling balls are ordered by their smallest point index.
BallTree tree_from_ultrametric(const UltrametricSpace& space);

}  // namespace ultra
