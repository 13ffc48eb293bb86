#include "ultra/tree.hpp"

#include <algorithm>
#include <numeric>

namespace ultra {

namespace {

std::string vid(VertexId v) { return std::to_string(v); }

}  // namespace

Tree Tree::build(const TreeDescription& description) {
  const std::size_t n = description.children.size();
  if (n == 0) throw InvalidInput("tree: no vertices");
  if (description.root >= n) throw InvalidInput("tree: root id " + vid(description.root) + " out of range");

  Tree t;
  t.root_ = description.root;
  t.allow_degree_one_ = description.allow_degree_one;
  t.parent_.assign(n, kNoVertex);
  t.children_ = description.children;

  for (VertexId v = 0; v < n; ++v) {
    for (VertexId c : t.children_[v]) {
      if (c >= n) throw InvalidInput("tree: child id " + vid(c) + " of vertex " + vid(v) + " out of range");
      if (c == t.root_) throw InvalidInput("tree: cycle through the root at vertex " + vid(v));
      if (t.parent_[c] != kNoVertex) {
        throw InvalidInput("tree: vertex " + vid(c) + " has two parents (" + vid(t.parent_[c]) + " and " + vid(v) + ")");
      }
      t.parent_[c] = v;
    }
  }
  for (VertexId v = 0; v < n; ++v) {
    if (v != t.root_ && t.parent_[v] == kNoVertex) {
      throw InvalidInput("tree: multiple roots (" + vid(t.root_) + " and " + vid(v) + ")");
    }
  }
  t.finalize();
  return t;
}

Tree Tree::from_parents(const std::vector<VertexId>& parent, bool allow_degree_one) {
  TreeDescription d;
  d.children.resize(parent.size());
  d.allow_degree_one = allow_degree_one;
  std::optional<VertexId> root;
  for (VertexId v = 0; v < parent.size(); ++v) {
    if (parent[v] == kNoVertex) {
      if (root) throw InvalidInput("tree: multiple roots (" + vid(*root) + " and " + vid(v) + ")");
      root = v;
    } else {
      if (parent[v] >= parent.size()) throw InvalidInput("tree: parent of " + vid(v) + " out of range");
      d.children[parent[v]].push_back(v);
    }
  }
  if (!root) throw InvalidInput("tree: no root (cycle detected)");
  d.root = *root;
  return build(d);
}

void Tree::finalize() {
  const std::size_t n = parent_.size();
  depth_.assign(n, 0);
  leaf_pos_.assign(n, kNoVertex);
  leaf_range_.assign(n, {0, 0});
  preorder_.clear();
  preorder_.reserve(n);

  // Iterative DFS; children pushed in reverse so they pop in input order.
  std::vector<bool> seen(n, false);
  std::vector<std::pair<VertexId, bool>> stack{{root_, false}};
  while (!stack.empty()) {
    auto [v, done] = stack.back();
    stack.pop_back();
    if (done) {
      if (children_[v].empty()) continue;
      leaf_range_[v] = {leaf_range_[children_[v].front()].first, leaf_range_[children_[v].back()].second};
      continue;
    }
    if (seen[v]) throw InvalidInput("tree: cycle detected at vertex " + vid(v));
    seen[v] = true;
    preorder_.push_back(v);
    if (children_[v].empty()) {
      leaf_pos_[v] = leaves_.size();
      leaf_range_[v] = {leaves_.size(), leaves_.size() + 1};
      leaves_.push_back(v);
      continue;
    }
    if (children_[v].size() == 1 && !allow_degree_one_) {
      throw InvalidInput("tree: interior vertex " + vid(v) + " has a single child");
    }
    interior_.push_back(v);
    stack.emplace_back(v, true);
    for (auto it = children_[v].rbegin(); it != children_[v].rend(); ++it) {
      depth_[*it] = depth_[v] + 1;
      stack.emplace_back(*it, false);
    }
  }
  if (preorder_.size() != n) {
    auto it = std::find(seen.begin(), seen.end(), false);
    throw InvalidInput("tree: vertex " + vid(static_cast<VertexId>(it - seen.begin())) +
                       " is unreachable from the root (cycle detected)");
  }
  if (leaves_.size() < 2) throw InvalidInput("tree: fewer than two leaves");
}

std::size_t Tree::leaf_index(VertexId leaf) const {
  if (leaf >= size() || leaf_pos_[leaf] == kNoVertex) throw InvalidInput("vertex " + vid(leaf) + " is not a leaf");
  return leaf_pos_[leaf];
}

bool Tree::is_ancestor_or_self(VertexId ancestor, VertexId v) const {
  while (depth_.at(v) > depth_.at(ancestor)) v = parent_[v];
  return v == ancestor;
}

std::vector<VertexId> Tree::neighbours(VertexId v) const {
  std::vector<VertexId> out;
  out.reserve(children_.at(v).size() + 1);
  if (parent_[v] != kNoVertex) out.push_back(parent_[v]);
  out.insert(out.end(), children_[v].begin(), children_[v].end());
  return out;
}

bool Tree::adjacent(VertexId u, VertexId v) const {
  if (u >= size() || v >= size()) return false;
  return parent_[u] == v || parent_[v] == u;
}

TreeDescription Tree::description() const { return {root_, children_, allow_degree_one_}; }

Tree generate_regular_tree(std::size_t branching, std::size_t depth) {
  if (branching < 2) throw InvalidInput("regular tree: branching must be at least 2");
  if (depth < 1) throw InvalidInput("regular tree: depth must be at least 1");
  TreeDescription d;
  d.root = 0;
  d.children.emplace_back();
  std::vector<VertexId> level{0};
  for (std::size_t k = 0; k < depth; ++k) {
    std::vector<VertexId> next;
    for (VertexId v : level) {
      for (std::size_t b = 0; b < branching; ++b) {
        VertexId c = d.children.size();
        d.children.emplace_back();
        d.children[v].push_back(c);
        next.push_back(c);
      }
    }
    level = std::move(next);
  }
  return Tree::build(d);
}

VertexId lowest_common_ancestor(const Tree& tree, VertexId u, VertexId v) {
  if (u >= tree.size() || v >= tree.size()) throw InvalidInput("vertex id out of range");
  while (tree.depth(u) > tree.depth(v)) u = tree.parent(u);
  while (tree.depth(v) > tree.depth(u)) v = tree.parent(v);
  while (u != v) {
    u = tree.parent(u);
    v = tree.parent(v);
  }
  return u;
}

VertexId confluent(const Tree& tree, VertexId u, VertexId v, VertexId base) {
  // The three pairwise meeting points coincide except for one, the median,
  // which is the deepest of them.
  VertexId a = lowest_common_ancestor(tree, u, v);
  VertexId b = lowest_common_ancestor(tree, u, base);
  VertexId c = lowest_common_ancestor(tree, v, base);
  VertexId best = a;
  if (tree.depth(b) > tree.depth(best)) best = b;
  if (tree.depth(c) > tree.depth(best)) best = c;
  return best;
}

std::vector<VertexId> geodesic(const Tree& tree, VertexId u, VertexId v) {
  VertexId top = lowest_common_ancestor(tree, u, v);
  std::vector<VertexId> up, down;
  for (VertexId x = u; x != top; x = tree.parent(x)) up.push_back(x);
  up.push_back(top);
  for (VertexId y = v; y != top; y = tree.parent(y)) down.push_back(y);
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

Rational boundary_distance(const Tree& tree, const UltrametricElement& phi, VertexId xi, VertexId eta) {
  tree.leaf_index(xi);
  tree.leaf_index(eta);
  if (xi == eta) return 0;
  return phi(lowest_common_ancestor(tree, xi, eta));
}

std::vector<std::vector<Rational>> boundary_metric(const Tree& tree, const UltrametricElement& phi) {
  const auto& leaves = tree.leaves();
  std::vector<std::vector<Rational>> d(leaves.size(), std::vector<Rational>(leaves.size()));
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    for (std::size_t j = i + 1; j < leaves.size(); ++j) {
      d[i][j] = d[j][i] = boundary_distance(tree, phi, leaves[i], leaves[j]);
    }
  }
  return d;
}

VertexId ball(const Tree& tree, const UltrametricElement& phi, VertexId xi, const Rational& radius) {
  tree.leaf_index(xi);
  if (radius <= 0) throw InvalidInput("ball: radius must be positive");
  VertexId x = xi;
  while (tree.parent(x) != kNoVertex && phi(tree.parent(x)) <= radius) x = tree.parent(x);
  return x;
}

namespace {

void check_space(const UltrametricSpace& space) {
  const std::size_t n = space.dist.size();
  if (n < 2) throw InvalidInput("ultrametric space: need at least two points");
  if (!space.points.empty() && space.points.size() != n) {
    throw InvalidInput("ultrametric space: " + std::to_string(space.points.size()) + " labels for " +
                       std::to_string(n) + " rows");
  }
  auto name = [&](std::size_t i) { return space.points.empty() ? std::to_string(i) : space.points[i]; };
  for (std::size_t i = 0; i < n; ++i) {
    if (space.dist[i].size() != n) throw InvalidInput("ultrametric space: distance matrix is not square");
    if (space.dist[i][i] != 0) throw InvalidInput("ultrametric space: nonzero diagonal at " + name(i));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (space.dist[i][j] != space.dist[j][i]) {
        throw InvalidInput("ultrametric space: asymmetric entry (" + name(i) + ", " + name(j) + ")");
      }
      if (space.dist[i][j] < 0) throw InvalidInput("ultrametric space: negative distance");
      if (space.dist[i][j] == 0) {
        throw InvalidInput("ultrametric space: duplicate points " + name(i) + " and " + name(j));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = i + 1; k < n; ++k) {
        const auto& dik = space.dist[i][k];
        if (dik > space.dist[i][j] && dik > space.dist[j][k]) {
          throw MetricViolation(i, j, k,
                                "ultrametric inequality violated: d(" + name(i) + "," + name(k) + ") = " +
                                    format_rational(dik) + " > max(d(" + name(i) + "," + name(j) + "), d(" +
                                    name(j) + "," + name(k) + "))");
        }
      }
    }
  }
}

struct BallBuilder {
  const UltrametricSpace& space;
  TreeDescription desc;
  std::vector<Rational> phi;
  std::vector<std::size_t> point_of_vertex;

  VertexId add_vertex() {
    desc.children.emplace_back();
    phi.emplace_back(0);
    point_of_vertex.push_back(kNoVertex);
    return desc.children.size() - 1;
  }

  // `points` is sorted; emits the ball and returns its vertex.
  VertexId emit(const std::vector<std::size_t>& points) {
    VertexId v = add_vertex();
    if (points.size() == 1) {
      point_of_vertex[v] = points.front();
      return v;
    }
    Rational diam = 0;
    for (std::size_t a : points)
      for (std::size_t b : points)
        if (space.dist[a][b] > diam) diam = space.dist[a][b];
    phi[v] = diam;
    // Points closer than the diameter form the maximal proper sub-balls.
    std::vector<bool> used(points.size(), false);
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (used[i]) continue;
      std::vector<std::size_t> cls;
      for (std::size_t j = i; j < points.size(); ++j) {
        if (!used[j] && (j == i || space.dist[points[i]][points[j]] < diam)) {
          used[j] = true;
          cls.push_back(points[j]);
        }
      }
      VertexId c = emit(cls);
      desc.children[v].push_back(c);
    }
    return v;
  }
};

}  // namespace

BallTree tree_from_ultrametric(const UltrametricSpace& space) {
  check_space(space);
  BallBuilder b{space, {}, {}, {}};
  std::vector<std::size_t> all(space.dist.size());
  std::iota(all.begin(), all.end(), 0);
  b.desc.root = b.emit(all);
  Tree tree = Tree::build(b.desc);
  UltrametricElement phi(tree, b.phi);
  std::vector<VertexId> leaf_of_point(space.dist.size(), kNoVertex);
  for (VertexId v = 0; v < tree.size(); ++v) {
    if (b.point_of_vertex[v] != kNoVertex) leaf_of_point[b.point_of_vertex[v]] = v;
  }
  return {std::move(tree), std::move(phi), std::move(b.point_of_vertex), std::move(leaf_of_point)};
}

}  // namespace ultra
