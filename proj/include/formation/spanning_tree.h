// Copyright 2026 The Formation Maneuvering Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FORMATION_SPANNING_TREE_H_
#define FORMATION_SPANNING_TREE_H_

#include <span>
#include <utility>
#include <vector>

#include "formation/se2.h"

namespace formation {

// Oriented tree edge with 0-based vertex indices; parent is the endpoint
// closer to the primary leader (vertex 0).
struct Edge {
  int parent = 0;
  int child = 0;
  bool operator==(const Edge&) const = default;
};

// Coordination graph: a spanning tree rooted at the primary leader. Edges are
// stored in topological order from the root, and this order fixes the block
// layout of the stacked error z and of the matrices K and H.
class SpanningTree {
 public:
  int size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  // True iff edges are exactly (k, k+1) for k = 0..n-2.
  bool is_chain() const { return chain_; }
  // Edges as 1-based (parent, child) pairs, in stored order.
  std::vector<std::pair<int, int>> one_based_edges() const;

 private:
  friend SpanningTree validate_spanning_tree(
      int n, std::span<const std::pair<int, int>> edges);
  int n_ = 1;
  std::vector<Edge> edges_;
  bool chain_ = true;
};

// Validates 1-based (parent, child) pairs. Throws VertexRangeError, CycleError,
// DisconnectedError or CountError.
SpanningTree validate_spanning_tree(int n,
                                    std::span<const std::pair<int, int>> edges);

// Recovers every tracking error from the leader's error and the per-edge
// coordination errors, using e_child = e_parent - eps(parent, child).
template <typename Scalar>
std::vector<Vector3<Scalar>> propagate_errors(
    const SpanningTree& tree, const Vector3<Scalar>& leader_error,
    std::span<const Vector3<Scalar>> edge_errors) {
  std::vector<Vector3<Scalar>> e(tree.size(), Vector3<Scalar>::Zero());
  e[0] = leader_error;
  const auto& edges = tree.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    e[edges[k].child] = e[edges[k].parent] - edge_errors[k];
  }
  return e;
}

}  // namespace formation

#endif  // FORMATION_SPANNING_TREE_H_
