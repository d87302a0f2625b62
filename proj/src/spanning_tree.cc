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

#include "formation/spanning_tree.h"

#include <string>

#include "formation/errors.h"

namespace formation {

namespace {

std::string EdgeString(int parent, int child) {
  return "(" + std::to_string(parent) + ", " + std::to_string(child) + ")";
}

}  // namespace

std::vector<std::pair<int, int>> SpanningTree::one_based_edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(edges_.size());
  for (const Edge& e : edges_) out.emplace_back(e.parent + 1, e.child + 1);
  return out;
}

SpanningTree validate_spanning_tree(
    int n, std::span<const std::pair<int, int>> edges) {
  if (n < 1) throw CountError("spanning tree needs at least one vertex");

  // parent_of[v] is the unique parent of v, -1 while unset.
  std::vector<int> parent_of(n, -1);
  for (const auto& [p, c] : edges) {
    if (p < 1 || p > n || c < 1 || c > n) {
      throw VertexRangeError("edge " + EdgeString(p, c) +
                             " has an endpoint outside 1.." +
                             std::to_string(n));
    }
    if (p == c) throw CycleError("self loop at vertex " + std::to_string(p));
    if (c == 1) {
      throw CycleError("edge " + EdgeString(p, c) +
                       " points back into the primary leader");
    }
    if (parent_of[c - 1] != -1) {
      throw CycleError("vertex " + std::to_string(c) +
                       " appears as a child more than once");
    }
    parent_of[c - 1] = p - 1;
  }

  // Walk parent pointers: a walk that revisits a vertex before reaching the
  // root is a cycle; one that dead-ends is a disconnected component.
  for (int v = 1; v < n; ++v) {
    std::vector<bool> seen(n, false);
    int u = v;
    while (u != 0) {
      if (seen[u]) {
        throw CycleError("cycle through vertex " + std::to_string(u + 1));
      }
      seen[u] = true;
      u = parent_of[u];
      if (u == -1) break;
    }
    if (u == -1) {
      throw DisconnectedError("vertex " + std::to_string(v + 1) +
                              " is not reachable from the primary leader");
    }
  }
  if (static_cast<int>(edges.size()) != n - 1) {
    throw CountError("expected " + std::to_string(n - 1) + " edges, got " +
                     std::to_string(edges.size()));
  }

  // Stable topological order: repeated passes over the input, emitting each
  // edge once its parent is reached. Already-ordered input is left unchanged.
  SpanningTree tree;
  tree.n_ = n;
  std::vector<bool> reached(n, false);
  std::vector<bool> placed(edges.size(), false);
  reached[0] = true;
  while (tree.edges_.size() < edges.size()) {
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (placed[k]) continue;
      const int p = edges[k].first - 1;
      const int c = edges[k].second - 1;
      if (!reached[p]) continue;
      tree.edges_.push_back({p, c});
      reached[c] = true;
      placed[k] = true;
    }
  }
  tree.chain_ = true;
  for (std::size_t k = 0; k < tree.edges_.size(); ++k) {
    const Edge& e = tree.edges_[k];
    if (e.parent != static_cast<int>(k) || e.child != static_cast<int>(k) + 1) {
      tree.chain_ = false;
    }
  }
  return tree;
}

}  // namespace formation
