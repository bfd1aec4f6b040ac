#pragma once

#include <string>
#include <vector>

#include "psp/ground_set.hpp"
#include "psp/psp.hpp"

namespace psp {

// Agglomerative merge tree of the hierarchy in the similarity domain
// lambda = f(V) - alpha: blocks of the finer partition fuse when the
// threshold drops to f(V) minus the corresponding sum-rate breakpoint.
struct Dendrogram {
  struct Node {
    Mask members;
    Rational height;            // threshold at which this cluster forms
    std::vector<int> children;  // node indices; empty at the leaves
    int user = -1;              // leaf user index, -1 for internal nodes
  };
  std::vector<Node> nodes;  // leaves first in user order, then merges
  int root = -1;
  Rational leaf_height;  // level at which the leaves are drawn
};

// Merge heights descend from leaf_height toward the root. The hierarchy
// must start at singletons, which it always does within the window.
Dendrogram build_dendrogram(const Psp& psp);

std::string dendrogram_json(const Dendrogram& d, const GroundSet& g);
std::string dendrogram_dot(const Dendrogram& d, const GroundSet& g);

// Branch lengths are threshold drops from child to parent; leaves all sit
// at leaf_height.
std::string dendrogram_newick(const Dendrogram& d, const GroundSet& g);

}  // namespace psp
