#include "psp/dendrogram.hpp"

#include <map>
#include <stdexcept>

#include "json.hpp"

namespace psp {

Dendrogram build_dendrogram(const Psp& psp) {
  if (psp.chain.empty()) throw std::logic_error("dendrogram: empty hierarchy");
  const Mask carrier = psp.chain.front().carrier();
  if (!(psp.chain.front() == Partition::singletons(carrier)))
    throw std::logic_error("dendrogram: hierarchy does not start at singletons");

  Dendrogram d;
  d.leaf_height = psp.critical_points.empty()
                      ? Rational(0)
                      : psp.alpha0 - psp.critical_points.front();

  std::map<Mask, int> live;  // block of the current partition -> node index
  for (Mask m = carrier; m != 0; m &= m - 1) {
    int u = lowest_bit(m);
    live[bit(u)] = static_cast<int>(d.nodes.size());
    d.nodes.push_back({bit(u), d.leaf_height, {}, u});
  }

  for (size_t t = 0; t + 1 < psp.chain.size(); ++t) {
    Rational h = psp.alpha0 - psp.critical_points[t];
    std::map<Mask, int> next;
    for (Mask b : psp.chain[t + 1].blocks) {
      std::vector<int> children;
      for (const auto& [mask, idx] : live)
        if ((mask & b) == mask) children.push_back(idx);
      if (children.size() == 1) {
        next[b] = children[0];
        continue;
      }
      next[b] = static_cast<int>(d.nodes.size());
      d.nodes.push_back({b, h, std::move(children), -1});
    }
    live = std::move(next);
  }
  if (live.size() != 1)
    throw std::logic_error("dendrogram: hierarchy does not end in one block");
  d.root = live.begin()->second;
  return d;
}

namespace {

using json = nlohmann::ordered_json;

json node_json(const Dendrogram& d, int idx, const GroundSet& g) {
  const Dendrogram::Node& n = d.nodes[idx];
  if (n.user >= 0) return json{{"user", g.labels[n.user]}};
  json out;
  out["height"] = n.height.str();
  out["members"] = json::array();
  for (Mask m = n.members; m != 0; m &= m - 1)
    out["members"].push_back(g.labels[lowest_bit(m)]);
  out["children"] = json::array();
  for (int c : n.children) out["children"].push_back(node_json(d, c, g));
  return out;
}

void newick_node(const Dendrogram& d, int idx, const Rational& parent_height,
                 const GroundSet& g, std::string& out) {
  const Dendrogram::Node& n = d.nodes[idx];
  Rational height = n.user >= 0 ? d.leaf_height : n.height;
  if (n.user >= 0) {
    out += g.labels[n.user];
  } else {
    out += "(";
    for (size_t i = 0; i < n.children.size(); ++i) {
      if (i) out += ",";
      newick_node(d, n.children[i], n.height, g, out);
    }
    out += ")";
  }
  out += ":" + (height - parent_height).str();
}

}  // namespace

std::string dendrogram_json(const Dendrogram& d, const GroundSet& g) {
  json out;
  out["schema"] = 1;
  out["leaf_height"] = d.leaf_height.str();
  out["root"] = node_json(d, d.root, g);
  return out.dump(2) + "\n";
}

std::string dendrogram_dot(const Dendrogram& d, const GroundSet& g) {
  std::string out = "graph dendrogram {\n";
  for (size_t i = 0; i < d.nodes.size(); ++i) {
    const Dendrogram::Node& n = d.nodes[i];
    std::string label =
        n.user >= 0 ? g.labels[n.user] : "merge@" + n.height.str();
    out += "  n" + std::to_string(i) + " [label=\"" + label + "\"];\n";
  }
  for (size_t i = 0; i < d.nodes.size(); ++i)
    for (int c : d.nodes[i].children)
      out += "  n" + std::to_string(i) + " -- n" + std::to_string(c) + ";\n";
  return out + "}\n";
}

std::string dendrogram_newick(const Dendrogram& d, const GroundSet& g) {
  const Dendrogram::Node& root = d.nodes[d.root];
  std::string out;
  if (root.user >= 0) {
    out = g.labels[root.user];
  } else {
    out = "(";
    for (size_t i = 0; i < root.children.size(); ++i) {
      if (i) out += ",";
      newick_node(d, root.children[i], root.height, g, out);
    }
    out += ")";
  }
  return out + ";\n";
}

}  // namespace psp
