#include "psp/ground_set.hpp"

#include <algorithm>
#include <stdexcept>

namespace psp {

int GroundSet::index_of(const std::string& label) const {
  for (int i = 0; i < size(); ++i)
    if (labels[i] == label) return i;
  return -1;
}

std::string GroundSet::set_str(Mask x) const {
  std::string out = "{";
  bool first = true;
  for (int i = 0; i < size(); ++i) {
    if (!(x & bit(i))) continue;
    if (!first) out += ",";
    out += labels[i];
    first = false;
  }
  return out + "}";
}

Partition Partition::singletons(Mask carrier) {
  Partition p;
  for (Mask m = carrier; m;) {
    Mask b = m & (~m + 1);
    p.blocks.push_back(b);
    m ^= b;
  }
  return p;
}

Partition Partition::single_block(Mask carrier) {
  Partition p;
  if (carrier) p.blocks.push_back(carrier);
  return p;
}

Mask Partition::carrier() const {
  Mask c = 0;
  for (Mask b : blocks) c |= b;
  return c;
}

Mask Partition::block_containing(int user) const {
  for (Mask b : blocks)
    if (b & bit(user)) return b;
  return 0;
}

void Partition::canonicalize() {
  std::sort(blocks.begin(), blocks.end(),
            [](Mask a, Mask b) { return lowest_bit(a) < lowest_bit(b); });
}

Partition Partition::merge_overlapping(Mask merged) const {
  Partition out;
  Mask unioned = merged;
  for (Mask b : blocks) {
    if (b & merged)
      unioned |= b;
    else
      out.blocks.push_back(b);
  }
  out.blocks.push_back(unioned);
  out.canonicalize();
  return out;
}

Partition Partition::with_singleton(int user) const {
  Partition out = *this;
  out.blocks.push_back(bit(user));
  out.canonicalize();
  return out;
}

std::string Partition::str(const GroundSet& g) const {
  std::string out = "{";
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += ",";
    out += g.set_str(blocks[i]);
  }
  return out + "}";
}

void validate_order(const std::vector<int>& order, int n) {
  if (static_cast<int>(order.size()) != n)
    throw std::invalid_argument("order must list every user exactly once");
  Mask seen = 0;
  for (int u : order) {
    if (u < 0 || u >= n || (seen & bit(u)))
      throw std::invalid_argument("order must be a permutation of the users");
    seen |= bit(u);
  }
}

bool refines(const Partition& p, const Partition& q) {
  if (p.carrier() != q.carrier())
    throw std::invalid_argument("refines: carriers differ");
  for (Mask b : p.blocks) {
    bool inside = false;
    for (Mask c : q.blocks)
      if ((b & c) == b) {
        inside = true;
        break;
      }
    if (!inside) return false;
  }
  return true;
}

Partition meet(const Partition& p, const Partition& q) {
  if (p.carrier() != q.carrier())
    throw std::invalid_argument("meet: carriers differ");
  Partition out;
  for (Mask b : p.blocks)
    for (Mask c : q.blocks)
      if (b & c) out.blocks.push_back(b & c);
  out.canonicalize();
  return out;
}

std::vector<Mask> decompose(Mask x, const Partition& p) {
  std::vector<Mask> out;
  Mask covered = 0;
  for (Mask b : p.blocks) {
    if (!(b & x)) continue;
    if ((b & x) != b)
      throw std::invalid_argument("decompose: set straddles a block");
    out.push_back(b);
    covered |= b;
  }
  if (covered != x)
    throw std::invalid_argument("decompose: set not covered by partition");
  return out;
}

std::vector<std::vector<Mask>> enumerate_groupings(
    const std::vector<Mask>& atoms) {
  size_t n = atoms.size();
  if (n > 12) throw std::invalid_argument("enumerate: more than 12 atoms");
  std::vector<std::vector<Mask>> out;
  if (n == 0) return {{}};
  // Restricted growth strings: rg[i] <= 1 + max(rg[0..i-1]).
  std::vector<int> rg(n, 0);
  while (true) {
    int groups = *std::max_element(rg.begin(), rg.end()) + 1;
    std::vector<Mask> blocks(groups, 0);
    for (size_t i = 0; i < n; ++i) blocks[rg[i]] |= atoms[i];
    out.push_back(std::move(blocks));
    int i = static_cast<int>(n) - 1;
    for (; i > 0; --i) {
      int cap = 0;
      for (int j = 0; j < i; ++j) cap = std::max(cap, rg[j]);
      if (rg[i] <= cap) {
        ++rg[i];
        std::fill(rg.begin() + i + 1, rg.end(), 0);
        break;
      }
      rg[i] = 0;
    }
    if (i == 0) break;
  }
  return out;
}

std::vector<Partition> enumerate_partitions(Mask carrier) {
  std::vector<Mask> atoms;
  for (Mask m = carrier; m;) {
    Mask b = m & (~m + 1);
    atoms.push_back(b);
    m ^= b;
  }
  std::vector<Partition> out;
  for (auto& blocks : enumerate_groupings(atoms)) {
    Partition p;
    p.blocks = std::move(blocks);
    p.canonicalize();
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace psp
