#ifndef MBTREE_MLTREE_HPP
#define MBTREE_MLTREE_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dirpiz.hpp"
#include "errors.hpp"

namespace mbtree {

using EdgeKey = std::pair<DirPiz, DirPiz>;  // (parent, child); level-0 parent is 0
using NodeCounts = std::map<DirPiz, uint64_t>;
using EdgeCounts = std::map<EdgeKey, uint64_t>;

struct TreeLevel {
  NodeCounts nodes;
  EdgeCounts edges;
  bool operator==(const TreeLevel&) const = default;
};

// Level-indexed weighted DAG over DirPiz sequences. Level l holds the distinct
// values seen at position l with occurrence counts, and the (position l-1,
// position l) adjacency counts. A padding zero ends a sequence's contribution.
struct MLTree {
  uint32_t L{0};
  std::vector<TreeLevel> levels;  // size L

  bool operator==(const MLTree&) const = default;

  bool empty() const {
    for (const auto& lv : levels)
      if (!lv.nodes.empty()) return false;
    return true;
  }
  uint64_t node_total(size_t l) const {
    uint64_t s = 0;
    for (const auto& [n, c] : levels[l].nodes) s += c;
    return s;
  }
  uint64_t edge_total(size_t l) const {
    uint64_t s = 0;
    for (const auto& [e, c] : levels[l].edges) s += c;
    return s;
  }
};

inline void add_sequence(MLTree& t, const DirPizSeq& seq) {
  if (seq.values.size() != t.L) throw InputError("sequence length does not match tree L");
  for (uint32_t l = 0; l < t.L; ++l) {
    DirPiz v = seq.values[l];
    if (v == 0) break;
    DirPiz parent = l == 0 ? 0 : seq.values[l - 1];
    t.levels[l].nodes[v] += 1;
    t.levels[l].edges[{parent, v}] += 1;
  }
}

inline MLTree build(const std::vector<DirPizSeq>& seqs, uint32_t L) {
  MLTree t;
  t.L = L;
  t.levels.resize(L);
  for (const auto& s : seqs) add_sequence(t, s);
  return t;
}

// Key-union with count sums, per level. Valid only for trees built from the
// same sample; mixing samples pollutes the signature.
inline MLTree merge(const std::vector<MLTree>& trees) {
  if (trees.empty()) return MLTree{};
  MLTree out = trees.front();
  for (size_t i = 1; i < trees.size(); ++i) {
    const MLTree& t = trees[i];
    if (t.L != out.L) throw InputError("cannot merge MLTrees with different L");
    for (uint32_t l = 0; l < out.L; ++l) {
      for (const auto& [n, c] : t.levels[l].nodes) out.levels[l].nodes[n] += c;
      for (const auto& [e, c] : t.levels[l].edges) out.levels[l].edges[e] += c;
    }
  }
  return out;
}

// Checks the structural invariants: strictly positive counts, no padding
// nodes, per-level node/edge mass equality, edges anchored to existing nodes,
// and parent counts covering their outgoing edge mass.
inline void validate_tree(const MLTree& t) {
  if (t.levels.size() != t.L) throw FormatError("tree level count does not match L");
  for (uint32_t l = 0; l < t.L; ++l) {
    const TreeLevel& lv = t.levels[l];
    for (const auto& [n, c] : lv.nodes) {
      if (n == 0) throw FormatError("padding node in tree");
      if (c == 0) throw FormatError("zero node count");
    }
    uint64_t edge_sum = 0;
    for (const auto& [e, c] : lv.edges) {
      if (c == 0) throw FormatError("zero edge count");
      if (!lv.nodes.count(e.second)) throw FormatError("edge child missing from level");
      if (l == 0) {
        if (e.first != 0) throw FormatError("level-0 edge must use the virtual root");
      } else if (!t.levels[l - 1].nodes.count(e.first)) {
        throw FormatError("edge parent missing from previous level");
      }
      edge_sum += c;
    }
    if (edge_sum != t.node_total(l)) throw FormatError("level edge mass != node mass");
    if (l + 1 < t.L) {
      std::map<DirPiz, uint64_t> outgoing;
      for (const auto& [e, c] : t.levels[l + 1].edges) outgoing[e.first] += c;
      for (const auto& [p, c] : outgoing) {
        auto it = lv.nodes.find(p);
        if (it == lv.nodes.end() || c > it->second)
          throw FormatError("parent count below outgoing edge mass");
      }
    }
  }
}

// Head and tail trees plus the observation window they were built over.
struct HostTrees {
  MLTree head;
  MLTree tail;
  double duration{1.0};
};

struct Signature {
  std::string label;
  MLTree head;
  MLTree tail;
  double duration{1.0};  // seconds (T_m), floored at 1
  std::map<std::string, std::string> meta;

  bool operator==(const Signature&) const = default;
};

inline HostTrees build_host_trees(const HostTrace& trace, uint32_t L,
                                  const std::set<DirPiz>& stoplist = {}) {
  std::vector<DirPizSeq> heads, tails;
  heads.reserve(trace.sessions.size());
  tails.reserve(trace.sessions.size());
  for (const auto& s : trace.sessions) {
    heads.push_back(apply_stoplist(extract_head(s, L), stoplist));
    tails.push_back(apply_stoplist(extract_tail(s, L), stoplist));
  }
  HostTrees ht;
  ht.head = build(heads, L);
  ht.tail = build(tails, L);
  ht.duration = std::max(1.0, trace.capture_duration);
  return ht;
}

inline Signature build_signature(const HostTrace& trace, const std::string& label,
                                 uint32_t L, const std::set<DirPiz>& stoplist = {}) {
  if (trace.sessions.empty()) throw InputError("cannot build a signature from zero sessions");
  HostTrees ht = build_host_trees(trace, L, stoplist);
  Signature sig;
  sig.label = label;
  sig.head = std::move(ht.head);
  sig.tail = std::move(ht.tail);
  sig.duration = ht.duration;
  return sig;
}

// Folds another capture of the same sample into an existing signature: trees
// merge, observation windows add up.
inline void merge_into_signature(Signature& sig, const Signature& other) {
  if (sig.label != other.label) throw InputError("refusing to merge different labels");
  sig.head = merge({sig.head, other.head});
  sig.tail = merge({sig.tail, other.tail});
  sig.duration += other.duration;
}

}  // namespace mbtree

#endif  // MBTREE_MLTREE_HPP
