#ifndef MBTREE_SIMILARITY_HPP
#define MBTREE_SIMILARITY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "errors.hpp"
#include "mltree.hpp"

namespace mbtree {

struct ScoreParams {
  double alpha{0.3};   // path score ratio
  double beta{0.7};    // head score ratio
  double theta{2048};  // detection threshold (linear domain)
  uint32_t L{10};
  double rt_clamp{1e3};  // R_t clamped to [1/rt_clamp, rt_clamp]
};

inline void validate_params(const ScoreParams& p) {
  if (p.alpha < 0 || p.alpha > 1) throw InputError("alpha must be in [0,1]");
  if (p.beta < 0 || p.beta > 1) throw InputError("beta must be in [0,1]");
  if (!(p.theta > 0)) throw InputError("theta must be positive");
  if (p.L < 1) throw InputError("L must be at least 1");
  if (!(p.rt_clamp >= 1)) throw InputError("rt clamp must be at least 1");
}

// Common Weighted Path: per level, the edges present in both trees whose
// parent continues a path from the previous level. Counts are the signature
// side's. levels.size() is the depth L'.
struct CWP {
  std::vector<EdgeCounts> levels;
  size_t depth() const { return levels.size(); }
};

// Per-level node intersection with minimum occurrence counts.
struct CommonNodes {
  std::vector<NodeCounts> levels;
};

inline CWP cwp(const MLTree& test, const MLTree& sig) {
  if (test.L != sig.L) throw InputError("MLTree L mismatch");
  CWP out;
  std::set<DirPiz> frontier;
  for (uint32_t l = 0; l < sig.L; ++l) {
    EdgeCounts common;
    for (const auto& [e, cm] : sig.levels[l].edges) {
      if (!test.levels[l].edges.count(e)) continue;
      if (l > 0 && !frontier.count(e.first)) continue;
      common.emplace(e, cm);
    }
    if (common.empty()) break;
    frontier.clear();
    for (const auto& [e, cm] : common) frontier.insert(e.second);
    out.levels.push_back(std::move(common));
  }
  return out;
}

inline CommonNodes common_nodes(const MLTree& test, const MLTree& sig) {
  if (test.L != sig.L) throw InputError("MLTree L mismatch");
  CommonNodes out;
  out.levels.resize(sig.L);
  for (uint32_t l = 0; l < sig.L; ++l)
    for (const auto& [n, cm] : sig.levels[l].nodes) {
      auto it = test.levels[l].nodes.find(n);
      if (it != test.levels[l].nodes.end())
        out.levels[l].emplace(n, std::min(cm, it->second));
    }
  return out;
}

// log2 of S_p: L' plus, per matched level, the matched share of the
// signature's edge mass weighted by l^2/L' (formula level l = storage + 1)
// and the time ratio. Empty CWP scores 2^0 = 1.
inline double path_score_log2(const CWP& c, const MLTree& sig, double rt) {
  if (!(rt > 0)) throw InputError("R_t must be positive");
  size_t Lp = c.depth();
  if (Lp == 0) return 0.0;
  double sum = 0;
  for (size_t l = 0; l < Lp; ++l) {
    uint64_t denom = sig.edge_total(l);
    if (denom == 0) continue;
    uint64_t num = 0;
    for (const auto& [e, cm] : c.levels[l]) num += cm;
    double fl = double(l) + 1;
    sum += double(num) / double(denom) * (fl * fl / double(Lp)) * rt;
  }
  return double(Lp) + sum;
}

// log2 of S_n: L plus, per level, the min-count share of the signature's node
// mass times the time ratio. No common nodes scores 2^L.
inline double node_score_log2(const CommonNodes& cn, const MLTree& sig, double rt, uint32_t L) {
  if (!(rt > 0)) throw InputError("R_t must be positive");
  double sum = 0;
  for (uint32_t l = 0; l < L; ++l) {
    uint64_t denom = sig.node_total(l);
    if (denom == 0) continue;
    uint64_t num = 0;
    for (const auto& [n, c] : cn.levels[l]) num += c;
    sum += double(num) / double(denom) * rt;
  }
  return double(L) + sum;
}

inline double combined_score(double s_fp, double s_fn, double s_lp, double s_ln,
                             const ScoreParams& p) {
  validate_params(p);
  if (s_fp < 0 || s_fn < 0 || s_lp < 0 || s_ln < 0)
    throw InputError("component scores must be non-negative");
  return p.beta * (p.alpha * s_fp + (1 - p.alpha) * s_fn) +
         (1 - p.beta) * (p.alpha * s_lp + (1 - p.alpha) * s_ln);
}

// head path, head node, tail path, tail node; all log2 domain
struct ComponentScores {
  double fp{0}, fn{0}, lp{0}, ln{0};
};

// log2 of the four-component mixture, computed without leaving the log domain
// (component exponents can overflow a double's range for large L and R_t).
inline double combined_score_log2(const ComponentScores& s, const ScoreParams& p) {
  validate_params(p);
  const double w[4] = {p.beta * p.alpha, p.beta * (1 - p.alpha),
                       (1 - p.beta) * p.alpha, (1 - p.beta) * (1 - p.alpha)};
  const double e[4] = {s.fp, s.fn, s.lp, s.ln};
  double m = -HUGE_VAL;
  for (int i = 0; i < 4; ++i)
    if (w[i] > 0) m = std::max(m, e[i]);
  double acc = 0;
  for (int i = 0; i < 4; ++i)
    if (w[i] > 0) acc += w[i] * std::exp2(e[i] - m);
  return m + std::log2(acc);
}

inline double time_ratio(double sig_duration, double test_duration, double rt_clamp) {
  double rt = sig_duration / std::max(1.0, test_duration);
  return std::clamp(rt, 1.0 / rt_clamp, rt_clamp);
}

inline ComponentScores component_scores(const HostTrees& test, const Signature& sig,
                                        const ScoreParams& p) {
  if (sig.head.L != p.L || sig.tail.L != p.L || test.head.L != p.L || test.tail.L != p.L)
    throw InputError("params L does not match tree L");
  double rt = time_ratio(sig.duration, test.duration, p.rt_clamp);
  ComponentScores s;
  s.fp = path_score_log2(cwp(test.head, sig.head), sig.head, rt);
  s.fn = node_score_log2(common_nodes(test.head, sig.head), sig.head, rt, p.L);
  s.lp = path_score_log2(cwp(test.tail, sig.tail), sig.tail, rt);
  s.ln = node_score_log2(common_nodes(test.tail, sig.tail), sig.tail, rt, p.L);
  return s;
}

inline double score_host_log2(const HostTrees& test, const Signature& sig,
                              const ScoreParams& p) {
  return combined_score_log2(component_scores(test, sig, p), p);
}

}  // namespace mbtree

#endif  // MBTREE_SIMILARITY_HPP
