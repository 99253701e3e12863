#ifndef MBTREE_DETECT_HPP
#define MBTREE_DETECT_HPP

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "dirpiz.hpp"
#include "errors.hpp"
#include "mltree.hpp"
#include "net.hpp"
#include "parallel.hpp"
#include "similarity.hpp"

namespace mbtree {

struct DetectionReport {
  IpAddr host_ip{0};
  std::vector<double> scores_log2;  // aligned to the signature list
  double max_log2{0};
  size_t max_index{0};
  bool malicious{false};
  std::string predicted_label;  // set iff malicious
};

// Scores one host against every signature; malicious iff the best log2 score
// strictly exceeds log2(theta). Ties on the max keep the lowest index.
inline DetectionReport detect_host(const HostTrace& trace, const std::vector<Signature>& sigs,
                                   const ScoreParams& params,
                                   const std::set<DirPiz>& stoplist = {}) {
  if (sigs.empty()) throw ConfigError("signature set is empty");
  validate_params(params);
  HostTrees trees = build_host_trees(trace, params.L, stoplist);
  DetectionReport r;
  r.host_ip = trace.host_ip;
  r.scores_log2.reserve(sigs.size());
  for (const auto& s : sigs) r.scores_log2.push_back(score_host_log2(trees, s, params));
  r.max_index = 0;
  r.max_log2 = r.scores_log2[0];
  for (size_t i = 1; i < r.scores_log2.size(); ++i)
    if (r.scores_log2[i] > r.max_log2) {
      r.max_log2 = r.scores_log2[i];
      r.max_index = i;
    }
  r.malicious = r.max_log2 > std::log2(params.theta);
  if (r.malicious) r.predicted_label = sigs[r.max_index].label;
  return r;
}

inline std::vector<DetectionReport> detect_all(const std::vector<HostTrace>& traces,
                                               const std::vector<Signature>& sigs,
                                               const ScoreParams& params,
                                               const std::set<DirPiz>& stoplist = {},
                                               unsigned jobs = 0) {
  std::vector<DetectionReport> out(traces.size());
  parallel_for(traces.size(), jobs,
               [&](size_t i) { out[i] = detect_host(traces[i], sigs, params, stoplist); });
  return out;
}

// ---------------------------------------------------------------------------
// DirPiz-Seq baseline: exact sequence matching by cosine similarity
// ---------------------------------------------------------------------------

inline double cosine_similarity(const DirPizSeq& a, const DirPizSeq& b) {
  if (a.values.size() != b.values.size()) throw InputError("sequence length mismatch");
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    dot += double(a.values[i]) * b.values[i];
    na += double(a.values[i]) * a.values[i];
    nb += double(b.values[i]) * b.values[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Malicious iff any session head sequence is cosine-close to any signature
// sequence.
inline bool dirpiz_seq_baseline(const HostTrace& trace, const std::vector<DirPizSeq>& sig_seqs,
                                uint32_t L, const std::set<DirPiz>& stoplist = {},
                                double threshold = 0.99) {
  for (const auto& sess : trace.sessions) {
    DirPizSeq seq = apply_stoplist(extract_head(sess, L), stoplist);
    for (const auto& ref : sig_seqs)
      if (cosine_similarity(seq, ref) >= threshold) return true;
  }
  return false;
}

}  // namespace mbtree

#endif  // MBTREE_DETECT_HPP
