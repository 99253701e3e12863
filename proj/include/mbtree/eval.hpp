#ifndef MBTREE_EVAL_HPP
#define MBTREE_EVAL_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "detect.hpp"
#include "errors.hpp"
#include "mltree.hpp"
#include "parallel.hpp"
#include "similarity.hpp"

namespace mbtree {

inline constexpr const char* kBenignLabel = "benign";

struct LabeledOutcome {
  std::string host;
  std::string true_label;       // kBenignLabel or a RAT name
  std::string predicted_label;  // kBenignLabel iff verdict is benign
  bool malicious{false};
};

inline LabeledOutcome make_outcome(const DetectionReport& r, const std::string& true_label) {
  LabeledOutcome o;
  o.host = ip_to_string(r.host_ip);
  o.true_label = true_label;
  o.predicted_label = r.malicious ? r.predicted_label : kBenignLabel;
  o.malicious = r.malicious;
  return o;
}

struct Metrics {
  double fpr{0};       // percent, binary-masked
  double fnr{0};       // percent, binary-masked
  double acc{0};       // percent, multi-class
  double macro_f1{0};  // percent, multi-class, zero-support classes excluded
};

inline Metrics metrics(const std::vector<LabeledOutcome>& outcomes) {
  if (outcomes.empty()) throw InputError("metrics need at least one outcome");
  uint64_t fp = 0, tn = 0, fn = 0, tp = 0, correct = 0;
  std::set<std::string> classes;
  for (const auto& o : outcomes) {
    bool true_mal = o.true_label != kBenignLabel;
    bool pred_mal = o.malicious;
    (true_mal ? (pred_mal ? tp : fn) : (pred_mal ? fp : tn)) += 1;
    if (o.predicted_label == o.true_label) ++correct;
    classes.insert(o.true_label);
  }
  Metrics m;
  m.fpr = fp + tn ? 100.0 * double(fp) / double(fp + tn) : 0.0;
  m.fnr = fn + tp ? 100.0 * double(fn) / double(fn + tp) : 0.0;
  m.acc = 100.0 * double(correct) / double(outcomes.size());
  double f1_sum = 0;
  for (const auto& c : classes) {
    uint64_t ctp = 0, cfp = 0, cfn = 0;
    for (const auto& o : outcomes) {
      if (o.true_label == c && o.predicted_label == c) ++ctp;
      if (o.true_label != c && o.predicted_label == c) ++cfp;
      if (o.true_label == c && o.predicted_label != c) ++cfn;
    }
    double p = ctp + cfp ? double(ctp) / double(ctp + cfp) : 0.0;
    double r = ctp + cfn ? double(ctp) / double(ctp + cfn) : 0.0;
    f1_sum += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  m.macro_f1 = 100.0 * f1_sum / double(classes.size());
  return m;
}

// ---------------------------------------------------------------------------
// Parameter sweep
// ---------------------------------------------------------------------------

// 10 log-spaced thresholds covering [2^L, 2^(L+2)].
inline std::vector<double> theta_grid(uint32_t L, size_t points = 10) {
  if (points < 2) throw InputError("theta grid needs at least two points");
  std::vector<double> out;
  out.reserve(points);
  for (size_t i = 0; i < points; ++i)
    out.push_back(std::exp2(double(L) + 2.0 * double(i) / double(points - 1)));
  return out;
}

struct LabeledTrace {
  std::string label;
  HostTrace trace;
};

struct SweepGrid {
  std::vector<uint32_t> Ls{10};
  std::vector<double> alphas{0.3};
  std::vector<double> betas{0.7};
  std::vector<double> thetas;  // empty: use theta_grid(L) at each L
};

struct SweepRow {
  uint32_t L{0};
  double alpha{0}, beta{0}, theta{0};
  Metrics m;
};

// Full factorial sweep. Trees and the four component scores depend only on L,
// so they are computed once per L and reused across the alpha/beta/theta axes.
inline std::vector<SweepRow> sweep(const std::vector<LabeledTrace>& train,
                                   const std::vector<LabeledTrace>& test,
                                   const SweepGrid& grid,
                                   const std::set<DirPiz>& stoplist = {},
                                   double rt_clamp = 1e3, unsigned jobs = 0) {
  if (grid.Ls.empty() || grid.alphas.empty() || grid.betas.empty())
    throw InputError("sweep grid must not be empty");
  if (train.empty() || test.empty()) throw InputError("sweep needs train and test traces");

  std::vector<SweepRow> rows;
  for (uint32_t L : grid.Ls) {
    ScoreParams base;
    base.L = L;
    base.rt_clamp = rt_clamp;

    std::map<std::string, Signature> by_label;
    for (const auto& lt : train) {
      if (lt.label == kBenignLabel) continue;  // benign traffic has no signature
      Signature s = build_signature(lt.trace, lt.label, L, stoplist);
      auto [it, fresh] = by_label.emplace(lt.label, s);
      if (!fresh) merge_into_signature(it->second, s);
    }
    if (by_label.empty()) throw InputError("sweep needs at least one non-benign training label");
    std::vector<Signature> sigs;
    sigs.reserve(by_label.size());
    for (auto& [label, s] : by_label) sigs.push_back(std::move(s));

    std::vector<std::vector<ComponentScores>> comps(test.size());
    parallel_for(test.size(), jobs, [&](size_t i) {
      HostTrees trees = build_host_trees(test[i].trace, L, stoplist);
      comps[i].reserve(sigs.size());
      for (const auto& s : sigs) comps[i].push_back(component_scores(trees, s, base));
    });

    std::vector<double> thetas = grid.thetas.empty() ? theta_grid(L) : grid.thetas;
    for (double alpha : grid.alphas)
      for (double beta : grid.betas) {
        ScoreParams p = base;
        p.alpha = alpha;
        p.beta = beta;
        std::vector<double> best(test.size());
        std::vector<size_t> best_idx(test.size());
        for (size_t i = 0; i < test.size(); ++i) {
          best[i] = combined_score_log2(comps[i][0], p);
          best_idx[i] = 0;
          for (size_t j = 1; j < sigs.size(); ++j) {
            double v = combined_score_log2(comps[i][j], p);
            if (v > best[i]) {
              best[i] = v;
              best_idx[i] = j;
            }
          }
        }
        for (double theta : thetas) {
          double log_theta = std::log2(theta);
          std::vector<LabeledOutcome> outcomes;
          outcomes.reserve(test.size());
          for (size_t i = 0; i < test.size(); ++i) {
            LabeledOutcome o;
            o.host = ip_to_string(test[i].trace.host_ip);
            o.true_label = test[i].label;
            o.malicious = best[i] > log_theta;
            o.predicted_label = o.malicious ? sigs[best_idx[i]].label : kBenignLabel;
            outcomes.push_back(std::move(o));
          }
          rows.push_back({L, alpha, beta, theta, metrics(outcomes)});
        }
      }
  }
  return rows;
}

}  // namespace mbtree

#endif  // MBTREE_EVAL_HPP
