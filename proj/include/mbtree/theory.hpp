#ifndef MBTREE_THEORY_HPP
#define MBTREE_THEORY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "dirpiz.hpp"
#include "errors.hpp"
#include "parallel.hpp"

namespace mbtree {

inline double binomial_coefficient(uint32_t m, uint32_t n) {
  if (n > m) throw InputError("n must not exceed m");
  n = std::min(n, m - n);
  double c = 1;
  for (uint32_t i = 0; i < n; ++i) c = c * double(m - i) / double(i + 1);
  return c;
}

// Probability that two random sequences of length m collide in exactly n
// positions, ignoring the miss factor: C(m,n) * p^n.
inline double collision_prob(uint32_t m, uint32_t n, double p) {
  return binomial_coefficient(m, n) * std::pow(p, double(n));
}

inline double binomial_pmf(uint32_t m, uint32_t n, double p) {
  return collision_prob(m, n, p) * std::pow(1 - p, double(m - n));
}

struct ThresholdSuggestion {
  uint32_t n{0};
  double theta{0};
  bool saturated{false};  // no n in [0,m] met the condition
  bool has_reference{false};
  uint32_t reference_n{0};
  double reference_theta{0};
};

// Smallest n with N_A * collision_prob(m,n,p) <= 1, theta = 2^(L+n). For the
// commonly cited inputs (N_A=100, m=10, p=3e-3) the reference fields carry the
// widely quoted n=1 / theta=2^(L+1), which the literal rule does not produce.
inline ThresholdSuggestion suggest_threshold(uint32_t L, double n_signatures, uint32_t m,
                                             double p = 3e-3) {
  if (n_signatures < 1) throw InputError("signature count must be at least 1");
  ThresholdSuggestion s;
  s.saturated = true;
  for (uint32_t n = 0; n <= m; ++n)
    if (n_signatures * collision_prob(m, n, p) <= 1.0) {
      s.n = n;
      s.saturated = false;
      break;
    }
  if (s.saturated) s.n = m;
  s.theta = std::exp2(double(L) + s.n);
  if (n_signatures == 100 && m == 10 && std::abs(p - 3e-3) < 1e-12) {
    s.has_reference = true;
    s.reference_n = 1;
    s.reference_theta = std::exp2(double(L) + 1);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Monte Carlo collision check
// ---------------------------------------------------------------------------

struct Pmf {
  std::vector<DirPiz> values;
  std::vector<double> prob;  // aligned to values, sums to 1
  std::vector<double> cdf;   // inclusive prefix sums
  bool uniform{false};

  DirPiz sample(double u) const {
    if (uniform) {
      size_t i = std::min(values.size() - 1, size_t(u * double(values.size())));
      return values[i];
    }
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return values[size_t(it - cdf.begin())];
  }
};

inline Pmf make_pmf(std::vector<DirPiz> values, std::vector<double> weights) {
  if (values.empty() || values.size() != weights.size())
    throw InputError("pmf needs matching non-empty values and weights");
  double total = 0;
  for (double w : weights) {
    if (w < 0) throw InputError("pmf weights must be non-negative");
    total += w;
  }
  if (!(total > 0)) throw InputError("pmf weights must not all be zero");
  Pmf f;
  f.values = std::move(values);
  f.prob.reserve(weights.size());
  f.cdf.reserve(weights.size());
  double acc = 0;
  for (double w : weights) {
    double p = w / total;
    f.prob.push_back(p);
    acc += p;
    f.cdf.push_back(acc);
  }
  f.cdf.back() = 1.0;
  f.uniform = std::all_of(weights.begin(), weights.end(),
                          [&](double w) { return w == weights.front(); });
  return f;
}

// Uniform over the MTU-bounded DirPiz alphabet [-1500, 1500] without 0.
inline Pmf uniform_pmf() {
  std::vector<DirPiz> values;
  values.reserve(3000);
  for (DirPiz v = -1500; v <= 1500; ++v)
    if (v != 0) values.push_back(v);
  return make_pmf(std::move(values), std::vector<double>(3000, 1.0));
}

// Per-position probability that a draw from a equals a draw from b.
inline double match_prob(const Pmf& a, const Pmf& b) {
  std::map<DirPiz, double> bp;
  for (size_t j = 0; j < b.values.size(); ++j) bp[b.values[j]] += b.prob[j];
  double q = 0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    auto it = bp.find(a.values[i]);
    if (it != bp.end()) q += a.prob[i] * it->second;
  }
  return q;
}

struct McResult {
  uint64_t trials{0};
  std::vector<uint64_t> counts;  // counts[n] = trials with exactly n matches

  double empirical(uint32_t n) const { return double(counts[n]) / double(trials); }
};

// Draws `trials` pairs of length-m sequences and histograms the number of
// per-position matches. Trials are split into fixed-size chunks with
// per-chunk seeds, so the result is identical for any jobs setting.
inline McResult monte_carlo_collisions(uint64_t trials, uint32_t m, const Pmf& a, const Pmf& b,
                                       uint64_t seed, unsigned jobs = 0) {
  if (trials < 1) throw InputError("trials must be at least 1");
  constexpr uint64_t kChunk = 1 << 16;
  size_t chunks = size_t((trials + kChunk - 1) / kChunk);
  std::vector<std::vector<uint64_t>> partial(chunks);
  parallel_for(chunks, jobs, [&](size_t c) {
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * (c + 1)));
    auto draw = [&rng](const Pmf& f) {
      double u = double(rng() >> 11) * 0x1.0p-53;
      return f.sample(u);
    };
    std::vector<uint64_t> counts(m + 1, 0);
    uint64_t lo = uint64_t(c) * kChunk;
    uint64_t hi = std::min(trials, lo + kChunk);
    for (uint64_t t = lo; t < hi; ++t) {
      uint32_t n = 0;
      for (uint32_t i = 0; i < m; ++i) n += draw(a) == draw(b);
      ++counts[n];
    }
    partial[c] = std::move(counts);
  });
  McResult r;
  r.trials = trials;
  r.counts.assign(m + 1, 0);
  for (const auto& counts : partial)
    for (uint32_t n = 0; n <= m; ++n) r.counts[n] += counts[n];
  return r;
}

}  // namespace mbtree

#endif  // MBTREE_THEORY_HPP
