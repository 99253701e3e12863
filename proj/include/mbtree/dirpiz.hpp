#ifndef MBTREE_DIRPIZ_HPP
#define MBTREE_DIRPIZ_HPP

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "capture.hpp"

namespace mbtree {

// Directed packet payload size: positive C2S, negative S2C, 0 is padding.
using DirPiz = int32_t;

struct DirPizSeq {
  std::vector<DirPiz> values;  // exactly L entries; zeros only as a suffix
};

inline DirPiz signed_size(const PayloadEvent& e) {
  auto v = DirPiz(e.payload_len);
  return e.dir == Direction::C2S ? v : -v;
}

// First min(L, |events|) signed sizes in chronological order, zero-padded.
inline DirPizSeq extract_head(const Session& s, uint32_t L) {
  DirPizSeq seq;
  seq.values.assign(L, 0);
  size_t n = std::min<size_t>(L, s.events.size());
  for (size_t i = 0; i < n; ++i) seq.values[i] = signed_size(s.events[i]);
  return seq;
}

// Last min(L, |events|) signed sizes, reversed: index 0 is the final packet.
inline DirPizSeq extract_tail(const Session& s, uint32_t L) {
  DirPizSeq seq;
  seq.values.assign(L, 0);
  size_t n = std::min<size_t>(L, s.events.size());
  for (size_t i = 0; i < n; ++i)
    seq.values[i] = signed_size(s.events[s.events.size() - 1 - i]);
  return seq;
}

// Deletes stoplisted values, compacts left, re-pads to the original length.
inline DirPizSeq apply_stoplist(const DirPizSeq& seq, const std::set<DirPiz>& stoplist) {
  DirPizSeq out;
  out.values.assign(seq.values.size(), 0);
  size_t k = 0;
  for (DirPiz v : seq.values) {
    if (v == 0) break;
    if (!stoplist.count(v)) out.values[k++] = v;
  }
  return out;
}

}  // namespace mbtree

#endif  // MBTREE_DIRPIZ_HPP
