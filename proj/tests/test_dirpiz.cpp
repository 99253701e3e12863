#include <catch2/catch_amalgamated.hpp>

#include <mbtree/dirpiz.hpp>

#include <random>
#include <set>
#include <vector>

#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace mbtree;
using builders::make_session;
using Catch::Matchers::Equals;

TEST_CASE("head sequence keeps chronological order with signed sizes", "[dirpiz]") {
  auto s = make_session({{Direction::C2S, 100}, {Direction::S2C, 200}});
  auto seq = extract_head(s, 4);
  REQUIRE_THAT(seq.values, Equals(std::vector<DirPiz>{100, -200, 0, 0}));
}

TEST_CASE("head of an empty session is all padding", "[dirpiz]") {
  Session s;
  REQUIRE_THAT(extract_head(s, 4).values, Equals(std::vector<DirPiz>{0, 0, 0, 0}));
}

TEST_CASE("head truncates to the first L events", "[dirpiz]") {
  auto s = make_session({{Direction::C2S, 1},
                         {Direction::S2C, 2},
                         {Direction::C2S, 3},
                         {Direction::S2C, 4},
                         {Direction::C2S, 5},
                         {Direction::S2C, 6}});
  REQUIRE_THAT(extract_head(s, 4).values, Equals(std::vector<DirPiz>{1, -2, 3, -4}));
}

TEST_CASE("tail is the reversed ending of the signed sequence", "[dirpiz]") {
  // signed sequence [10, -20, 30, -40, 50]
  auto s = make_session({{Direction::C2S, 10},
                         {Direction::S2C, 20},
                         {Direction::C2S, 30},
                         {Direction::S2C, 40},
                         {Direction::C2S, 50}});
  REQUIRE_THAT(extract_tail(s, 3).values, Equals(std::vector<DirPiz>{50, -40, 30}));
}

TEST_CASE("tail pads short sessions", "[dirpiz]") {
  auto s = make_session({{Direction::C2S, 7}});
  REQUIRE_THAT(extract_tail(s, 2).values, Equals(std::vector<DirPiz>{7, 0}));
  Session empty;
  REQUIRE_THAT(extract_tail(empty, 3).values, Equals(std::vector<DirPiz>{0, 0, 0}));
}

TEST_CASE("stoplist filters, compacts and re-pads", "[dirpiz]") {
  DirPizSeq seq{{100, -200, 100, 0}};
  auto out = apply_stoplist(seq, {100});
  REQUIRE_THAT(out.values, Equals(std::vector<DirPiz>{-200, 0, 0, 0}));
}

TEST_CASE("empty stoplist is the identity", "[dirpiz]") {
  DirPizSeq seq{{5, -6, 7, 0}};
  REQUIRE_THAT(apply_stoplist(seq, {}).values, Equals(seq.values));
}

TEST_CASE("fully stoplisted sequence becomes all padding", "[dirpiz]") {
  DirPizSeq seq{{5, -6, 5, -6}};
  REQUIRE_THAT(apply_stoplist(seq, {5, -6}).values,
               Equals(std::vector<DirPiz>{0, 0, 0, 0}));
}

TEST_CASE("stoplist is sign-sensitive", "[dirpiz]") {
  DirPizSeq seq{{50, -50, 0, 0}};
  REQUIRE_THAT(apply_stoplist(seq, {50}).values, Equals(std::vector<DirPiz>{-50, 0, 0, 0}));
}

TEST_CASE("head signs follow event directions", "[dirpiz]") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 200; ++it) {
    std::vector<std::pair<Direction, uint32_t>> events;
    size_t n = rng() % 12;
    for (size_t i = 0; i < n; ++i)
      events.push_back({rng() % 2 ? Direction::C2S : Direction::S2C, uint32_t(1 + rng() % 1500)});
    auto s = make_session(events);
    auto seq = extract_head(s, 8);
    for (size_t i = 0; i < std::min<size_t>(8, n); ++i) {
      REQUIRE(std::abs(seq.values[i]) == DirPiz(events[i].second));
      REQUIRE((seq.values[i] > 0) == (events[i].first == Direction::C2S));
    }
    for (size_t i = std::min<size_t>(8, n); i < 8; ++i) REQUIRE(seq.values[i] == 0);
  }
}

TEST_CASE("tail equals the reversed last-L slice for random sessions", "[dirpiz]") {
  std::mt19937_64 rng(12);
  for (int it = 0; it < 200; ++it) {
    std::vector<std::pair<Direction, uint32_t>> events;
    size_t n = rng() % 15;
    for (size_t i = 0; i < n; ++i)
      events.push_back({rng() % 2 ? Direction::C2S : Direction::S2C, uint32_t(1 + rng() % 1500)});
    auto s = make_session(events);
    uint32_t L = 1 + uint32_t(rng() % 10);
    auto tail = extract_tail(s, L);

    std::vector<DirPiz> full;
    for (const auto& e : s.events) full.push_back(signed_size(e));
    std::vector<DirPiz> expect(L, 0);
    size_t take = std::min<size_t>(L, full.size());
    for (size_t i = 0; i < take; ++i) expect[i] = full[full.size() - 1 - i];
    REQUIRE_THAT(tail.values, Equals(expect));
  }
}

TEST_CASE("apply_stoplist is idempotent", "[dirpiz]") {
  std::mt19937_64 rng(13);
  for (int it = 0; it < 200; ++it) {
    auto seq = oracle::random_seq(rng, 10, 6);
    std::set<DirPiz> stop;
    for (int k = 0; k < 3; ++k) {
      DirPiz v = DirPiz(1 + rng() % 6);
      stop.insert(rng() % 2 ? v : -v);
    }
    auto once = apply_stoplist(seq, stop);
    auto twice = apply_stoplist(once, stop);
    REQUIRE_THAT(twice.values, Equals(once.values));
  }
}
