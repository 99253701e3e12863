#ifndef MBTREE_CAPTURE_HPP
#define MBTREE_CAPTURE_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "errors.hpp"
#include "net.hpp"
#include "pcap.hpp"
#include "tls.hpp"

namespace mbtree {

enum class Direction : uint8_t { C2S, S2C };

// Oriented so that src is the client (C2S) side.
struct FiveTuple {
  IpAddr src_ip{0};
  IpAddr dst_ip{0};
  uint16_t src_port{0};
  uint16_t dst_port{0};
  Transport proto{Transport::OTHER};

  bool operator==(const FiveTuple&) const = default;
};

struct PayloadEvent {
  Direction dir{Direction::C2S};
  uint32_t payload_len{0};
  double ts{0.0};

  bool operator==(const PayloadEvent&) const = default;
};

struct Session {
  FiveTuple five_tuple;
  double start_time{0.0};
  double end_time{0.0};
  std::vector<PayloadEvent> events;
  bool tls_detected{false};

  bool operator==(const Session&) const = default;
};

struct HostTrace {
  IpAddr host_ip{0};
  std::vector<Session> sessions;
  double capture_duration{0.0};
};

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

// Training 'whitelist': keep only packets touching a known C&C address.
inline std::vector<RawPacket> clean_training(const std::vector<RawPacket>& packets,
                                             const std::set<IpAddr>& cc_ips) {
  if (cc_ips.empty()) throw ConfigError("training cleanup requires at least one C&C IP");
  std::vector<RawPacket> out;
  for (const auto& p : packets)
    if (cc_ips.count(p.src_ip) || cc_ips.count(p.dst_ip)) out.push_back(p);
  return out;
}

struct CleanStats {
  uint64_t repeated{0};
  uint64_t loops{0};
  uint64_t non_transmission{0};
};

// Testing 'blacklist': drop repeated packets (TCP retransmissions), loop
// packets, and non-transmission packets. Empty TCP segments survive only when
// they carry a session-delimiting flag (SYN/FIN/RST); pure ACKs are dropped.
inline std::vector<RawPacket> clean_testing(const std::vector<RawPacket>& packets,
                                            CleanStats* stats_out = nullptr) {
  CleanStats stats;
  std::vector<RawPacket> out;
  std::unordered_set<std::string> seen_tcp;
  std::string key;
  for (const auto& p : packets) {
    if (p.src_ip == p.dst_ip || is_loopback(p.src_ip) || is_loopback(p.dst_ip)) {
      ++stats.loops;
      continue;
    }
    if (p.proto == Transport::OTHER) {
      ++stats.non_transmission;
      continue;
    }
    if (p.payload_len == 0) {
      bool delimiting = p.proto == Transport::TCP && p.tcp_flags &&
                        (*p.tcp_flags & (kTcpSyn | kTcpFin | kTcpRst)) != 0;
      if (!delimiting) {
        ++stats.non_transmission;
        continue;
      }
    }
    if (p.proto == Transport::TCP && p.tcp_seq) {
      // Identity of a segment: directed 5-tuple, seq, flags, payload.
      key.clear();
      auto push32 = [&key](uint32_t v) {
        key.push_back(char(v >> 24));
        key.push_back(char(v >> 16));
        key.push_back(char(v >> 8));
        key.push_back(char(v));
      };
      push32(p.src_ip);
      push32(p.dst_ip);
      push32(uint32_t(p.src_port.value_or(0)) << 16 | p.dst_port.value_or(0));
      push32(*p.tcp_seq);
      push32(p.payload_len);
      key.push_back(char(p.tcp_flags.value_or(0)));
      key.append(reinterpret_cast<const char*>(p.payload.data()), p.payload.size());
      if (!seen_tcp.insert(key).second) {
        ++stats.repeated;
        continue;
      }
    }
    out.push_back(p);
  }
  if (stats_out) *stats_out = stats;
  return out;
}

// ---------------------------------------------------------------------------
// IP fragment reassembly
// ---------------------------------------------------------------------------

struct FragStats {
  uint64_t merged{0};
  uint64_t dropped_incomplete{0};
  uint64_t overlap_conflicts{0};
};

// Merges fragments sharing (src, dst, id, protocol) by offset. Overlaps keep
// the first-arrival bytes; an incomplete group at end of input is dropped.
inline std::vector<RawPacket> reassemble_ip(const std::vector<RawPacket>& packets,
                                            FragStats* stats_out = nullptr) {
  struct Group {
    std::vector<uint8_t> buf;
    std::vector<bool> filled;
    double first_ts{0.0};
    IpAddr src{0}, dst{0};
    uint8_t ip_proto{0};
    std::optional<uint32_t> total_len;
    bool degraded{false};  // a fragment arrived truncated
  };
  using GroupKey = std::tuple<IpAddr, IpAddr, uint16_t, uint8_t>;

  FragStats stats;
  std::map<GroupKey, Group> groups;
  std::vector<RawPacket> out;
  out.reserve(packets.size());

  for (const auto& p : packets) {
    if (!p.frag) {
      out.push_back(p);
      continue;
    }
    GroupKey k{p.src_ip, p.dst_ip, p.frag->id, p.ip_proto};
    auto& g = groups[k];
    if (g.buf.empty() && !g.total_len) {
      g.first_ts = p.ts;
      g.src = p.src_ip;
      g.dst = p.dst_ip;
      g.ip_proto = p.ip_proto;
    }
    if (p.payload.size() < p.payload_len) g.degraded = true;
    size_t end = size_t(p.frag->offset) + p.payload.size();
    if (end > g.buf.size()) {
      g.buf.resize(end, 0);
      g.filled.resize(end, false);
    }
    bool conflict = false;
    for (size_t i = 0; i < p.payload.size(); ++i) {
      size_t at = p.frag->offset + i;
      if (g.filled[at]) {
        if (g.buf[at] != p.payload[i]) conflict = true;
      } else {
        g.buf[at] = p.payload[i];
        g.filled[at] = true;
      }
    }
    if (conflict) ++stats.overlap_conflicts;
    if (!p.frag->more) g.total_len = uint32_t(p.frag->offset) + p.payload_len;

    if (!g.total_len || g.degraded) continue;
    if (g.filled.size() < *g.total_len) continue;
    if (!std::all_of(g.filled.begin(), g.filled.begin() + *g.total_len,
                     [](bool b) { return b; }))
      continue;

    RawPacket merged;
    merged.ts = g.first_ts;
    merged.src_ip = g.src;
    merged.dst_ip = g.dst;
    merged.ip_proto = g.ip_proto;
    if (parse_transport(merged, g.buf.data(), *g.total_len, *g.total_len)) {
      out.push_back(std::move(merged));
      ++stats.merged;
    } else {
      ++stats.dropped_incomplete;
    }
    groups.erase(k);
  }
  stats.dropped_incomplete += groups.size();
  if (stats_out) *stats_out = stats;
  return out;
}

// ---------------------------------------------------------------------------
// Session reassembly
// ---------------------------------------------------------------------------

struct SessionOptions {
  double udp_timeout{300.0};
};

struct SessionStats {
  uint64_t malformed_tls{0};
  uint64_t skipped_non_transport{0};
};

namespace detail {

struct Endpoint {
  IpAddr ip{0};
  uint16_t port{0};
  bool operator==(const Endpoint&) const = default;
  bool operator<(const Endpoint& o) const {
    return std::tie(ip, port) < std::tie(o.ip, o.port);
  }
};

struct SessionState {
  Endpoint client, server;
  Transport proto{Transport::OTHER};
  double start{0.0};
  double last_ts{0.0};
  bool closed{false};
  double close_ts{0.0};
  // TCP handshake tracking
  bool syn_seen{false};
  bool synack_seen{false};
  uint32_t client_isn{0};
  // events
  std::vector<PayloadEvent> raw_events;
  std::vector<PayloadEvent> tls_events;
  TlsStreamScanner scan[2];  // indexed by Direction
  bool had_dir_payload[2] = {false, false};
  bool stream_gap{false};

  bool established() const {
    return proto == Transport::UDP || (syn_seen && synack_seen);
  }

  Session finalize(uint64_t& malformed_tls) {
    Session s;
    s.five_tuple = {client.ip, server.ip, client.port, server.port, proto};
    s.start_time = start;
    s.end_time = std::max(start, closed ? close_ts : last_ts);
    bool tls_started = false, tls_broken = stream_gap;
    for (int d = 0; d < 2; ++d) {
      if (!had_dir_payload[d]) continue;
      if (scan[d].ever_tls()) tls_started = true;
      if (scan[d].state() == TlsStreamScanner::State::Invalid || scan[d].incomplete())
        tls_broken = true;
    }
    if (tls_started && !tls_broken) {
      s.tls_detected = true;
      s.events = std::move(tls_events);
    } else {
      if (tls_started) ++malformed_tls;  // looked like TLS, fell back to raw
      s.events = std::move(raw_events);
    }
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const PayloadEvent& a, const PayloadEvent& b) { return a.ts < b.ts; });
    return s;
  }
};

}  // namespace detail

// Groups packets into bidirectional 5-tuple sessions. For TCP, payload counts
// only after the SYN / SYN-ACK exchange has been observed; a fresh SYN on a
// live key splits the session and FIN/RST closes it. TLS sessions (record
// layer detected on either port) contribute one event per Application Data
// record instead of per segment.
inline std::vector<Session> reassemble_sessions(const std::vector<RawPacket>& packets,
                                                const SessionOptions& opts = {},
                                                SessionStats* stats_out = nullptr) {
  using detail::Endpoint;
  using detail::SessionState;
  using Key = std::tuple<IpAddr, uint16_t, IpAddr, uint16_t, Transport>;

  SessionStats stats;
  std::map<Key, size_t> active;  // canonical key -> index into states
  std::vector<SessionState> states;
  std::vector<TlsRecord> records;

  auto canonical = [](const RawPacket& p) -> Key {
    Endpoint a{p.src_ip, *p.src_port}, b{p.dst_ip, *p.dst_port};
    if (b < a) std::swap(a, b);
    return {a.ip, a.port, b.ip, b.port, p.proto};
  };

  auto open_session = [&](const RawPacket& p) -> size_t {
    SessionState st;
    st.client = {p.src_ip, *p.src_port};
    st.server = {p.dst_ip, *p.dst_port};
    st.proto = p.proto;
    st.start = st.last_ts = p.ts;
    if (p.proto == Transport::TCP && p.tcp_flags &&
        (*p.tcp_flags & kTcpSyn) && !(*p.tcp_flags & kTcpAck)) {
      st.syn_seen = true;
      st.client_isn = p.tcp_seq.value_or(0);
    }
    states.push_back(std::move(st));
    return states.size() - 1;
  };

  for (const auto& p : packets) {
    if (p.frag || p.proto == Transport::OTHER || !p.src_port || !p.dst_port) {
      ++stats.skipped_non_transport;
      continue;
    }
    Key key = canonical(p);
    auto it = active.find(key);

    if (p.proto == Transport::TCP) {
      uint8_t flags = p.tcp_flags.value_or(0);
      bool is_syn = (flags & kTcpSyn) && !(flags & kTcpAck);
      bool is_synack = (flags & kTcpSyn) && (flags & kTcpAck);

      if (it == active.end()) {
        it = active.emplace(key, open_session(p)).first;
      } else if (is_syn) {
        SessionState& cur = states[it->second];
        bool retrans = !cur.closed && cur.syn_seen && !cur.synack_seen &&
                       Endpoint{p.src_ip, *p.src_port} == cur.client &&
                       cur.client_isn == p.tcp_seq.value_or(0);
        if (!retrans) it->second = open_session(p);
      } else if (states[it->second].closed) {
        continue;  // residue after FIN/RST (e.g. the peer's own FIN)
      }

      SessionState& st = states[it->second];
      st.last_ts = p.ts;
      bool from_client = Endpoint{p.src_ip, *p.src_port} == st.client;
      if (is_syn && !st.syn_seen && from_client) {
        st.syn_seen = true;
        st.client_isn = p.tcp_seq.value_or(0);
      }
      if (is_synack && !from_client) st.synack_seen = true;

      bool data_counts = st.established() && !(flags & kTcpRst) && p.payload_len > 0;
      if (data_counts) {
        Direction dir = from_client ? Direction::C2S : Direction::S2C;
        st.raw_events.push_back({dir, p.payload_len, p.ts});
        int d = int(dir);
        st.had_dir_payload[d] = true;
        if (p.payload.size() < p.payload_len) st.stream_gap = true;
        records.clear();
        st.scan[d].feed(p.payload.data(), p.payload.size(), records);
        for (const auto& r : records)
          if (r.content_type == kTlsApplicationData && r.length > 0)
            st.tls_events.push_back({dir, r.length, p.ts});
      }
      if (flags & (kTcpFin | kTcpRst)) {
        st.closed = true;
        st.close_ts = p.ts;
      }
    } else {  // UDP
      if (it == active.end()) {
        it = active.emplace(key, open_session(p)).first;
      } else if (p.ts - states[it->second].last_ts > opts.udp_timeout) {
        it->second = open_session(p);
      }
      SessionState& st = states[it->second];
      st.last_ts = p.ts;
      if (p.payload_len > 0) {
        Direction dir = Endpoint{p.src_ip, *p.src_port} == st.client ? Direction::C2S
                                                                     : Direction::S2C;
        st.raw_events.push_back({dir, p.payload_len, p.ts});
      }
    }
  }

  std::vector<Session> sessions;
  sessions.reserve(states.size());
  for (auto& st : states) sessions.push_back(st.finalize(stats.malformed_tls));
  if (stats_out) *stats_out = stats;
  return sessions;
}

// ---------------------------------------------------------------------------
// Host grouping
// ---------------------------------------------------------------------------

struct GroupStats {
  uint64_t skipped_external{0};  // neither endpoint matched an internal prefix
};

// One HostTrace per internal endpoint. Without configured prefixes the C2S
// side of each session is taken as the host; a session between two internal
// hosts is charged to its C2S side only.
inline std::vector<HostTrace> group_by_host(const std::vector<Session>& sessions,
                                            const std::vector<Cidr>& internal_prefixes,
                                            GroupStats* stats_out = nullptr) {
  GroupStats stats;
  std::map<IpAddr, HostTrace> by_host;
  for (const auto& s : sessions) {
    IpAddr host;
    if (internal_prefixes.empty()) {
      host = s.five_tuple.src_ip;
    } else {
      bool src_in = matches_any(s.five_tuple.src_ip, internal_prefixes);
      bool dst_in = matches_any(s.five_tuple.dst_ip, internal_prefixes);
      if (src_in)
        host = s.five_tuple.src_ip;
      else if (dst_in)
        host = s.five_tuple.dst_ip;
      else {
        ++stats.skipped_external;
        continue;
      }
    }
    auto& trace = by_host[host];
    trace.host_ip = host;
    trace.sessions.push_back(s);
  }
  std::vector<HostTrace> out;
  out.reserve(by_host.size());
  for (auto& [ip, trace] : by_host) {
    double lo = 0, hi = 0;
    bool first = true;
    for (const auto& s : trace.sessions) {
      if (first) {
        lo = s.start_time;
        hi = s.end_time;
        first = false;
      } else {
        lo = std::min(lo, s.start_time);
        hi = std::max(hi, s.end_time);
      }
    }
    trace.capture_duration = hi - lo;
    out.push_back(std::move(trace));
  }
  if (stats_out) *stats_out = stats;
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

enum class CleanMode : uint8_t { Training, Testing };

struct PipelineStats {
  ReadStats read;
  FragStats frag;
  CleanStats clean;
  SessionStats session;
  GroupStats group;
};

struct PipelineOptions {
  CleanMode mode{CleanMode::Testing};
  std::set<IpAddr> cc_ips;  // required for training mode
  std::vector<Cidr> internal_prefixes;
  double udp_timeout{300.0};
};

inline std::vector<HostTrace> ingest_packets(std::vector<RawPacket> packets,
                                             const PipelineOptions& opt,
                                             PipelineStats* stats = nullptr) {
  PipelineStats st;
  std::stable_sort(packets.begin(), packets.end(),
                   [](const RawPacket& a, const RawPacket& b) { return a.ts < b.ts; });
  packets = reassemble_ip(packets, &st.frag);
  packets = opt.mode == CleanMode::Training ? clean_training(packets, opt.cc_ips)
                                            : clean_testing(packets, &st.clean);
  SessionOptions sess_opt{opt.udp_timeout};
  auto sessions = reassemble_sessions(packets, sess_opt, &st.session);
  auto traces = group_by_host(sessions, opt.internal_prefixes, &st.group);
  if (stats) {
    st.read = stats->read;  // preserve stats recorded by the caller's reads
    *stats = st;
  }
  return traces;
}

inline std::vector<HostTrace> ingest_pcaps(const std::vector<std::string>& paths,
                                           const PipelineOptions& opt,
                                           PipelineStats* stats = nullptr) {
  std::vector<RawPacket> packets;
  ReadStats read_total;
  for (const auto& p : paths) {
    ReadStats rs;
    auto part = read_capture(p, &rs);
    read_total.frames += rs.frames;
    read_total.non_ip += rs.non_ip;
    read_total.malformed += rs.malformed;
    read_total.truncated_tail += rs.truncated_tail;
    packets.insert(packets.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  }
  PipelineStats st;
  st.read = read_total;
  auto traces = ingest_packets(std::move(packets), opt, &st);
  if (stats) *stats = st;
  return traces;
}

}  // namespace mbtree

#endif  // MBTREE_CAPTURE_HPP
