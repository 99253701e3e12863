#ifndef MBTREE_TESTS_BUILDERS_HPP
#define MBTREE_TESTS_BUILDERS_HPP

#include <mbtree/capture.hpp>
#include <mbtree/net.hpp>
#include <mbtree/pcap.hpp>

#include <cstdint>
#include <utility>
#include <vector>

namespace builders {

inline mbtree::IpAddr ip(const char* dotted) { return *mbtree::parse_ip(dotted); }

inline mbtree::RawPacket tcp_pkt(double ts, const char* src, const char* dst, uint16_t sport,
                                 uint16_t dport, uint8_t flags, uint32_t seq,
                                 uint32_t payload_len) {
  mbtree::RawPacket p;
  p.ts = ts;
  p.src_ip = ip(src);
  p.dst_ip = ip(dst);
  p.proto = mbtree::Transport::TCP;
  p.ip_proto = mbtree::kIpProtoTcp;
  p.src_port = sport;
  p.dst_port = dport;
  p.tcp_flags = flags;
  p.tcp_seq = seq;
  p.payload_len = payload_len;
  p.payload.assign(payload_len, 0xAB);
  return p;
}

inline mbtree::RawPacket udp_pkt(double ts, const char* src, const char* dst, uint16_t sport,
                                 uint16_t dport, uint32_t payload_len) {
  mbtree::RawPacket p;
  p.ts = ts;
  p.src_ip = ip(src);
  p.dst_ip = ip(dst);
  p.proto = mbtree::Transport::UDP;
  p.ip_proto = mbtree::kIpProtoUdp;
  p.src_port = sport;
  p.dst_port = dport;
  p.payload_len = payload_len;
  p.payload.assign(payload_len, 0xCD);
  return p;
}

// Session with scripted events, 10ms apart starting at ts0.
inline mbtree::Session make_session(
    const std::vector<std::pair<mbtree::Direction, uint32_t>>& events, double ts0 = 0.0) {
  mbtree::Session s;
  s.five_tuple = {ip("10.0.0.2"), ip("203.0.113.1"), 40000, 443, mbtree::Transport::TCP};
  s.start_time = ts0;
  double ts = ts0;
  for (const auto& [dir, len] : events) {
    ts += 0.01;
    s.events.push_back({dir, len, ts});
  }
  s.end_time = ts;
  return s;
}

}  // namespace builders

#endif  // MBTREE_TESTS_BUILDERS_HPP
