#include <catch2/catch_amalgamated.hpp>

#include <mbtree/capture.hpp>

#include "support/builders.hpp"

using namespace mbtree;
using builders::ip;
using builders::tcp_pkt;
using builders::udp_pkt;

namespace {

// TLS record bytes: 5-byte header plus an opaque body.
std::vector<uint8_t> tls_record_bytes(uint8_t type, uint16_t len, uint8_t minor = 3) {
  std::vector<uint8_t> b{type, 3, minor, uint8_t(len >> 8), uint8_t(len & 0xFF)};
  b.insert(b.end(), len, 0x6E);
  return b;
}

RawPacket with_payload(RawPacket p, std::vector<uint8_t> bytes) {
  p.payload_len = uint32_t(bytes.size());
  p.payload = std::move(bytes);
  return p;
}

std::vector<RawPacket> handshake(const char* client, const char* server, uint16_t cport,
                                 uint16_t sport, double t0, uint32_t cisn = 100,
                                 uint32_t sisn = 500) {
  return {
      tcp_pkt(t0, client, server, cport, sport, kTcpSyn, cisn, 0),
      tcp_pkt(t0 + 0.001, server, client, sport, cport, kTcpSyn | kTcpAck, sisn, 0),
      tcp_pkt(t0 + 0.002, client, server, cport, sport, kTcpAck, cisn + 1, 0),
  };
}

}  // namespace

// ---------------------------------------------------------------------------
// clean_training
// ---------------------------------------------------------------------------

TEST_CASE("training whitelist keeps only C&C traffic", "[capture]") {
  std::vector<RawPacket> pkts{
      tcp_pkt(1, "10.0.0.2", "8.8.8.8", 1, 2, kTcpAck, 0, 10),
      tcp_pkt(2, "10.0.0.2", "198.51.100.7", 1, 2, kTcpAck, 0, 10),
      tcp_pkt(3, "9.9.9.9", "10.0.0.2", 1, 2, kTcpAck, 0, 10),
  };
  auto kept = clean_training(pkts, {ip("198.51.100.7")});
  REQUIRE(kept.size() == 1);
  REQUIRE(kept[0].dst_ip == ip("198.51.100.7"));

  auto all = clean_training(pkts, {ip("10.0.0.2")});
  REQUIRE(all.size() == 3);
}

TEST_CASE("training whitelist needs at least one C&C address", "[capture]") {
  REQUIRE_THROWS_AS(clean_training({}, {}), ConfigError);
}

// ---------------------------------------------------------------------------
// clean_testing
// ---------------------------------------------------------------------------

TEST_CASE("loop packets are removed", "[capture]") {
  std::vector<RawPacket> pkts{
      tcp_pkt(1, "10.0.0.5", "10.0.0.5", 1, 2, kTcpAck | kTcpPsh, 0, 10),
      tcp_pkt(2, "127.0.0.1", "10.0.0.9", 1, 2, kTcpAck | kTcpPsh, 0, 10),
      tcp_pkt(3, "10.0.0.2", "10.0.0.9", 1, 2, kTcpAck | kTcpPsh, 0, 10),
  };
  CleanStats st;
  auto kept = clean_testing(pkts, &st);
  REQUIRE(kept.size() == 1);
  REQUIRE(st.loops == 2);
}

TEST_CASE("identical tcp retransmission pair leaves one survivor", "[capture]") {
  auto a = tcp_pkt(1, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 1000, 64);
  auto b = a;
  b.ts = 1.5;  // retransmitted later; identity ignores time
  CleanStats st;
  auto kept = clean_testing({a, b}, &st);
  REQUIRE(kept.size() == 1);
  REQUIRE(kept[0].ts == 1.0);
  REQUIRE(st.repeated == 1);
}

TEST_CASE("same seq with different payload is not a retransmission", "[capture]") {
  auto a = tcp_pkt(1, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 1000, 64);
  auto b = a;
  b.payload[5] ^= 0xFF;
  auto kept = clean_testing({a, b});
  REQUIRE(kept.size() == 2);
}

TEST_CASE("fin is not deduplicated against the preceding pure ack", "[capture]") {
  // both carry seq 2000 and no payload; only the flag distinguishes them
  auto ack = tcp_pkt(1, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck, 2000, 0);
  auto fin = tcp_pkt(2, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpFin | kTcpAck, 2000, 0);
  auto kept = clean_testing({ack, fin});
  REQUIRE(kept.size() == 1);
  REQUIRE((kept[0].tcp_flags.value() & kTcpFin) != 0);
}

TEST_CASE("pure acks and non-transmission packets are dropped", "[capture]") {
  RawPacket other;  // unrecognized transport
  other.ts = 1;
  other.src_ip = ip("10.0.0.2");
  other.dst_ip = ip("8.8.8.8");
  other.ip_proto = 47;
  std::vector<RawPacket> pkts{
      tcp_pkt(1, "10.0.0.2", "8.8.8.8", 1, 2, kTcpAck, 10, 0),   // pure ACK
      udp_pkt(2, "10.0.0.2", "8.8.8.8", 1, 2, 0),                // empty UDP
      other,
      tcp_pkt(3, "10.0.0.2", "8.8.8.8", 1, 2, kTcpSyn, 0, 0),    // SYN kept
      tcp_pkt(4, "10.0.0.2", "8.8.8.8", 1, 2, kTcpFin | kTcpAck, 11, 0),
      tcp_pkt(5, "10.0.0.2", "8.8.8.8", 1, 2, kTcpRst, 12, 0),
  };
  CleanStats st;
  auto kept = clean_testing(pkts, &st);
  REQUIRE(kept.size() == 3);
  REQUIRE(st.non_transmission == 3);
}

TEST_CASE("testing cleanup is idempotent", "[capture]") {
  std::vector<RawPacket> pkts{
      tcp_pkt(1, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpSyn, 100, 0),
      tcp_pkt(2, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 101, 40),
      tcp_pkt(2.5, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 101, 40),
      tcp_pkt(3, "10.0.0.5", "10.0.0.5", 1, 2, kTcpAck | kTcpPsh, 0, 10),
      tcp_pkt(4, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck, 141, 0),
  };
  auto once = clean_testing(pkts);
  auto twice = clean_testing(once);
  REQUIRE(once.size() == twice.size());
  for (size_t i = 0; i < once.size(); ++i) REQUIRE(once[i].ts == twice[i].ts);
}

// ---------------------------------------------------------------------------
// reassemble_ip
// ---------------------------------------------------------------------------

namespace {

RawPacket fragment(double ts, const char* src, const char* dst, uint8_t ip_proto, uint16_t id,
                   uint16_t offset, bool more, std::vector<uint8_t> bytes) {
  RawPacket p;
  p.ts = ts;
  p.src_ip = ip(src);
  p.dst_ip = ip(dst);
  p.ip_proto = ip_proto;
  p.frag = FragInfo{id, offset, more};
  p.payload_len = uint32_t(bytes.size());
  p.payload = std::move(bytes);
  return p;
}

}  // namespace

TEST_CASE("two fragments merge into one packet", "[capture]") {
  std::vector<uint8_t> lo(8, 0x01), hi(8, 0x02);
  FragStats st;
  auto out = reassemble_ip(
      {
          fragment(1.0, "10.0.0.2", "8.8.8.8", 253, 7, 0, true, lo),
          fragment(1.1, "10.0.0.2", "8.8.8.8", 253, 7, 8, false, hi),
      },
      &st);
  REQUIRE(out.size() == 1);
  REQUIRE(out[0].payload.size() == 16);
  REQUIRE(out[0].payload[0] == 0x01);
  REQUIRE(out[0].payload[15] == 0x02);
  REQUIRE(out[0].ts == 1.0);  // first fragment's arrival time
  REQUIRE(st.merged == 1);
}

TEST_CASE("unfragmented packets pass through unchanged", "[capture]") {
  auto p = tcp_pkt(1, "10.0.0.2", "8.8.8.8", 1, 2, kTcpAck | kTcpPsh, 5, 16);
  auto out = reassemble_ip({p});
  REQUIRE(out.size() == 1);
  REQUIRE(out[0].payload == p.payload);
  REQUIRE(out[0].proto == Transport::TCP);
}

TEST_CASE("missing middle fragment drops the group", "[capture]") {
  FragStats st;
  auto out = reassemble_ip(
      {
          fragment(1.0, "1.1.1.1", "2.2.2.2", 253, 9, 0, true, std::vector<uint8_t>(8, 1)),
          fragment(1.2, "1.1.1.1", "2.2.2.2", 253, 9, 16, false, std::vector<uint8_t>(8, 3)),
      },
      &st);
  REQUIRE(out.empty());
  REQUIRE(st.dropped_incomplete == 1);
}

TEST_CASE("fragmented udp datagram regains its transport header", "[capture]") {
  // UDP header + 20 payload bytes, split at byte 24 of the IP payload
  std::vector<uint8_t> whole;
  whole.push_back(0x30);  // sport 12345 = 0x3039
  whole.push_back(0x39);
  whole.push_back(0x00);  // dport 53
  whole.push_back(0x35);
  whole.push_back(0x00);  // udp len 28
  whole.push_back(28);
  whole.push_back(0);
  whole.push_back(0);
  whole.insert(whole.end(), 20, 0x44);
  std::vector<uint8_t> part1(whole.begin(), whole.begin() + 24);
  std::vector<uint8_t> part2(whole.begin() + 24, whole.end());
  auto out = reassemble_ip({
      fragment(2.0, "10.0.0.2", "8.8.8.8", kIpProtoUdp, 11, 0, true, part1),
      fragment(2.1, "10.0.0.2", "8.8.8.8", kIpProtoUdp, 11, 24, false, part2),
  });
  REQUIRE(out.size() == 1);
  REQUIRE(out[0].proto == Transport::UDP);
  REQUIRE(out[0].src_port == 12345);
  REQUIRE(out[0].dst_port == 53);
  REQUIRE(out[0].payload_len == 20);
}

TEST_CASE("out-of-order fragments still reassemble", "[capture]") {
  auto out = reassemble_ip({
      fragment(1.0, "1.1.1.1", "2.2.2.2", 253, 4, 8, false, std::vector<uint8_t>(4, 9)),
      fragment(1.1, "1.1.1.1", "2.2.2.2", 253, 4, 0, true, std::vector<uint8_t>(8, 8)),
  });
  REQUIRE(out.size() == 1);
  REQUIRE(out[0].payload.size() == 12);
}

TEST_CASE("conflicting overlap keeps first bytes and counts the anomaly", "[capture]") {
  FragStats st;
  auto out = reassemble_ip(
      {
          fragment(1.0, "1.1.1.1", "2.2.2.2", 253, 5, 0, true, std::vector<uint8_t>(8, 0xAA)),
          fragment(1.1, "1.1.1.1", "2.2.2.2", 253, 5, 0, true, std::vector<uint8_t>(8, 0xBB)),
          fragment(1.2, "1.1.1.1", "2.2.2.2", 253, 5, 8, false, std::vector<uint8_t>(4, 0xCC)),
      },
      &st);
  REQUIRE(out.size() == 1);
  REQUIRE(out[0].payload[0] == 0xAA);
  REQUIRE(st.overlap_conflicts == 1);
}

// ---------------------------------------------------------------------------
// reassemble_sessions
// ---------------------------------------------------------------------------

TEST_CASE("established tcp session counts its data events", "[capture]") {
  auto pkts = handshake("10.0.0.2", "8.8.8.8", 40000, 443, 1.0);
  pkts.push_back(tcp_pkt(1.01, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 101, 100));
  pkts.push_back(tcp_pkt(1.02, "8.8.8.8", "10.0.0.2", 443, 40000, kTcpAck | kTcpPsh, 501, 200));
  auto sessions = reassemble_sessions(pkts);
  REQUIRE(sessions.size() == 1);
  const auto& s = sessions[0];
  REQUIRE(s.five_tuple.src_ip == ip("10.0.0.2"));
  REQUIRE(s.five_tuple.src_port == 40000);
  REQUIRE(s.events.size() == 2);
  REQUIRE(s.events[0] == PayloadEvent{Direction::C2S, 100, 1.01});
  REQUIRE(s.events[1] == PayloadEvent{Direction::S2C, 200, 1.02});
  REQUIRE_FALSE(s.tls_detected);
  REQUIRE(s.start_time == 1.0);
}

TEST_CASE("payload before establishment is not counted", "[capture]") {
  std::vector<RawPacket> pkts{
      tcp_pkt(1.0, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpSyn, 100, 0),
      // data before any SYN-ACK
      tcp_pkt(1.1, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 101, 64),
  };
  auto sessions = reassemble_sessions(pkts);
  REQUIRE(sessions.size() == 1);
  REQUIRE(sessions[0].events.empty());
}

TEST_CASE("rst then new syn reuses the 5-tuple as two sessions", "[capture]") {
  auto pkts = handshake("10.0.0.2", "8.8.8.8", 40000, 443, 1.0, 100, 500);
  pkts.push_back(tcp_pkt(1.01, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 101, 50));
  pkts.push_back(tcp_pkt(1.02, "8.8.8.8", "10.0.0.2", 443, 40000, kTcpRst, 501, 0));
  auto more = handshake("10.0.0.2", "8.8.8.8", 40000, 443, 2.0, 9000, 9500);
  pkts.insert(pkts.end(), more.begin(), more.end());
  pkts.push_back(tcp_pkt(2.01, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 9001, 70));
  auto sessions = reassemble_sessions(pkts);
  REQUIRE(sessions.size() == 2);
  REQUIRE(sessions[0].events.size() == 1);
  REQUIRE(sessions[0].events[0].payload_len == 50);
  REQUIRE(sessions[1].events.size() == 1);
  REQUIRE(sessions[1].events[0].payload_len == 70);
}

TEST_CASE("retransmitted syn does not split an unestablished session", "[capture]") {
  std::vector<RawPacket> pkts{
      tcp_pkt(1.0, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpSyn, 100, 0),
      tcp_pkt(1.5, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpSyn, 100, 0),  // same ISN
      tcp_pkt(1.6, "8.8.8.8", "10.0.0.2", 443, 40000, kTcpSyn | kTcpAck, 500, 0),
      tcp_pkt(1.7, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 101, 30),
  };
  auto sessions = reassemble_sessions(pkts);
  REQUIRE(sessions.size() == 1);
  REQUIRE(sessions[0].events.size() == 1);
}

TEST_CASE("fin closes the session and stamps end_time", "[capture]") {
  auto pkts = handshake("10.0.0.2", "8.8.8.8", 40000, 443, 1.0);
  pkts.push_back(tcp_pkt(1.05, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 101, 10));
  pkts.push_back(tcp_pkt(1.10, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpFin | kTcpAck, 111, 0));
  // residue after close: the peer's own FIN
  pkts.push_back(tcp_pkt(1.12, "8.8.8.8", "10.0.0.2", 443, 40000, kTcpFin | kTcpAck, 501, 0));
  auto sessions = reassemble_sessions(pkts);
  REQUIRE(sessions.size() == 1);
  REQUIRE(sessions[0].end_time == 1.10);
  REQUIRE(sessions[0].events.size() == 1);
}

TEST_CASE("udp idle gap beyond the timeout splits the session", "[capture]") {
  std::vector<RawPacket> pkts{
      udp_pkt(0, "10.0.0.2", "8.8.8.8", 5000, 53, 10),
      udp_pkt(100, "8.8.8.8", "10.0.0.2", 53, 5000, 20),
      udp_pkt(500, "10.0.0.2", "8.8.8.8", 5000, 53, 30),  // 400s gap
  };
  auto sessions = reassemble_sessions(pkts, SessionOptions{300.0});
  REQUIRE(sessions.size() == 2);
  REQUIRE(sessions[0].events.size() == 2);
  REQUIRE(sessions[1].events.size() == 1);

  auto joined = reassemble_sessions(pkts, SessionOptions{1000.0});
  REQUIRE(joined.size() == 1);
}

TEST_CASE("tls session counts only application data records", "[capture]") {
  auto pkts = handshake("10.0.0.2", "8.8.8.8", 40000, 443, 1.0);
  pkts.push_back(with_payload(
      tcp_pkt(1.01, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 101, 0),
      tls_record_bytes(22, 120, 1)));  // ClientHello
  pkts.push_back(with_payload(
      tcp_pkt(1.02, "8.8.8.8", "10.0.0.2", 443, 40000, kTcpAck | kTcpPsh, 501, 0),
      tls_record_bytes(22, 90)));  // ServerHello
  pkts.push_back(with_payload(
      tcp_pkt(1.03, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 226, 0),
      tls_record_bytes(23, 517)));
  auto sessions = reassemble_sessions(pkts);
  REQUIRE(sessions.size() == 1);
  REQUIRE(sessions[0].tls_detected);
  REQUIRE(sessions[0].events.size() == 1);
  REQUIRE(sessions[0].events[0] == PayloadEvent{Direction::C2S, 517, 1.03});
}

TEST_CASE("multiple tls records in one segment yield one event each", "[capture]") {
  auto seg = tls_record_bytes(23, 40);
  auto second = tls_record_bytes(23, 60);
  seg.insert(seg.end(), second.begin(), second.end());
  auto pkts = handshake("10.0.0.2", "8.8.8.8", 40000, 443, 1.0);
  pkts.push_back(with_payload(
      tcp_pkt(1.01, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 101, 0), seg));
  auto sessions = reassemble_sessions(pkts);
  REQUIRE(sessions[0].tls_detected);
  REQUIRE(sessions[0].events.size() == 2);
  REQUIRE(sessions[0].events[0].payload_len == 40);
  REQUIRE(sessions[0].events[1].payload_len == 60);
}

TEST_CASE("tls record split across segments completes at the later segment", "[capture]") {
  auto rec = tls_record_bytes(23, 300);
  std::vector<uint8_t> part1(rec.begin(), rec.begin() + 100);
  std::vector<uint8_t> part2(rec.begin() + 100, rec.end());
  auto pkts = handshake("10.0.0.2", "8.8.8.8", 40000, 443, 1.0);
  pkts.push_back(with_payload(
      tcp_pkt(1.01, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 101, 0), part1));
  pkts.push_back(with_payload(
      tcp_pkt(1.02, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 201, 0), part2));
  auto sessions = reassemble_sessions(pkts);
  REQUIRE(sessions[0].tls_detected);
  REQUIRE(sessions[0].events.size() == 1);
  REQUIRE(sessions[0].events[0].payload_len == 300);
  REQUIRE(sessions[0].events[0].ts == 1.02);
}

TEST_CASE("broken tls stream falls back to raw lengths with an anomaly count", "[capture]") {
  auto pkts = handshake("10.0.0.2", "8.8.8.8", 40000, 443, 1.0);
  pkts.push_back(with_payload(
      tcp_pkt(1.01, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 101, 0),
      tls_record_bytes(23, 50)));
  pkts.push_back(with_payload(
      tcp_pkt(1.02, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 156, 0),
      std::vector<uint8_t>(30, 0xFF)));  // garbage where a record header should be
  SessionStats st;
  auto sessions = reassemble_sessions(pkts, {}, &st);
  REQUIRE(sessions.size() == 1);
  REQUIRE_FALSE(sessions[0].tls_detected);
  REQUIRE(st.malformed_tls == 1);
  REQUIRE(sessions[0].events.size() == 2);
  REQUIRE(sessions[0].events[0].payload_len == 55);  // raw segment lengths
  REQUIRE(sessions[0].events[1].payload_len == 30);
}

TEST_CASE("event counts equal payload packets when tls is absent", "[capture]") {
  auto pkts = handshake("10.0.0.2", "8.8.8.8", 40000, 443, 1.0);
  for (int i = 0; i < 7; ++i)
    pkts.push_back(tcp_pkt(1.01 + i * 0.01, "10.0.0.2", "8.8.8.8", 40000, 443,
                           kTcpAck | kTcpPsh, 101 + uint32_t(i) * 32, 32));
  pkts.push_back(udp_pkt(2.0, "10.0.0.3", "8.8.8.8", 5000, 53, 12));
  auto cleaned = clean_testing(pkts);
  size_t payload_pkts = 0;
  for (const auto& p : cleaned) payload_pkts += p.payload_len > 0;
  auto sessions = reassemble_sessions(cleaned);
  size_t events = 0;
  for (const auto& s : sessions) events += s.events.size();
  REQUIRE(events == payload_pkts);
}

TEST_CASE("session reassembly is deterministic", "[capture]") {
  auto pkts = handshake("10.0.0.2", "8.8.8.8", 40000, 443, 1.0);
  pkts.push_back(tcp_pkt(1.01, "10.0.0.2", "8.8.8.8", 40000, 443, kTcpAck | kTcpPsh, 101, 100));
  pkts.push_back(udp_pkt(1.5, "10.0.0.3", "8.8.8.8", 5000, 53, 12));
  REQUIRE(reassemble_sessions(pkts) == reassemble_sessions(pkts));
}

// ---------------------------------------------------------------------------
// group_by_host
// ---------------------------------------------------------------------------

namespace {

Session quick_session(const char* client, const char* server, double t0, double t1) {
  Session s;
  s.five_tuple = {ip(client), ip(server), 40000, 443, Transport::TCP};
  s.start_time = t0;
  s.end_time = t1;
  s.events.push_back({Direction::C2S, 64, t0});
  return s;
}

}  // namespace

TEST_CASE("sessions group by internal prefix", "[capture]") {
  std::vector<Session> sessions{
      quick_session("192.168.1.2", "8.8.8.8", 0, 10),
      quick_session("192.168.1.2", "9.9.9.9", 5, 25),
      quick_session("192.168.1.3", "8.8.8.8", 2, 7),
  };
  auto traces = group_by_host(sessions, {parse_cidr("192.168.0.0/16")});
  REQUIRE(traces.size() == 2);
  REQUIRE(traces[0].host_ip == ip("192.168.1.2"));
  REQUIRE(traces[0].sessions.size() == 2);
  REQUIRE(traces[0].capture_duration == 25.0);
  REQUIRE(traces[1].host_ip == ip("192.168.1.3"));
  REQUIRE(traces[1].sessions.size() == 1);
  REQUIRE(traces[1].capture_duration == 5.0);
}

TEST_CASE("no sessions yield no traces", "[capture]") {
  REQUIRE(group_by_host({}, {}).empty());
}

TEST_CASE("session between two internal hosts goes to the client side", "[capture]") {
  auto traces = group_by_host({quick_session("192.168.1.2", "192.168.1.9", 0, 3)},
                              {parse_cidr("192.168.0.0/16")});
  REQUIRE(traces.size() == 1);
  REQUIRE(traces[0].host_ip == ip("192.168.1.2"));
}

TEST_CASE("sessions with no internal endpoint are skipped and counted", "[capture]") {
  GroupStats st;
  auto traces = group_by_host({quick_session("8.8.8.8", "9.9.9.9", 0, 3)},
                              {parse_cidr("192.168.0.0/16")}, &st);
  REQUIRE(traces.empty());
  REQUIRE(st.skipped_external == 1);
}

TEST_CASE("without prefixes the client side is the host", "[capture]") {
  auto traces = group_by_host({quick_session("8.8.4.4", "9.9.9.9", 0, 3)}, {});
  REQUIRE(traces.size() == 1);
  REQUIRE(traces[0].host_ip == ip("8.8.4.4"));
}
