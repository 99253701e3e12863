#ifndef MBTREE_SYNTHGEN_HPP
#define MBTREE_SYNTHGEN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "capture.hpp"
#include "dirpiz.hpp"
#include "errors.hpp"
#include "pcap.hpp"
#include "tls.hpp"

namespace mbtree {

enum class SynthTransport : uint8_t { Tcp, Tls, Udp };

struct DynamicSlot {
  uint32_t pos{0};
  DirPiz min{0};
  DirPiz max{0};  // inclusive; 0 is never drawn
};

// A host's behavioral recipe: a fixed signed-size prefix (the automated
// procedure) with selected positions re-drawn per session from a range.
struct TrafficTemplate {
  std::string label;
  std::vector<DirPiz> handshake;
  std::vector<DynamicSlot> dynamic_slots;
  uint32_t sessions{1};
  double duration_s{60.0};
  SynthTransport transport{SynthTransport::Tcp};
};

inline size_t template_length(const TrafficTemplate& t) {
  size_t len = t.handshake.size();
  for (const auto& s : t.dynamic_slots) len = std::max(len, size_t(s.pos) + 1);
  return len;
}

inline void validate_template(const TrafficTemplate& t) {
  for (DirPiz v : t.handshake)
    if (v == 0 || v < -1500 || v > 1500)
      throw InputError("handshake values must be non-zero and within +-1500");
  std::vector<bool> covered(template_length(t), false);
  for (size_t i = 0; i < t.handshake.size(); ++i) covered[i] = true;
  for (const auto& s : t.dynamic_slots) {
    if (s.min > s.max) throw InputError("dynamic slot range is empty");
    if (s.min < -65535 || s.max > 65535)
      throw InputError("dynamic slot range must be within +-65535");
    if (s.min == 0 && s.max == 0) throw InputError("dynamic slot admits only padding");
    covered[s.pos] = true;
  }
  for (bool c : covered)
    if (!c) throw InputError("template leaves a sequence position undefined");
  if (t.sessions < 1) throw InputError("template needs at least one session");
  if (!(t.duration_s > 0)) throw InputError("template duration must be positive");
}

namespace detail {

// Uniform over [lo, hi] excluding 0.
inline DirPiz draw_nonzero(std::mt19937_64& rng, DirPiz lo, DirPiz hi) {
  uint64_t span = uint64_t(int64_t(hi) - int64_t(lo)) + 1;
  if (lo <= 0 && 0 <= hi) --span;
  DirPiz v = lo + DirPiz(rng() % span);
  if (lo <= 0 && v >= 0) ++v;
  return v;
}

}  // namespace detail

// Realizes the template deterministically for one seed. Event timestamps are
// evenly scripted; sessions use distinct client ports so they stay distinct
// through 5-tuple reassembly.
inline HostTrace gen_host(const TrafficTemplate& t, uint64_t seed,
                          IpAddr host_ip = 0x0A000002u,     // 10.0.0.2
                          IpAddr server_ip = 0xCB007101u) {  // 203.0.113.1
  validate_template(t);
  std::mt19937_64 rng(seed);
  size_t len = template_length(t);
  double spacing = t.duration_s / double(t.sessions);

  HostTrace trace;
  trace.host_ip = host_ip;
  for (uint32_t i = 0; i < t.sessions; ++i) {
    Session s;
    s.five_tuple = {host_ip, server_ip, uint16_t(40000 + i % 20000), 443,
                    t.transport == SynthTransport::Udp ? Transport::UDP : Transport::TCP};
    s.tls_detected = t.transport == SynthTransport::Tls;
    s.start_time = double(i) * spacing;

    std::vector<DirPiz> vals(t.handshake);
    vals.resize(len, 0);
    for (const auto& slot : t.dynamic_slots)
      vals[slot.pos] = detail::draw_nonzero(rng, slot.min, slot.max);

    double ts = s.start_time;
    for (DirPiz v : vals) {
      ts += 0.01;
      s.events.push_back({v > 0 ? Direction::C2S : Direction::S2C, uint32_t(std::abs(v)), ts});
    }
    s.end_time = ts + 0.01;
    trace.sessions.push_back(std::move(s));
  }
  trace.capture_duration = t.duration_s;
  return trace;
}

// ---------------------------------------------------------------------------
// Pcap emission
// ---------------------------------------------------------------------------

struct EmitOptions {
  bool duplicate_data{false};  // emit every data segment twice (retransmission)
  bool fragment_data{false};   // split large TCP segments into two IP fragments
};

namespace detail {

inline void put16(std::vector<uint8_t>& b, uint16_t v) {
  b.push_back(uint8_t(v >> 8));
  b.push_back(uint8_t(v));
}

inline void put32(std::vector<uint8_t>& b, uint32_t v) {
  b.push_back(uint8_t(v >> 24));
  b.push_back(uint8_t(v >> 16));
  b.push_back(uint8_t(v >> 8));
  b.push_back(uint8_t(v));
}

inline uint16_t ip_checksum(const uint8_t* hdr, size_t len) {
  uint32_t sum = 0;
  for (size_t i = 0; i + 1 < len; i += 2) sum += uint32_t(hdr[i]) << 8 | hdr[i + 1];
  while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
  return uint16_t(~sum);
}

struct Frame {
  double ts;
  std::vector<uint8_t> bytes;
};

class FrameBuilder {
 public:
  explicit FrameBuilder(std::vector<Frame>& out) : out_(out) {}

  void ip_packet(double ts, IpAddr src, IpAddr dst, uint8_t proto,
                 const std::vector<uint8_t>& ip_payload, bool fragment) {
    uint16_t id = next_id_++;
    if (!fragment || ip_payload.size() < 32) {
      emit(ts, src, dst, proto, id, 0, false,
           ip_payload.data(), ip_payload.size());
      return;
    }
    size_t cut = 24;  // 8-byte aligned; keeps the transport header whole
    emit(ts, src, dst, proto, id, 0, true, ip_payload.data(), cut);
    emit(ts, src, dst, proto, id, uint16_t(cut), false,
         ip_payload.data() + cut, ip_payload.size() - cut);
  }

 private:
  void emit(double ts, IpAddr src, IpAddr dst, uint8_t proto, uint16_t id,
            uint16_t frag_off, bool more, const uint8_t* data, size_t len) {
    Frame f;
    f.ts = ts;
    auto& b = f.bytes;
    b.reserve(34 + len);
    for (int i = 0; i < 6; ++i) b.push_back(0x02);  // dst mac
    for (int i = 0; i < 6; ++i) b.push_back(0x04);  // src mac
    put16(b, kEtherTypeIp4);
    size_t ip_at = b.size();
    b.push_back(0x45);  // version 4, IHL 5
    b.push_back(0);
    put16(b, uint16_t(20 + len));
    put16(b, id);
    put16(b, uint16_t((more ? 0x2000 : 0) | (frag_off / 8)));
    b.push_back(64);  // TTL
    b.push_back(proto);
    put16(b, 0);  // checksum patched below
    put32(b, src);
    put32(b, dst);
    uint16_t csum = ip_checksum(b.data() + ip_at, 20);
    b[ip_at + 10] = uint8_t(csum >> 8);
    b[ip_at + 11] = uint8_t(csum);
    b.insert(b.end(), data, data + len);
    out_.push_back(std::move(f));
  }

  std::vector<Frame>& out_;
  uint16_t next_id_ = 1;
};

inline std::vector<uint8_t> tcp_segment(uint16_t sport, uint16_t dport, uint32_t seq,
                                        uint32_t ack, uint8_t flags,
                                        const std::vector<uint8_t>& payload) {
  std::vector<uint8_t> b;
  b.reserve(20 + payload.size());
  put16(b, sport);
  put16(b, dport);
  put32(b, seq);
  put32(b, ack);
  b.push_back(0x50);  // data offset 5
  b.push_back(flags);
  put16(b, 65535);  // window
  put16(b, 0);      // checksum (not validated by readers)
  put16(b, 0);      // urgent
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

inline std::vector<uint8_t> udp_datagram(uint16_t sport, uint16_t dport,
                                         const std::vector<uint8_t>& payload) {
  std::vector<uint8_t> b;
  b.reserve(8 + payload.size());
  put16(b, sport);
  put16(b, dport);
  put16(b, uint16_t(8 + payload.size()));
  put16(b, 0);
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

inline std::vector<uint8_t> filler(size_t n) {
  std::vector<uint8_t> b(n);
  for (size_t i = 0; i < n; ++i) b[i] = uint8_t(i * 7 + 13);
  return b;
}

inline std::vector<uint8_t> tls_record(uint8_t content_type, size_t len) {
  std::vector<uint8_t> b;
  b.reserve(5 + len);
  b.push_back(content_type);
  b.push_back(3);
  b.push_back(3);
  put16(b, uint16_t(len));
  auto body = filler(len);
  b.insert(b.end(), body.begin(), body.end());
  return b;
}

inline void emit_session(const Session& s, bool tls, FrameBuilder& fb, const EmitOptions& opt) {
  const auto& ft = s.five_tuple;
  auto c2s = [&](double ts, const std::vector<uint8_t>& seg, bool frag) {
    fb.ip_packet(ts, ft.src_ip, ft.dst_ip, kIpProtoTcp, seg, frag);
  };
  auto s2c = [&](double ts, const std::vector<uint8_t>& seg, bool frag) {
    fb.ip_packet(ts, ft.dst_ip, ft.src_ip, kIpProtoTcp, seg, frag);
  };

  if (ft.proto == Transport::UDP) {
    for (const auto& e : s.events) {
      if (e.payload_len > 65507) throw InputError("UDP payload too large");
      auto body = filler(e.payload_len);
      if (e.dir == Direction::C2S)
        fb.ip_packet(e.ts, ft.src_ip, ft.dst_ip, kIpProtoUdp,
                     udp_datagram(ft.src_port, ft.dst_port, body), false);
      else
        fb.ip_packet(e.ts, ft.dst_ip, ft.src_ip, kIpProtoUdp,
                     udp_datagram(ft.dst_port, ft.src_port, body), false);
    }
    return;
  }

  uint32_t cseq = 1000, sseq = 5000;
  double t0 = s.start_time;
  c2s(t0, tcp_segment(ft.src_port, ft.dst_port, cseq, 0, kTcpSyn, {}), false);
  s2c(t0 + 0.001, tcp_segment(ft.dst_port, ft.src_port, sseq, cseq + 1, kTcpSyn | kTcpAck, {}),
      false);
  ++cseq;
  ++sseq;
  c2s(t0 + 0.002, tcp_segment(ft.src_port, ft.dst_port, cseq, sseq, kTcpAck, {}), false);

  double last = t0 + 0.002;
  for (const auto& e : s.events) {
    std::vector<uint8_t> body;
    if (tls) {
      if (e.payload_len > kTlsMaxRecordLen) throw InputError("TLS record too large");
      body = tls_record(kTlsApplicationData, e.payload_len);
    } else {
      if (e.payload_len > 65495) throw InputError("TCP payload too large");
      body = filler(e.payload_len);
    }
    bool from_client = e.dir == Direction::C2S;
    uint32_t& seq = from_client ? cseq : sseq;
    uint32_t ackno = from_client ? sseq : cseq;
    auto seg = from_client
                   ? tcp_segment(ft.src_port, ft.dst_port, seq, ackno, kTcpPsh | kTcpAck, body)
                   : tcp_segment(ft.dst_port, ft.src_port, seq, ackno, kTcpPsh | kTcpAck, body);
    if (from_client) {
      c2s(e.ts, seg, opt.fragment_data);
      if (opt.duplicate_data) c2s(e.ts + 0.0002, seg, opt.fragment_data);
    } else {
      s2c(e.ts, seg, opt.fragment_data);
      if (opt.duplicate_data) s2c(e.ts + 0.0002, seg, opt.fragment_data);
    }
    seq += uint32_t(body.size());
    last = e.ts;
  }
  c2s(last + 0.001, tcp_segment(ft.src_port, ft.dst_port, cseq, sseq, kTcpFin | kTcpAck, {}),
      false);
}

}  // namespace detail

// Writes the traces as a classic pcap whose re-ingestion reproduces every
// session's DirPiz sequences exactly.
inline void gen_pcap(const std::vector<HostTrace>& traces, const std::string& path,
                     const EmitOptions& opt = {}) {
  std::vector<detail::Frame> frames;
  detail::FrameBuilder fb(frames);
  for (const auto& trace : traces)
    for (const auto& s : trace.sessions) detail::emit_session(s, s.tls_detected, fb, opt);
  std::stable_sort(frames.begin(), frames.end(),
                   [](const detail::Frame& a, const detail::Frame& b) { return a.ts < b.ts; });
  PcapWriter w(path);
  for (const auto& f : frames) w.write_frame(f.ts, f.bytes);
}

inline void gen_pcap(const HostTrace& trace, const std::string& path,
                     const EmitOptions& opt = {}) {
  gen_pcap(std::vector<HostTrace>{trace}, path, opt);
}

}  // namespace mbtree

#endif  // MBTREE_SYNTHGEN_HPP
