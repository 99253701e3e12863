#ifndef MBTREE_PCAP_HPP
#define MBTREE_PCAP_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "net.hpp"

namespace mbtree {

// Classic pcap only (magic 0xa1b2c3d4 / 0xd4c3b2a1), Ethernet link layer.
constexpr uint32_t kPcapMagic = 0xa1b2c3d4u;
constexpr uint32_t kPcapMagicSwapped = 0xd4c3b2a1u;
constexpr uint32_t kLinkTypeEthernet = 1;

constexpr uint16_t kEtherTypeIp4 = 0x0800;
constexpr uint16_t kEtherTypeVlan = 0x8100;
constexpr uint16_t kEtherTypeQinQ = 0x88a8;

constexpr uint8_t kIpProtoTcp = 6;
constexpr uint8_t kIpProtoUdp = 17;

constexpr uint8_t kTcpFin = 0x01;
constexpr uint8_t kTcpSyn = 0x02;
constexpr uint8_t kTcpRst = 0x04;
constexpr uint8_t kTcpPsh = 0x08;
constexpr uint8_t kTcpAck = 0x10;

enum class Transport : uint8_t { TCP, UDP, OTHER };

// Fragment placement; offset already converted to bytes.
struct FragInfo {
  uint16_t id{0};
  uint16_t offset{0};
  bool more{false};
};

// One decoded IPv4 packet. For fragments the transport header is not parsed:
// proto stays OTHER, ports/flags absent, payload holds the raw IP payload
// slice, and ip_proto keeps the protocol number for regrouping.
struct RawPacket {
  double ts{0.0};
  IpAddr src_ip{0};
  IpAddr dst_ip{0};
  Transport proto{Transport::OTHER};
  uint8_t ip_proto{0};
  std::optional<uint16_t> src_port;
  std::optional<uint16_t> dst_port;
  std::optional<uint8_t> tcp_flags;
  std::optional<uint32_t> tcp_seq;
  std::optional<FragInfo> frag;
  uint32_t payload_len{0};        // declared transport payload length
  std::vector<uint8_t> payload;   // captured bytes; may be shorter than payload_len
};

struct ReadStats {
  uint64_t frames{0};
  uint64_t non_ip{0};
  uint64_t malformed{0};
  uint64_t truncated_tail{0};
};

namespace wire {

inline uint16_t be16(const uint8_t* p) { return uint16_t(p[0]) << 8 | p[1]; }
inline uint32_t be32(const uint8_t* p) {
  return uint32_t(p[0]) << 24 | uint32_t(p[1]) << 16 | uint32_t(p[2]) << 8 | p[3];
}
inline uint16_t u16(const uint8_t* p, bool swap) {
  return swap ? uint16_t(p[0]) << 8 | p[1] : uint16_t(p[1]) << 8 | p[0];
}
inline uint32_t u32(const uint8_t* p, bool swap) {
  return swap ? be32(p)
              : uint32_t(p[3]) << 24 | uint32_t(p[2]) << 16 | uint32_t(p[1]) << 8 | p[0];
}

}  // namespace wire

// Parses the transport header out of an IP payload and fills the
// protocol-specific fields of pkt (pkt.ip_proto must be set). declared_len is
// the IP payload length from the header; avail is what was actually captured.
// Also used on reassembled fragment buffers, where avail == declared_len.
inline bool parse_transport(RawPacket& pkt, const uint8_t* ip_payload,
                            size_t avail, uint32_t declared_len) {
  if (pkt.ip_proto == kIpProtoTcp) {
    if (avail < 20) return false;
    size_t doff = size_t(ip_payload[12] >> 4) * 4;
    if (doff < 20 || declared_len < doff) return false;
    pkt.proto = Transport::TCP;
    pkt.src_port = wire::be16(ip_payload);
    pkt.dst_port = wire::be16(ip_payload + 2);
    pkt.tcp_seq = wire::be32(ip_payload + 4);
    pkt.tcp_flags = ip_payload[13];
    pkt.payload_len = declared_len - uint32_t(doff);
    if (avail > doff) pkt.payload.assign(ip_payload + doff, ip_payload + avail);
  } else if (pkt.ip_proto == kIpProtoUdp) {
    if (avail < 8) return false;
    uint16_t udp_len = wire::be16(ip_payload + 4);
    if (udp_len < 8 || udp_len > declared_len) return false;
    pkt.proto = Transport::UDP;
    pkt.src_port = wire::be16(ip_payload);
    pkt.dst_port = wire::be16(ip_payload + 2);
    pkt.payload_len = uint32_t(udp_len) - 8;
    if (avail > 8) {
      size_t have = avail - 8;
      if (have > pkt.payload_len) have = pkt.payload_len;
      pkt.payload.assign(ip_payload + 8, ip_payload + 8 + have);
    }
  } else {
    pkt.proto = Transport::OTHER;
    pkt.payload_len = declared_len;
    pkt.payload.assign(ip_payload, ip_payload + avail);
  }
  return true;
}

// Decodes one Ethernet frame into a RawPacket. Returns nullopt for non-IPv4
// frames or frames too short to carry the claimed headers.
inline std::optional<RawPacket> decode_ethernet_ipv4(const uint8_t* frame, size_t len,
                                                     double ts, ReadStats& stats) {
  if (len < 14) {
    ++stats.malformed;
    return std::nullopt;
  }
  size_t off = 12;
  uint16_t ethertype = wire::be16(frame + off);
  off += 2;
  // Unwrap at most one VLAN tag.
  if (ethertype == kEtherTypeVlan || ethertype == kEtherTypeQinQ) {
    if (len < off + 4) {
      ++stats.malformed;
      return std::nullopt;
    }
    ethertype = wire::be16(frame + off + 2);
    off += 4;
  }
  if (ethertype != kEtherTypeIp4) {
    ++stats.non_ip;
    return std::nullopt;
  }
  if (len < off + 20) {
    ++stats.malformed;
    return std::nullopt;
  }
  const uint8_t* ip = frame + off;
  uint8_t version = ip[0] >> 4;
  size_t ihl = size_t(ip[0] & 0x0f) * 4;
  if (version != 4 || ihl < 20 || len < off + ihl) {
    ++stats.malformed;
    return std::nullopt;
  }
  uint16_t total_len = wire::be16(ip + 2);
  if (total_len < ihl) {
    ++stats.malformed;
    return std::nullopt;
  }
  size_t ip_avail = len - off;
  if (total_len < ip_avail) ip_avail = total_len;

  RawPacket pkt;
  pkt.ts = ts;
  pkt.src_ip = wire::be32(ip + 12);
  pkt.dst_ip = wire::be32(ip + 16);
  pkt.ip_proto = ip[9];

  uint16_t frag_field = wire::be16(ip + 6);
  bool more = (frag_field & 0x2000) != 0;
  uint16_t frag_off = uint16_t((frag_field & 0x1fff) * 8);
  const uint8_t* ip_payload = ip + ihl;
  size_t ip_payload_avail = ip_avail > ihl ? ip_avail - ihl : 0;
  uint32_t ip_payload_len = total_len - uint32_t(ihl);

  if (more || frag_off > 0) {
    pkt.frag = FragInfo{wire::be16(ip + 4), frag_off, more};
    pkt.payload_len = ip_payload_len;
    pkt.payload.assign(ip_payload, ip_payload + ip_payload_avail);
    return pkt;
  }

  if (!parse_transport(pkt, ip_payload, ip_payload_avail, ip_payload_len)) {
    ++stats.malformed;
    return std::nullopt;
  }
  return pkt;
}

// Reads every IPv4 packet of a classic pcap file, in file order. Non-IP frames
// are skipped and counted; a truncated trailing record is skipped and counted.
inline std::vector<RawPacket> read_capture(const std::string& path,
                                           ReadStats* stats_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open capture file: " + path);

  uint8_t hdr[24];
  in.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
  if (in.gcount() != sizeof(hdr))
    throw FormatError("not a pcap file (short global header): " + path);

  uint32_t magic_le = wire::u32(hdr, false);
  bool swap;
  if (magic_le == kPcapMagic)
    swap = false;
  else if (magic_le == kPcapMagicSwapped)
    swap = true;
  else
    throw FormatError("bad pcap magic number in " + path);

  uint32_t link_type = wire::u32(hdr + 20, swap);
  if (link_type != kLinkTypeEthernet)
    throw FormatError("unsupported pcap link type " + std::to_string(link_type) +
                      " (expect Ethernet) in " + path);

  ReadStats stats;
  std::vector<RawPacket> packets;
  std::vector<uint8_t> frame;
  for (;;) {
    uint8_t rec[16];
    in.read(reinterpret_cast<char*>(rec), sizeof(rec));
    auto got = in.gcount();
    if (got == 0) break;
    if (got != sizeof(rec)) {
      ++stats.truncated_tail;
      break;
    }
    uint32_t ts_sec = wire::u32(rec, swap);
    uint32_t ts_usec = wire::u32(rec + 4, swap);
    uint32_t incl_len = wire::u32(rec + 8, swap);
    if (incl_len > (64u << 20))
      throw FormatError("implausible pcap record length in " + path);
    frame.resize(incl_len);
    in.read(reinterpret_cast<char*>(frame.data()), incl_len);
    if (in.gcount() != std::streamsize(incl_len)) {
      ++stats.truncated_tail;
      break;
    }
    ++stats.frames;
    double ts = double(ts_sec) + double(ts_usec) * 1e-6;
    if (auto pkt = decode_ethernet_ipv4(frame.data(), frame.size(), ts, stats))
      packets.push_back(std::move(*pkt));
  }
  if (stats_out) *stats_out = stats;
  return packets;
}

// Writes classic pcap (little-endian, microsecond timestamps, Ethernet).
class PcapWriter {
 public:
  explicit PcapWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot create pcap file: " + path);
    uint8_t hdr[24] = {0};
    put32(hdr, kPcapMagic);
    put16(hdr + 4, 2);
    put16(hdr + 6, 4);
    put32(hdr + 16, 65535);
    put32(hdr + 20, kLinkTypeEthernet);
    out_.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
  }

  void write_frame(double ts, const std::vector<uint8_t>& frame) {
    uint8_t rec[16];
    auto sec = uint32_t(ts);
    auto usec = uint32_t((ts - double(sec)) * 1e6 + 0.5);
    if (usec >= 1000000) {
      ++sec;
      usec -= 1000000;
    }
    put32(rec, sec);
    put32(rec + 4, usec);
    put32(rec + 8, uint32_t(frame.size()));
    put32(rec + 12, uint32_t(frame.size()));
    out_.write(reinterpret_cast<const char*>(rec), sizeof(rec));
    out_.write(reinterpret_cast<const char*>(frame.data()),
               std::streamsize(frame.size()));
    if (!out_) throw IoError("pcap write failed");
  }

 private:
  static void put16(uint8_t* p, uint16_t v) {
    p[0] = uint8_t(v);
    p[1] = uint8_t(v >> 8);
  }
  static void put32(uint8_t* p, uint32_t v) {
    p[0] = uint8_t(v);
    p[1] = uint8_t(v >> 8);
    p[2] = uint8_t(v >> 16);
    p[3] = uint8_t(v >> 24);
  }
  std::ofstream out_;
};

}  // namespace mbtree

#endif  // MBTREE_PCAP_HPP
