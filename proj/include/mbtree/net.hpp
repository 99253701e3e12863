#ifndef MBTREE_NET_HPP
#define MBTREE_NET_HPP

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace mbtree {

// IPv4 address in host byte order.
using IpAddr = uint32_t;

inline std::string ip_to_string(IpAddr ip) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (ip >> 24) & 0xff,
                (ip >> 16) & 0xff, (ip >> 8) & 0xff, ip & 0xff);
  return buf;
}

inline std::optional<IpAddr> parse_ip(const std::string& s) {
  unsigned a, b, c, d;
  char tail;
  if (std::sscanf(s.c_str(), "%u.%u.%u.%u%c", &a, &b, &c, &d, &tail) != 4)
    return std::nullopt;
  if (a > 255 || b > 255 || c > 255 || d > 255) return std::nullopt;
  return (a << 24) | (b << 16) | (c << 8) | d;
}

// "a.b.c.d/len" prefix; len 0 matches everything.
struct Cidr {
  IpAddr base{0};
  int prefix_len{0};

  bool contains(IpAddr ip) const {
    if (prefix_len == 0) return true;
    IpAddr mask = prefix_len >= 32 ? 0xffffffffu : ~((1u << (32 - prefix_len)) - 1);
    return (ip & mask) == (base & mask);
  }
};

inline Cidr parse_cidr(const std::string& s) {
  auto slash = s.find('/');
  std::string addr = slash == std::string::npos ? s : s.substr(0, slash);
  int len = 32;
  if (slash != std::string::npos) {
    try {
      len = std::stoi(s.substr(slash + 1));
    } catch (const std::exception&) {
      throw FormatError("bad CIDR prefix length: " + s);
    }
  }
  auto ip = parse_ip(addr);
  if (!ip || len < 0 || len > 32) throw FormatError("bad CIDR: " + s);
  return Cidr{*ip, len};
}

inline bool matches_any(IpAddr ip, const std::vector<Cidr>& prefixes) {
  for (const auto& p : prefixes)
    if (p.contains(ip)) return true;
  return false;
}

inline bool is_loopback(IpAddr ip) { return (ip >> 24) == 127; }

}  // namespace mbtree

#endif  // MBTREE_NET_HPP
