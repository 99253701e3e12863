#ifndef MBTREE_IO_HPP
#define MBTREE_IO_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "detect.hpp"
#include "dirpiz.hpp"
#include "errors.hpp"
#include "eval.hpp"
#include "mltree.hpp"
#include "net.hpp"
#include "synthgen.hpp"

namespace mbtree {

inline constexpr int kSignatureFormatVersion = 1;

// ---------------------------------------------------------------------------
// Signature set JSON: the contract between `build` and `detect`
// ---------------------------------------------------------------------------

struct SignatureSet {
  uint32_t L{10};
  std::vector<Signature> signatures;
};

namespace detail {

inline nlohmann::json tree_to_json(const MLTree& t) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& lv : t.levels) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& [n, c] : lv.nodes) nodes.push_back({n, c});
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [e, c] : lv.edges) edges.push_back({e.first, e.second, c});
    levels.push_back({{"nodes", std::move(nodes)}, {"edges", std::move(edges)}});
  }
  return {{"levels", std::move(levels)}};
}

inline MLTree tree_from_json(const nlohmann::json& j, uint32_t L) {
  MLTree t;
  t.L = L;
  t.levels.resize(L);
  const auto& levels = j.at("levels");
  if (!levels.is_array() || levels.size() != L)
    throw FormatError("signature tree must carry exactly L levels");
  for (uint32_t l = 0; l < L; ++l) {
    for (const auto& n : levels[l].at("nodes")) {
      if (!n.is_array() || n.size() != 2) throw FormatError("node entry must be [dirpiz, count]");
      t.levels[l].nodes[n[0].get<DirPiz>()] = n[1].get<uint64_t>();
    }
    for (const auto& e : levels[l].at("edges")) {
      if (!e.is_array() || e.size() != 3)
        throw FormatError("edge entry must be [parent, child, count]");
      t.levels[l].edges[{e[0].get<DirPiz>(), e[1].get<DirPiz>()}] = e[2].get<uint64_t>();
    }
  }
  validate_tree(t);
  return t;
}

}  // namespace detail

inline void write_signatures(const SignatureSet& set, std::ostream& os) {
  nlohmann::json sigs = nlohmann::json::array();
  for (const auto& s : set.signatures) {
    nlohmann::json meta(s.meta);
    sigs.push_back({{"label", s.label},
                    {"duration", s.duration},
                    {"head", detail::tree_to_json(s.head)},
                    {"tail", detail::tree_to_json(s.tail)},
                    {"meta", std::move(meta)}});
  }
  nlohmann::json j = {
      {"version", kSignatureFormatVersion}, {"L", set.L}, {"signatures", std::move(sigs)}};
  os << j.dump(2) << '\n';
}

inline void write_signatures(const SignatureSet& set, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  write_signatures(set, f);
}

inline SignatureSet read_signatures(std::istream& is, const std::string& origin = "<stream>") {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(origin + ": not valid JSON: " + e.what());
  }
  try {
    if (j.at("version").get<int>() != kSignatureFormatVersion)
      throw FormatError(origin + ": unsupported signature format version");
    SignatureSet set;
    set.L = j.at("L").get<uint32_t>();
    if (set.L < 1) throw FormatError(origin + ": L must be positive");
    for (const auto& js : j.at("signatures")) {
      Signature s;
      s.label = js.at("label").get<std::string>();
      s.duration = js.at("duration").get<double>();
      if (s.label.empty()) throw FormatError(origin + ": empty signature label");
      if (!(s.duration > 0)) throw FormatError(origin + ": non-positive duration");
      s.head = detail::tree_from_json(js.at("head"), set.L);
      s.tail = detail::tree_from_json(js.at("tail"), set.L);
      if (js.contains("meta"))
        for (const auto& [k, v] : js.at("meta").items()) s.meta[k] = v.get<std::string>();
      set.signatures.push_back(std::move(s));
    }
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(origin + ": malformed signature set: " + e.what());
  }
}

inline SignatureSet read_signatures(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  return read_signatures(f, path);
}

// ---------------------------------------------------------------------------
// Detection reports: JSON lines and CSV
// ---------------------------------------------------------------------------

inline void write_report_jsonl(const std::vector<DetectionReport>& reports, std::ostream& os) {
  for (const auto& r : reports) {
    nlohmann::json j = {{"host", ip_to_string(r.host_ip)},
                        {"verdict", r.malicious ? "malicious" : "benign"},
                        {"max_log2_score", r.max_log2},
                        {"scores", r.scores_log2}};
    if (r.malicious) j["label"] = r.predicted_label;
    os << j.dump() << '\n';
  }
}

inline void write_report_csv(const std::vector<DetectionReport>& reports, std::ostream& os) {
  os << "host,verdict,label,max_log2_score\n";
  for (const auto& r : reports)
    os << ip_to_string(r.host_ip) << ',' << (r.malicious ? "malicious" : "benign") << ','
       << r.predicted_label << ',' << r.max_log2 << '\n';
}

struct ReportLine {
  std::string host;
  bool malicious{false};
  std::string label;  // empty when benign
  double max_log2{0};
};

inline std::vector<ReportLine> read_report_jsonl(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  std::vector<ReportLine> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      ReportLine r;
      r.host = j.at("host").get<std::string>();
      r.malicious = j.at("verdict").get<std::string>() == "malicious";
      if (j.contains("label")) r.label = j.at("label").get<std::string>();
      r.max_log2 = j.at("max_log2_score").get<double>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": bad report line: " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stoplist, truth labels, C&C address list
// ---------------------------------------------------------------------------

// One signed integer per line; blank lines and # comments ignored.
inline std::set<DirPiz> read_stoplist(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  std::set<DirPiz> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok) || tok[0] == '#') continue;
    try {
      size_t used = 0;
      long v = std::stol(tok, &used);
      if (used != tok.size() || v == 0 || v < -65535 || v > 65535) throw std::invalid_argument("");
      out.insert(DirPiz(v));
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": bad stoplist entry '" + tok +
                        "'");
    }
  }
  return out;
}

// host,label per line; a "host,label" header row is tolerated.
inline std::map<std::string, std::string> read_labels_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  std::map<std::string, std::string> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line == "host,label") continue;
    auto comma = line.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 == line.size())
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected host,label");
    out[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return out;
}

// One IPv4 address per line; blank lines and # comments ignored.
inline std::set<IpAddr> read_ip_list(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  std::set<IpAddr> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok) || tok[0] == '#') continue;
    auto ip = parse_ip(tok);
    if (!ip) throw FormatError(path + ":" + std::to_string(lineno) + ": bad IPv4 '" + tok + "'");
    out.insert(*ip);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Traffic template JSON
// ---------------------------------------------------------------------------

inline TrafficTemplate read_template(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": not valid JSON: " + e.what());
  }
  try {
    TrafficTemplate t;
    t.label = j.at("label").get<std::string>();
    for (const auto& v : j.at("handshake")) t.handshake.push_back(v.get<DirPiz>());
    if (j.contains("dynamic_slots"))
      for (const auto& s : j.at("dynamic_slots"))
        t.dynamic_slots.push_back({s.at("pos").get<uint32_t>(), s.at("min").get<DirPiz>(),
                                   s.at("max").get<DirPiz>()});
    t.sessions = j.at("sessions").get<uint32_t>();
    t.duration_s = j.at("duration_s").get<double>();
    if (j.contains("transport")) {
      std::string tr = j.at("transport").get<std::string>();
      if (tr == "tcp")
        t.transport = SynthTransport::Tcp;
      else if (tr == "tls")
        t.transport = SynthTransport::Tls;
      else if (tr == "udp")
        t.transport = SynthTransport::Udp;
      else
        throw FormatError(path + ": unknown transport '" + tr + "'");
    }
    validate_template(t);
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": malformed template: " + e.what());
  } catch (const InputError& e) {
    throw FormatError(path + ": invalid template: " + e.what());
  }
}

inline void write_template(const TrafficTemplate& t, const std::string& path) {
  nlohmann::json slots = nlohmann::json::array();
  for (const auto& s : t.dynamic_slots)
    slots.push_back({{"pos", s.pos}, {"min", s.min}, {"max", s.max}});
  const char* tr = t.transport == SynthTransport::Tcp   ? "tcp"
                   : t.transport == SynthTransport::Tls ? "tls"
                                                        : "udp";
  nlohmann::json j = {{"label", t.label},         {"handshake", t.handshake},
                      {"dynamic_slots", slots},   {"sessions", t.sessions},
                      {"duration_s", t.duration_s}, {"transport", tr}};
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Sweep CSV
// ---------------------------------------------------------------------------

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << "L,alpha,beta,theta,fpr,fnr,acc,macro_f1\n";
  for (const auto& r : rows)
    os << r.L << ',' << r.alpha << ',' << r.beta << ',' << r.theta << ',' << r.m.fpr << ','
       << r.m.fnr << ',' << r.m.acc << ',' << r.m.macro_f1 << '\n';
}

}  // namespace mbtree

#endif  // MBTREE_IO_HPP
