#ifndef MBTREE_TLS_HPP
#define MBTREE_TLS_HPP

#include <cstdint>
#include <vector>

namespace mbtree {

constexpr uint8_t kTlsChangeCipherSpec = 20;
constexpr uint8_t kTlsAlert = 21;
constexpr uint8_t kTlsHandshake = 22;
constexpr uint8_t kTlsApplicationData = 23;

// Max record body: 2^14 plaintext plus expansion allowance.
constexpr uint32_t kTlsMaxRecordLen = 16384 + 2048;

inline bool tls_header_plausible(uint8_t type, uint8_t ver_major, uint8_t ver_minor,
                                 uint32_t len) {
  return type >= kTlsChangeCipherSpec && type <= kTlsApplicationData &&
         ver_major == 3 && ver_minor <= 4 && len <= kTlsMaxRecordLen;
}

struct TlsRecord {
  uint8_t content_type{0};
  uint32_t length{0};
};

// Incremental record-layer scanner over one direction of a TCP byte stream.
// Only the 5-byte headers are interpreted; record bodies are skipped by count.
class TlsStreamScanner {
 public:
  enum class State : uint8_t { Undecided, Tls, Invalid };

  // Feeds one segment's bytes; records completed inside it are appended to
  // out. Invalid is sticky: once a header fails the plausibility check the
  // whole direction is considered non-TLS.
  void feed(const uint8_t* data, size_t len, std::vector<TlsRecord>& out) {
    if (state_ == State::Invalid) return;
    size_t i = 0;
    while (i < len) {
      if (body_remaining_ > 0) {
        size_t take = len - i < body_remaining_ ? len - i : body_remaining_;
        body_remaining_ -= take;
        i += take;
        if (body_remaining_ == 0) out.push_back(pending_);
        continue;
      }
      header_[header_len_++] = data[i++];
      if (header_len_ < 5) continue;
      header_len_ = 0;
      uint32_t rec_len = uint32_t(header_[3]) << 8 | header_[4];
      if (!tls_header_plausible(header_[0], header_[1], header_[2], rec_len)) {
        state_ = State::Invalid;
        return;
      }
      state_ = State::Tls;
      ever_tls_ = true;
      pending_ = TlsRecord{header_[0], rec_len};
      if (rec_len == 0)
        out.push_back(pending_);
      else
        body_remaining_ = rec_len;
    }
  }

  State state() const { return state_; }

  // True if at least one plausible header was ever accepted, even if the
  // stream later went Invalid.
  bool ever_tls() const { return ever_tls_; }

  // True when the stream ended mid-header or mid-record.
  bool incomplete() const { return header_len_ != 0 || body_remaining_ != 0; }

 private:
  State state_{State::Undecided};
  bool ever_tls_{false};
  uint8_t header_[5] = {0};
  size_t header_len_{0};
  size_t body_remaining_{0};
  TlsRecord pending_{};
};

}  // namespace mbtree

#endif  // MBTREE_TLS_HPP
