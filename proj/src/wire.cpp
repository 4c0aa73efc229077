#include "csiblt/wire.hpp"

#include <bit>
#include <cstring>
#include <limits>

namespace csiblt {

static_assert(std::numeric_limits<double>::is_iec559, "wire format requires IEEE-754 doubles");

namespace {

constexpr std::uint8_t kTypeHello = 0x01;
constexpr std::uint8_t kTypeRow = 0x02;
constexpr std::uint8_t kTypeDone = 0x03;
constexpr std::uint8_t kTypeAbort = 0x04;

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }

  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t count) const {
    if (pos_ + count > bytes_.size()) throw WireError("wire: truncated frame");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> frame(std::uint8_t type, const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> out;
  out.reserve(5 + payload.size());
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  put_u8(out, type);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_message(const Message& msg) {
  std::vector<std::uint8_t> payload;
  std::uint8_t type = 0;
  if (const auto* hello = std::get_if<HelloMsg>(&msg)) {
    type = kTypeHello;
    put_u8(payload, hello->version);
    put_u64(payload, hello->n);
    put_u8(payload, hello->k);
    put_u64(payload, hello->b);
    put_u64(payload, hello->matrix_seed);
    put_u64(payload, hello->hash_seed);
    put_u8(payload, hello->d_bound);
  } else if (const auto* row = std::get_if<RowMsg>(&msg)) {
    type = kTypeRow;
    put_u32(payload, row->index);
    put_f64(payload, row->y_sum);
    put_f64(payload, row->y_count);
  } else if (const auto* done = std::get_if<DoneMsg>(&msg)) {
    type = kTypeDone;
    put_u32(payload, done->delta_a_size);
    put_u32(payload, done->delta_b_size);
  } else {
    type = kTypeAbort;
    put_u8(payload, static_cast<std::uint8_t>(std::get<AbortMsg>(msg).reason));
  }
  return frame(type, payload);
}

std::size_t frame_bytes_missing(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5) return 5 - bytes.size();
  std::uint32_t payload_len = 0;
  for (int i = 0; i < 4; ++i) payload_len |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  const std::size_t total = 5 + static_cast<std::size_t>(payload_len);
  return bytes.size() >= total ? 0 : total - bytes.size();
}

Message decode_message(std::span<const std::uint8_t> bytes, std::size_t& consumed) {
  Reader header(bytes);
  const std::uint32_t payload_len = header.u32();
  const std::uint8_t type = header.u8();
  if (bytes.size() < 5 + static_cast<std::size_t>(payload_len)) {
    throw WireError("wire: truncated frame");
  }

  Reader body(bytes.subspan(5, payload_len));
  Message msg;
  switch (type) {
    case kTypeHello: {
      HelloMsg hello;
      hello.version = body.u8();
      hello.n = body.u64();
      hello.k = body.u8();
      hello.b = body.u64();
      hello.matrix_seed = body.u64();
      hello.hash_seed = body.u64();
      hello.d_bound = body.u8();
      msg = hello;
      break;
    }
    case kTypeRow: {
      RowMsg row;
      row.index = body.u32();
      row.y_sum = body.f64();
      row.y_count = body.f64();
      msg = row;
      break;
    }
    case kTypeDone: {
      DoneMsg done;
      done.delta_a_size = body.u32();
      done.delta_b_size = body.u32();
      msg = done;
      break;
    }
    case kTypeAbort: {
      const std::uint8_t reason = body.u8();
      if (reason > 3) throw WireError("wire: unknown abort reason");
      msg = AbortMsg{static_cast<AbortReason>(reason)};
      break;
    }
    default:
      throw WireError("wire: unknown message type");
  }
  if (body.position() != payload_len) throw WireError("wire: payload length mismatch");
  consumed = 5 + static_cast<std::size_t>(payload_len);
  return msg;
}

}  // namespace csiblt
