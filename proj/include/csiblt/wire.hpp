#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace csiblt {

// Wire-level messages. A session is one Hello, then Rows with consecutive
// indices, terminated by exactly one Done or Abort.
struct HelloMsg {
  std::uint8_t version = 1;
  std::uint64_t n = 0;
  std::uint8_t k = 0;
  std::uint64_t b = 0;
  std::uint64_t matrix_seed = 0;
  std::uint64_t hash_seed = 0;
  std::uint8_t d_bound = 0;  // 0 = differences at most n, 1 = at most 2n

  bool operator==(const HelloMsg&) const = default;
};

struct RowMsg {
  std::uint32_t index = 0;
  double y_sum = 0.0;
  double y_count = 0.0;

  bool operator==(const RowMsg&) const = default;
};

struct DoneMsg {
  std::uint32_t delta_a_size = 0;
  std::uint32_t delta_b_size = 0;

  bool operator==(const DoneMsg&) const = default;
};

enum class AbortReason : std::uint8_t {
  kOutOfOrder = 0,
  kTimeout = 1,
  kParameterRejection = 2,
  kRowBudgetExhausted = 3,
};

struct AbortMsg {
  AbortReason reason = AbortReason::kTimeout;

  bool operator==(const AbortMsg&) const = default;
};

using Message = std::variant<HelloMsg, RowMsg, DoneMsg, AbortMsg>;

struct WireError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Frame layout, little-endian throughout:
//   u32 payload length | u8 message type | payload
// Types: 0x01 Hello, 0x02 Row, 0x03 Done, 0x04 Abort. Doubles travel as
// IEEE-754 binary64 bit patterns.
std::vector<std::uint8_t> encode_message(const Message& msg);

// Decodes one complete frame; throws WireError on truncation, unknown type,
// or a length/type mismatch. `consumed` reports the frame size in bytes.
Message decode_message(std::span<const std::uint8_t> bytes, std::size_t& consumed);

// Bytes needed before the frame at the front of `bytes` is complete, or 0
// if a whole frame is present.
std::size_t frame_bytes_missing(std::span<const std::uint8_t> bytes);

}  // namespace csiblt
