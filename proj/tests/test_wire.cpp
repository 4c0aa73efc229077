#include "csiblt/wire.hpp"

#include <vector>

#include "doctest.h"

using namespace csiblt;

namespace {

std::vector<std::uint8_t> bytes(std::initializer_list<int> v) {
  std::vector<std::uint8_t> out;
  for (const int x : v) out.push_back(static_cast<std::uint8_t>(x));
  return out;
}

}  // namespace

TEST_CASE("hello golden bytes") {
  HelloMsg hello;
  hello.version = 1;
  hello.n = 7;
  hello.k = 2;
  hello.b = 14;
  hello.matrix_seed = 0x0123456789abcdefULL;
  hello.hash_seed = 0xfedcba9876543210ULL;
  hello.d_bound = 0;

  const auto golden = bytes({
      0x23, 0x00, 0x00, 0x00,                          // payload length = 35
      0x01,                                            // type Hello
      0x01,                                            // version
      0x07, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,  // n = 7
      0x02,                                            // k = 2
      0x0e, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,  // b = 14
      0xef, 0xcd, 0xab, 0x89, 0x67, 0x45, 0x23, 0x01,  // matrix seed
      0x10, 0x32, 0x54, 0x76, 0x98, 0xba, 0xdc, 0xfe,  // hash seed
      0x00,                                            // d bound
  });

  CHECK(encode_message(hello) == golden);

  std::size_t consumed = 0;
  const Message decoded = decode_message(golden, consumed);
  CHECK(consumed == golden.size());
  CHECK(std::get<HelloMsg>(decoded) == hello);
  CHECK(encode_message(decoded) == golden);
}

TEST_CASE("row golden bytes") {
  const RowMsg row{3, 1.5, -0.25};

  const auto golden = bytes({
      0x14, 0x00, 0x00, 0x00,                          // payload length = 20
      0x02,                                            // type Row
      0x03, 0x00, 0x00, 0x00,                          // index = 3
      0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xf8, 0x3f,  // 1.5
      0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xd0, 0xbf,  // -0.25
  });

  CHECK(encode_message(Message{row}) == golden);

  std::size_t consumed = 0;
  const Message decoded = decode_message(golden, consumed);
  CHECK(consumed == golden.size());
  CHECK(std::get<RowMsg>(decoded) == row);
  CHECK(encode_message(decoded) == golden);
}

TEST_CASE("done golden bytes") {
  const DoneMsg done{1, 1};
  const auto golden = bytes({
      0x08, 0x00, 0x00, 0x00,  // payload length = 8
      0x03,                    // type Done
      0x01, 0x00, 0x00, 0x00,  // |delta_a| = 1
      0x01, 0x00, 0x00, 0x00,  // |delta_b| = 1
  });
  CHECK(encode_message(Message{done}) == golden);
  std::size_t consumed = 0;
  CHECK(std::get<DoneMsg>(decode_message(golden, consumed)) == done);
}

TEST_CASE("abort golden bytes") {
  const AbortMsg abort{AbortReason::kParameterRejection};
  const auto golden = bytes({
      0x01, 0x00, 0x00, 0x00,  // payload length = 1
      0x04,                    // type Abort
      0x02,                    // reason = parameter rejection
  });
  CHECK(encode_message(Message{abort}) == golden);
  std::size_t consumed = 0;
  CHECK(std::get<AbortMsg>(decode_message(golden, consumed)) == abort);
}

TEST_CASE("decode rejects malformed frames") {
  std::size_t consumed = 0;

  // truncated header
  CHECK_THROWS_AS(decode_message(bytes({0x01, 0x00}), consumed), WireError);

  // header promises more payload than present
  CHECK_THROWS_AS(decode_message(bytes({0x08, 0x00, 0x00, 0x00, 0x03, 0x01}), consumed), WireError);

  // unknown message type
  CHECK_THROWS_AS(decode_message(bytes({0x01, 0x00, 0x00, 0x00, 0x09, 0x00}), consumed), WireError);

  // declared length disagrees with the type's payload
  CHECK_THROWS_AS(decode_message(bytes({0x02, 0x00, 0x00, 0x00, 0x04, 0x00, 0x00}), consumed),
                  WireError);

  // unknown abort reason
  CHECK_THROWS_AS(decode_message(bytes({0x01, 0x00, 0x00, 0x00, 0x04, 0x07}), consumed), WireError);
}

TEST_CASE("frame_bytes_missing tracks partial frames") {
  const auto full = encode_message(Message{DoneMsg{2, 3}});
  CHECK(frame_bytes_missing(full) == 0);

  const std::vector<std::uint8_t> header_only(full.begin(), full.begin() + 3);
  CHECK(frame_bytes_missing(header_only) == 2);

  const std::vector<std::uint8_t> partial(full.begin(), full.end() - 4);
  CHECK(frame_bytes_missing(partial) == 4);
}

TEST_CASE("round-trip across random messages") {
  // Property: encode then decode is the identity, and re-encode is
  // byte-identical.
  std::vector<Message> samples = {
      HelloMsg{1, 1000, 3, 4000, 42, 43, 1},
      RowMsg{0, 0.0, 0.0},
      RowMsg{4294967295u, -1e300, 1e-300},
      DoneMsg{0, 0},
      AbortMsg{AbortReason::kOutOfOrder},
      AbortMsg{AbortReason::kRowBudgetExhausted},
  };
  for (const auto& msg : samples) {
    const auto encoded = encode_message(msg);
    std::size_t consumed = 0;
    const auto decoded = decode_message(encoded, consumed);
    CHECK(consumed == encoded.size());
    CHECK(encode_message(decoded) == encoded);
  }
}
