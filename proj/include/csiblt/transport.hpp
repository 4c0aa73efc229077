#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "csiblt/protocol.hpp"

namespace csiblt {

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SessionResult {
  bool completed = false;             // Done was emitted
  ReconcileOutcome outcome;           // valid when completed
  std::optional<AbortMsg> abort;      // set when the session aborted
  std::uint64_t sender_rows_emitted = 0;
  std::vector<std::uint8_t> bytes_to_receiver;  // recorded frames, in order
  std::vector<std::uint8_t> bytes_to_sender;
};

// Runs a whole session in process over an in-order byte queue. Every
// message still round-trips through the wire codec, and the raw frames are
// recorded in the result for replay checks.
//
// truncate_after_rows simulates a sender that dies mid-stream (the receiver
// then times out); 0 means no truncation.
SessionResult run_inproc_session(const std::vector<Element>& set_a,
                                 const std::vector<Element>& set_b, const SessionParams& params,
                                 Receiver::Options options = Receiver::Options(),
                                 std::uint64_t truncate_after_rows = 0);

// Blocking TCP endpoints speaking the framed wire format. Addresses are
// "host:port". Both return the session result from their own side's
// perspective; socket failures raise TransportError.
SessionResult run_tcp_sender(const std::string& connect_addr, const std::vector<Element>& set_a,
                             const SessionParams& params,
                             std::chrono::milliseconds timeout = std::chrono::milliseconds(30000));

SessionResult run_tcp_receiver(const std::string& listen_addr, const std::vector<Element>& set_b,
                               std::uint64_t expected_n, int expected_k,
                               Receiver::Options options = Receiver::Options(),
                               std::chrono::milliseconds timeout = std::chrono::milliseconds(30000));

}  // namespace csiblt
