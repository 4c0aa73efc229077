#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "csiblt/protocol.hpp"

namespace csiblt {

// One reconciliation problem: two element sets with an exactly controlled
// total difference size d = |delta_a| + |delta_b|.
struct Instance {
  std::vector<Element> s_a;
  std::vector<Element> s_b;
  std::uint64_t n = 0;
  std::uint64_t d = 0;
  std::uint64_t rng_seed = 0;
};

// |s_a| = n, |delta_a| = ceil(d/2), |delta_b| = floor(d/2); for odd d the
// receiver set is one element short of n, since both size and difference
// constraints cannot hold at once. Elements are drawn without replacement
// from [1, universe_max]. Throws std::invalid_argument for d > n or a
// universe too small to hold the sample.
Instance gen_instance(std::uint64_t n, std::uint64_t d, std::uint64_t rng_seed,
                      std::uint64_t universe_max = kElementMax);

enum class ProtocolKind { kCsIblt, kIbltGuess, kNaive, kBloom };
enum class TransportKind { kInProc, kTcp };

std::string protocol_name(ProtocolKind kind);
ProtocolKind protocol_from_name(const std::string& name);  // throws on unknown names

struct TrialOptions {
  TransportKind transport = TransportKind::kInProc;
  std::uint32_t bloom_bits_per_element = 10;
  std::uint64_t bloom_universe_max = 1'000'000;
  Receiver::Options receiver;
  std::string tcp_addr = "127.0.0.1:0";  // resolved per call when used
};

struct TrialRecord {
  std::string protocol;
  std::uint64_t n = 0;
  int k = 0;
  std::uint64_t d = 0;
  std::uint64_t trial = 0;      // trial index within the sweep
  std::uint64_t trial_seed = 0;
  std::uint64_t scalars_sent = 0;
  std::uint64_t rows_used = 0;  // CS-IBLT only; zero elsewhere
  std::uint32_t rounds = 0;
  bool success = false;         // oracle comparison, never the protocol's claim
  double wall_ms = 0.0;
};

// Runs one end-to-end trial. Success is decided by comparing the protocol's
// deltas against brute force and replaying the reconciliation rule; any
// protocol-level abort or delta inconsistency is a failed (never throwing)
// trial.
TrialRecord run_trial(const Instance& instance, ProtocolKind protocol, int k,
                      const TrialOptions& options = {});

struct SweepConfig {
  std::uint64_t n = 200;
  int k = 2;
  std::vector<std::uint64_t> d_values;
  std::uint64_t trials_per_d = 10;
  std::vector<ProtocolKind> protocols;
  std::uint64_t base_seed = 0x5eedc0defeedULL;
  int jobs = 1;
  TrialOptions trial_options;
};

// Deterministic derivation of a trial's instance seed.
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t d, std::uint64_t trial);

// Session parameters both hosts derive from an instance seed; the sender
// owns the seeds and ships them in its Hello.
SessionParams derive_session_params(std::uint64_t instance_seed, std::uint64_t n, int k);

// One record per (protocol, d, trial), in that order regardless of job
// count. Bloom trials draw their instances from the small enumerable
// universe in TrialOptions; everything else uses the full element range.
std::vector<TrialRecord> sweep(const SweepConfig& config);

constexpr const char* kCsvHeader = "protocol,n,k,d,trial,scalars_sent,rows_used,rounds,success,wall_ms";

void write_csv(const std::vector<TrialRecord>& records, std::ostream& out);
void write_csv_file(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> read_csv(std::istream& in);  // throws std::runtime_error on malformed input
std::vector<TrialRecord> read_csv_file(const std::string& path);

}  // namespace csiblt
