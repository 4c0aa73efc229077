#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "csiblt/iblt.hpp"
#include "csiblt/measurement.hpp"
#include "csiblt/sparse_recovery.hpp"
#include "csiblt/wire.hpp"

namespace csiblt {

enum class DiffBound : std::uint8_t {
  kAtMostN = 0,   // d <= n, table length 2n
  kAtMost2N = 1,  // d <= 2n, table length 4n
};

struct SessionParams {
  std::uint64_t n = 0;  // declared upper bound on set sizes
  int k = 0;
  std::uint64_t b = 0;  // table length, fixed by n and d_bound
  std::uint64_t matrix_seed = 0;
  std::uint64_t hash_seed = 0;
  DiffBound d_bound = DiffBound::kAtMostN;

  bool operator==(const SessionParams&) const = default;
};

constexpr std::uint8_t kProtocolVersion = 1;

// Session parameter derivation: b = 2n for d <= n, 4n for d <= 2n.
SessionParams negotiate(std::uint64_t n, int k, DiffBound d_bound, std::uint64_t matrix_seed,
                        std::uint64_t hash_seed);

HelloMsg hello_from_params(const SessionParams& params);

// Rebuilds the receiver's params from a Hello; throws std::invalid_argument
// on a version or parameter mismatch (mapped to an Abort by the driver).
SessionParams params_from_hello(const HelloMsg& hello);

struct ReconcileOutcome {
  std::set<Element> delta_a;  // elements the sender has and the receiver lacks
  std::set<Element> delta_b;  // elements the receiver has and the sender lacks
  std::uint64_t rows_used = 0;
  std::uint64_t scalars_sent = 0;  // 64-bit scalar units of measurement traffic
  bool success = false;
};

// Streams measurement rows for a set until acknowledged or out of budget.
class Sender {
 public:
  // Throws std::invalid_argument if the set exceeds n or holds an invalid
  // element.
  Sender(const std::vector<Element>& set_a, const SessionParams& params);

  HelloMsg hello() const { return hello_from_params(params_); }

  // Next Row message, or nullopt once all b rows have been emitted.
  std::optional<RowMsg> next_row();

  void acknowledge() { finished_ = true; }
  bool finished() const { return finished_; }
  std::uint64_t rows_emitted() const { return next_row_; }
  const Iblt& table() const { return table_; }

 private:
  SessionParams params_;
  Iblt table_;
  MatrixSpec spec_;
  std::uint64_t next_row_ = 0;
  bool finished_ = false;
};

// Consumes measurement rows, attempting a recovery of the difference table
// after each one, and decides when the session is over.
class Receiver {
 public:
  struct Options {
    std::uint64_t attempt_every = 1;  // recovery attempt cadence, in rows
    SolverConfig solver;
  };

  struct Step {
    enum class Kind { kContinue, kDone, kAbort } kind = Kind::kContinue;
    ReconcileOutcome outcome;  // populated when kind == kDone
    AbortMsg abort;            // populated when kind == kAbort
  };

  Receiver(const std::vector<Element>& set_b, const SessionParams& params);
  Receiver(const std::vector<Element>& set_b, const SessionParams& params, Options options);

  // Feed the next Row. Rows must arrive with consecutive indices from 0;
  // a gap or repeat aborts the session.
  Step on_row(const RowMsg& row);

  // The sender went silent: timeout if rows remained, budget exhaustion
  // otherwise.
  Step on_stream_end();

  std::uint64_t rows_received() const { return rows_; }
  const std::optional<ReconcileOutcome>& outcome() const { return outcome_; }

 private:
  Step attempt_recovery();

  SessionParams params_;
  Options options_;
  Iblt table_;
  MatrixSpec spec_;
  Eigen::MatrixXd phi_;        // rows 0..rows_-1 are valid
  Eigen::VectorXd diff_sum_;   // received y_sum minus own y_sum
  Eigen::VectorXd diff_count_;
  std::uint64_t rows_ = 0;
  std::optional<ReconcileOutcome> outcome_;
};

// Splits a successful extraction into the two difference sets. Requires
// extract.success; throws std::invalid_argument otherwise.
std::pair<std::set<Element>, std::set<Element>> classify(const ExtractResult& extract);

struct InconsistentDeltas : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// (s_b union delta_a) minus delta_b. The preconditions delta_b subset of
// s_b and delta_a disjoint from s_b are enforced; a violation means a bad
// recovery slipped through and raises InconsistentDeltas instead of being
// silently repaired.
std::set<Element> apply_reconciliation(const std::set<Element>& s_b,
                                       const std::set<Element>& delta_a,
                                       const std::set<Element>& delta_b);

}  // namespace csiblt
