#include "csiblt/protocol.hpp"

#include <set>
#include <vector>

#include "csiblt/harness.hpp"
#include "csiblt/hashing.hpp"
#include "csiblt/transport.hpp"
#include "doctest.h"

using namespace csiblt;

namespace {

const std::vector<Element> kSetA{1, 2, 3, 4, 5, 6, 7};
const std::vector<Element> kSetB{2, 3, 4, 5, 6, 7, 8};

SessionParams small_params(std::uint64_t matrix_seed = 11, std::uint64_t hash_seed = 7) {
  return negotiate(7, 2, DiffBound::kAtMostN, matrix_seed, hash_seed);
}

}  // namespace

TEST_CASE("negotiate sizes the table from the difference bound") {
  CHECK(negotiate(7, 2, DiffBound::kAtMostN, 0, 0).b == 14);
  CHECK(negotiate(200, 2, DiffBound::kAtMostN, 0, 0).b == 400);
  CHECK(negotiate(100, 3, DiffBound::kAtMost2N, 0, 0).b == 400);
  CHECK_THROWS_AS(negotiate(0, 2, DiffBound::kAtMostN, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(negotiate(5, 1, DiffBound::kAtMostN, 0, 0), std::invalid_argument);
}

TEST_CASE("hello round-trips the session parameters") {
  const SessionParams params = negotiate(31, 3, DiffBound::kAtMost2N, 100, 200);
  CHECK(params_from_hello(hello_from_params(params)) == params);

  HelloMsg bad_version = hello_from_params(params);
  bad_version.version = 9;
  CHECK_THROWS_AS(params_from_hello(bad_version), std::invalid_argument);

  HelloMsg bad_b = hello_from_params(params);
  bad_b.b = 999;
  CHECK_THROWS_AS(params_from_hello(bad_b), std::invalid_argument);
}

TEST_CASE("sender starts empty and streams rows in order") {
  const SessionParams params = small_params();
  Sender empty_sender({}, params);
  CHECK(empty_sender.table().is_zero());

  Sender sender(kSetA, params);
  const auto first = sender.next_row();
  REQUIRE(first.has_value());
  CHECK(first->index == 0);

  // rows match an independent re-encoding
  const MeasurementRow oracle =
      encode_row(sender.table(), MatrixSpec::for_table(params.matrix_seed, params.b), 1);
  const auto second = sender.next_row();
  REQUIRE(second.has_value());
  CHECK(second->index == 1);
  CHECK(second->y_sum == oracle.y_sum);
  CHECK(second->y_count == oracle.y_count);
}

TEST_CASE("sender exhausts after b rows") {
  const SessionParams params = small_params();
  Sender sender(kSetA, params);
  for (std::uint64_t i = 0; i < params.b; ++i) {
    const auto row = sender.next_row();
    REQUIRE(row.has_value());
    CHECK(row->index == i);
  }
  CHECK_FALSE(sender.next_row().has_value());
  CHECK(sender.finished());
}

TEST_CASE("oversized sets are rejected") {
  std::vector<Element> too_big;
  for (Element e = 1; e <= 8; ++e) too_big.push_back(e);
  CHECK_THROWS_AS(Sender(too_big, small_params()), std::invalid_argument);
  CHECK_THROWS_AS(Receiver(too_big, small_params()), std::invalid_argument);
  CHECK_THROWS_AS(Sender({0}, small_params()), std::invalid_argument);
}

TEST_CASE("identical sets finish after a single row") {
  const SessionParams params = small_params();
  Sender sender(kSetA, params);
  Receiver receiver(kSetA, params);
  const auto row = sender.next_row();
  REQUIRE(row.has_value());
  const auto step = receiver.on_row(*row);
  REQUIRE(step.kind == Receiver::Step::Kind::kDone);
  CHECK(step.outcome.delta_a.empty());
  CHECK(step.outcome.delta_b.empty());
  CHECK(step.outcome.rows_used == 1);
  CHECK(step.outcome.scalars_sent == 2);
}

TEST_CASE("walkthrough scenario reconciles within the table budget") {
  const SessionParams params = small_params();
  Sender sender(kSetA, params);
  Receiver receiver(kSetB, params);

  std::optional<ReconcileOutcome> outcome;
  while (true) {
    const auto row = sender.next_row();
    REQUIRE(row.has_value());
    const auto step = receiver.on_row(*row);
    REQUIRE(step.kind != Receiver::Step::Kind::kAbort);
    if (step.kind == Receiver::Step::Kind::kDone) {
      outcome = step.outcome;
      break;
    }
  }
  REQUIRE(outcome.has_value());
  CHECK(outcome->success);
  CHECK(outcome->delta_a == std::set<Element>{1});
  CHECK(outcome->delta_b == std::set<Element>{8});
  CHECK(outcome->rows_used <= 14);
  CHECK(outcome->scalars_sent == 2 * outcome->rows_used);
}

TEST_CASE("out-of-order rows abort the session") {
  const SessionParams params = small_params();
  Sender sender(kSetA, params);
  Receiver receiver(kSetB, params);
  auto row = sender.next_row();
  row->index = 5;
  const auto step = receiver.on_row(*row);
  REQUIRE(step.kind == Receiver::Step::Kind::kAbort);
  CHECK(step.abort.reason == AbortReason::kOutOfOrder);
}

TEST_CASE("a truncated stream times out") {
  const auto result = run_inproc_session(kSetA, kSetB, small_params(), Receiver::Options{}, 2);
  CHECK_FALSE(result.completed);
  REQUIRE(result.abort.has_value());
  CHECK(result.abort->reason == AbortReason::kTimeout);
}

TEST_CASE("an undecodable difference exhausts the row budget and aborts") {
  // Hash seed chosen so elements 1 and 8 collide into the same two cells;
  // their difference can never peel, whatever the measurement count.
  std::uint64_t colliding_seed = 0;
  bool found = false;
  for (std::uint64_t seed = 0; seed < 5000 && !found; ++seed) {
    if (cell_indices(1, 14, 2, seed) == cell_indices(8, 14, 2, seed)) {
      colliding_seed = seed;
      found = true;
    }
  }
  REQUIRE(found);
  const SessionParams params = negotiate(7, 2, DiffBound::kAtMostN, 11, colliding_seed);
  const auto result = run_inproc_session(kSetA, kSetB, params);
  CHECK_FALSE(result.completed);
  REQUIRE(result.abort.has_value());
  CHECK(result.abort->reason == AbortReason::kRowBudgetExhausted);
  CHECK(result.sender_rows_emitted == params.b);
}

TEST_CASE("classify splits extraction results") {
  ExtractResult extract;
  extract.success = true;
  extract.positives = {1};
  extract.negatives = {8};
  const auto [da, db] = classify(extract);
  CHECK(da == std::set<Element>{1});
  CHECK(db == std::set<Element>{8});

  ExtractResult empty;
  empty.success = true;
  const auto [ea, eb] = classify(empty);
  CHECK(ea.empty());
  CHECK(eb.empty());

  ExtractResult multi;
  multi.success = true;
  multi.positives = {3, 5};
  multi.negatives = {9};
  const auto [ma, mb] = classify(multi);
  CHECK(ma == std::set<Element>{3, 5});
  CHECK(mb == std::set<Element>{9});

  ExtractResult failed;
  failed.success = false;
  CHECK_THROWS_AS(classify(failed), std::invalid_argument);
}

TEST_CASE("apply_reconciliation replays the update rule") {
  const std::set<Element> s_b{2, 3, 4, 5, 6, 7, 8};
  CHECK(apply_reconciliation(s_b, {1}, {8}) == std::set<Element>{1, 2, 3, 4, 5, 6, 7});
  CHECK(apply_reconciliation({2, 3, 4}, {1}, {4}) == std::set<Element>{1, 2, 3});
  CHECK(apply_reconciliation(s_b, {}, {}) == s_b);

  CHECK_THROWS_AS(apply_reconciliation({2, 3}, {}, {9}), InconsistentDeltas);
  CHECK_THROWS_AS(apply_reconciliation({2, 3}, {2}, {}), InconsistentDeltas);
}

TEST_CASE("random instances reconcile end to end") {
  SplitMix64 rng(60311);
  for (int trial = 0; trial < 12; ++trial) {
    const std::uint64_t n = 40;
    const std::uint64_t d = rng.next_below(n + 1);
    const Instance inst = gen_instance(n, d, rng.next());
    const SessionParams params = derive_session_params(inst.rng_seed, n, 3);
    const auto result = run_inproc_session(inst.s_a, inst.s_b, params);
    REQUIRE(result.completed);

    const std::set<Element> set_a(inst.s_a.begin(), inst.s_a.end());
    const std::set<Element> set_b(inst.s_b.begin(), inst.s_b.end());
    CHECK(apply_reconciliation(set_b, result.outcome.delta_a, result.outcome.delta_b) == set_a);
    CHECK(result.outcome.rows_used <= params.b);
  }
}

TEST_CASE("differences beyond n fit the doubled bound") {
  // d can reach 2n when the sets barely overlap; the 4n table handles it.
  const std::vector<Element> s_a{1, 2, 3};
  const std::vector<Element> s_b{4, 5, 6, 7};
  const SessionParams params = negotiate(4, 2, DiffBound::kAtMost2N, 21, 23);
  CHECK(params.b == 16);
  const auto result = run_inproc_session(s_a, s_b, params);
  REQUIRE(result.completed);
  CHECK(result.outcome.delta_a == std::set<Element>{1, 2, 3});
  CHECK(result.outcome.delta_b == std::set<Element>{4, 5, 6, 7});
}

TEST_CASE("attempt cadence trades attempts for rows") {
  const SessionParams params = small_params();
  Receiver::Options every_third;
  every_third.attempt_every = 3;
  const auto result = run_inproc_session(kSetA, kSetB, params, every_third);
  REQUIRE(result.completed);
  // attempts happen at multiples of three, plus the forced final attempt
  CHECK((result.outcome.rows_used % 3 == 0 || result.outcome.rows_used == params.b));

  Receiver::Options bad;
  bad.attempt_every = 0;
  CHECK_THROWS_AS(Receiver(kSetB, params, bad), std::invalid_argument);
}
