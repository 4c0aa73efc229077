#include "csiblt/protocol.hpp"

#include <algorithm>

#include "csiblt/hashing.hpp"

namespace csiblt {

SessionParams negotiate(std::uint64_t n, int k, DiffBound d_bound, std::uint64_t matrix_seed,
                        std::uint64_t hash_seed) {
  if (n < 1) throw std::invalid_argument("negotiate: n must be at least 1");
  if (k < 2) throw std::invalid_argument("negotiate: k must be at least 2");
  const std::uint64_t b = (d_bound == DiffBound::kAtMostN) ? 2 * n : 4 * n;
  return SessionParams{n, k, b, matrix_seed, hash_seed, d_bound};
}

HelloMsg hello_from_params(const SessionParams& params) {
  HelloMsg hello;
  hello.version = kProtocolVersion;
  hello.n = params.n;
  hello.k = static_cast<std::uint8_t>(params.k);
  hello.b = params.b;
  hello.matrix_seed = params.matrix_seed;
  hello.hash_seed = params.hash_seed;
  hello.d_bound = static_cast<std::uint8_t>(params.d_bound);
  return hello;
}

SessionParams params_from_hello(const HelloMsg& hello) {
  if (hello.version != kProtocolVersion) {
    throw std::invalid_argument("hello: unsupported protocol version");
  }
  if (hello.d_bound > 1) throw std::invalid_argument("hello: unknown difference bound");
  const auto d_bound = static_cast<DiffBound>(hello.d_bound);
  const SessionParams derived =
      negotiate(hello.n, hello.k, d_bound, hello.matrix_seed, hello.hash_seed);
  if (derived.b != hello.b) throw std::invalid_argument("hello: table length mismatch");
  return derived;
}

namespace {

Iblt build_table(const std::vector<Element>& elements, const SessionParams& params) {
  if (elements.size() > params.n) {
    throw std::invalid_argument("session: set larger than declared bound n");
  }
  Iblt table(params.b, params.k, params.hash_seed);
  for (const Element e : elements) table.insert(e);
  return table;
}

}  // namespace

Sender::Sender(const std::vector<Element>& set_a, const SessionParams& params)
    : params_(params),
      table_(build_table(set_a, params)),
      spec_(MatrixSpec::for_table(params.matrix_seed, params.b)) {}

std::optional<RowMsg> Sender::next_row() {
  if (finished_ || next_row_ >= params_.b) {
    finished_ = true;
    return std::nullopt;
  }
  const MeasurementRow row = encode_row(table_, spec_, next_row_);
  ++next_row_;
  return RowMsg{row.index, row.y_sum, row.y_count};
}

Receiver::Receiver(const std::vector<Element>& set_b, const SessionParams& params)
    : Receiver(set_b, params, Options{}) {}

Receiver::Receiver(const std::vector<Element>& set_b, const SessionParams& params, Options options)
    : params_(params),
      options_(options),
      table_(build_table(set_b, params)),
      spec_(MatrixSpec::for_table(params.matrix_seed, params.b)) {
  if (options_.attempt_every < 1) throw std::invalid_argument("receiver: attempt_every must be >= 1");
  const auto b = static_cast<Eigen::Index>(params.b);
  phi_.resize(b, b);
  diff_sum_.resize(b);
  diff_count_.resize(b);
}

Receiver::Step Receiver::on_row(const RowMsg& row) {
  if (outcome_.has_value()) return Step{Step::Kind::kDone, *outcome_, {}};
  if (row.index != rows_) {
    return Step{Step::Kind::kAbort, {}, AbortMsg{AbortReason::kOutOfOrder}};
  }

  // Regenerate the matrix row once; it serves both the local encoding and
  // the recovery problem.
  const auto m = static_cast<Eigen::Index>(rows_);
  double own_sum = 0.0;
  double own_count = 0.0;
  for (std::uint64_t j = 0; j < params_.b; ++j) {
    const double phi = gaussian_entry(params_.matrix_seed, rows_, j);
    phi_(m, static_cast<Eigen::Index>(j)) = phi;
    const IbltCell& c = table_.cells()[j];
    own_sum += phi * static_cast<double>(c.sum);
    own_count += phi * static_cast<double>(c.count);
  }
  diff_sum_(m) = row.y_sum - own_sum;
  diff_count_(m) = row.y_count - own_count;
  ++rows_;

  const bool budget_spent = rows_ == params_.b;
  if (rows_ % options_.attempt_every == 0 || budget_spent) {
    Step step = attempt_recovery();
    if (step.kind != Step::Kind::kContinue) return step;
  }
  if (budget_spent) {
    return Step{Step::Kind::kAbort, {}, AbortMsg{AbortReason::kRowBudgetExhausted}};
  }
  return Step{Step::Kind::kContinue, {}, {}};
}

Receiver::Step Receiver::on_stream_end() {
  if (outcome_.has_value()) return Step{Step::Kind::kDone, *outcome_, {}};
  const AbortReason reason =
      rows_ == params_.b ? AbortReason::kRowBudgetExhausted : AbortReason::kTimeout;
  return Step{Step::Kind::kAbort, {}, AbortMsg{reason}};
}

Receiver::Step Receiver::attempt_recovery() {
  const auto m = static_cast<Eigen::Index>(rows_);

  RecoveryProblem problem{phi_.topRows(m), diff_sum_.head(m), diff_count_.head(m)};

  SolverConfig cfg = options_.solver;
  if (cfg.max_sparsity == 0) {
    // A support larger than half the measurements is never identifiable,
    // so capping there only prunes hopeless work.
    cfg.max_sparsity = static_cast<std::size_t>(rows_) / 2 + 1;
  }

  const TableParams table_params{params_.b, params_.k, params_.hash_seed};
  const RecoveredIblt recovered = recover_difference(problem, table_params, cfg);
  if (!recovered.verified) return Step{Step::Kind::kContinue, {}, {}};

  const ExtractResult extracted = recovered.table.list_entries();
  if (!extracted.success) return Step{Step::Kind::kContinue, {}, {}};

  std::vector<Element> overlap;
  std::set_intersection(extracted.positives.begin(), extracted.positives.end(),
                        extracted.negatives.begin(), extracted.negatives.end(),
                        std::back_inserter(overlap));
  if (!overlap.empty()) return Step{Step::Kind::kContinue, {}, {}};

  auto [delta_a, delta_b] = classify(extracted);
  ReconcileOutcome outcome;
  outcome.delta_a = std::move(delta_a);
  outcome.delta_b = std::move(delta_b);
  outcome.rows_used = rows_;
  outcome.scalars_sent = 2 * rows_;
  outcome.success = true;
  outcome_ = outcome;
  return Step{Step::Kind::kDone, *outcome_, {}};
}

std::pair<std::set<Element>, std::set<Element>> classify(const ExtractResult& extract) {
  if (!extract.success) {
    throw std::invalid_argument("classify: extraction did not drain the table");
  }
  return {extract.positives, extract.negatives};
}

std::set<Element> apply_reconciliation(const std::set<Element>& s_b,
                                       const std::set<Element>& delta_a,
                                       const std::set<Element>& delta_b) {
  for (const Element e : delta_b) {
    if (!s_b.contains(e)) {
      throw InconsistentDeltas("apply_reconciliation: delta_b element not present in s_b");
    }
  }
  for (const Element e : delta_a) {
    if (s_b.contains(e)) {
      throw InconsistentDeltas("apply_reconciliation: delta_a element already present in s_b");
    }
  }
  std::set<Element> out = s_b;
  out.insert(delta_a.begin(), delta_a.end());
  for (const Element e : delta_b) out.erase(e);
  return out;
}

}  // namespace csiblt
