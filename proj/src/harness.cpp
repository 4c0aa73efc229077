#include "csiblt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "csiblt/baselines.hpp"
#include "csiblt/hashing.hpp"
#include "csiblt/transport.hpp"

namespace csiblt {

Instance gen_instance(std::uint64_t n, std::uint64_t d, std::uint64_t rng_seed,
                      std::uint64_t universe_max) {
  if (d > n) throw std::invalid_argument("gen_instance: d must not exceed n");
  const std::uint64_t delta_a_size = (d + 1) / 2;
  const std::uint64_t delta_b_size = d / 2;
  const std::uint64_t shared_size = n - delta_a_size;
  const std::uint64_t distinct_needed = n + delta_b_size;
  if (universe_max < 1 || distinct_needed > universe_max) {
    throw std::invalid_argument("gen_instance: universe too small for the requested sample");
  }

  SplitMix64 rng(rng_seed);
  std::vector<Element> pool;
  pool.reserve(distinct_needed);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(distinct_needed * 2);
  while (pool.size() < distinct_needed) {
    const std::uint64_t v = rng.next_in(1, universe_max);
    if (seen.insert(v).second) pool.push_back(static_cast<Element>(v));
  }

  Instance inst;
  inst.n = n;
  inst.d = d;
  inst.rng_seed = rng_seed;
  inst.s_a.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(shared_size + delta_a_size));
  inst.s_b.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(shared_size));
  inst.s_b.insert(inst.s_b.end(), pool.begin() + static_cast<std::ptrdiff_t>(shared_size + delta_a_size),
                  pool.end());
  return inst;
}

std::string protocol_name(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::kCsIblt: return "cs-iblt";
    case ProtocolKind::kIbltGuess: return "iblt-guess";
    case ProtocolKind::kNaive: return "naive";
    case ProtocolKind::kBloom: return "bloom";
  }
  return "unknown";
}

ProtocolKind protocol_from_name(const std::string& name) {
  if (name == "cs-iblt") return ProtocolKind::kCsIblt;
  if (name == "iblt-guess") return ProtocolKind::kIbltGuess;
  if (name == "naive") return ProtocolKind::kNaive;
  if (name == "bloom") return ProtocolKind::kBloom;
  throw std::invalid_argument("unknown protocol: " + name);
}

namespace {

struct Oracle {
  std::set<Element> delta_a;
  std::set<Element> delta_b;
  std::set<Element> set_a;
  std::set<Element> set_b;
};

Oracle brute_force(const Instance& instance) {
  Oracle o;
  o.set_a.insert(instance.s_a.begin(), instance.s_a.end());
  o.set_b.insert(instance.s_b.begin(), instance.s_b.end());
  std::set_difference(o.set_a.begin(), o.set_a.end(), o.set_b.begin(), o.set_b.end(),
                      std::inserter(o.delta_a, o.delta_a.end()));
  std::set_difference(o.set_b.begin(), o.set_b.end(), o.set_a.begin(), o.set_a.end(),
                      std::inserter(o.delta_b, o.delta_b.end()));
  return o;
}

// A trial succeeds only if the recovered deltas equal brute force and the
// reconciliation rule replays the sender's set exactly.
bool oracle_success(const ReconcileOutcome& outcome, const Oracle& oracle) {
  if (!outcome.success) return false;
  if (outcome.delta_a != oracle.delta_a || outcome.delta_b != oracle.delta_b) return false;
  try {
    return apply_reconciliation(oracle.set_b, outcome.delta_a, outcome.delta_b) == oracle.set_a;
  } catch (const InconsistentDeltas&) {
    return false;
  }
}

std::atomic<std::uint16_t> g_port_counter{0};

// Distinct loopback ports for concurrent tcp trials.
std::string fresh_tcp_addr() {
  const std::uint16_t port = static_cast<std::uint16_t>(
      20000 + (g_port_counter.fetch_add(1, std::memory_order_relaxed) % 20000));
  return "127.0.0.1:" + std::to_string(port);
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t d, std::uint64_t trial) {
  return mix64(mix64(base_seed ^ mix64(d)) + trial);
}

SessionParams derive_session_params(std::uint64_t instance_seed, std::uint64_t n, int k) {
  const std::uint64_t matrix_seed = mix64(instance_seed ^ 0x6d6174726978ULL);
  const std::uint64_t hash_seed = mix64(instance_seed ^ 0x68617368ULL);
  return negotiate(n, k, DiffBound::kAtMostN, matrix_seed, hash_seed);
}

TrialRecord run_trial(const Instance& instance, ProtocolKind protocol, int k,
                      const TrialOptions& options) {
  TrialRecord rec;
  rec.protocol = protocol_name(protocol);
  rec.n = instance.n;
  rec.k = k;
  rec.d = instance.d;
  rec.trial_seed = instance.rng_seed;

  const Oracle oracle = brute_force(instance);
  const auto start = std::chrono::steady_clock::now();

  try {
    switch (protocol) {
      case ProtocolKind::kCsIblt: {
        const SessionParams params = derive_session_params(instance.rng_seed, instance.n, k);
        SessionResult session;
        if (options.transport == TransportKind::kInProc) {
          session = run_inproc_session(instance.s_a, instance.s_b, params, options.receiver);
        } else {
          const std::string addr =
              options.tcp_addr == "127.0.0.1:0" ? fresh_tcp_addr() : options.tcp_addr;
          SessionResult receiver_result;
          std::exception_ptr receiver_error;
          std::thread receiver_thread([&] {
            try {
              receiver_result =
                  run_tcp_receiver(addr, instance.s_b, instance.n, k, options.receiver);
            } catch (...) {
              receiver_error = std::current_exception();
            }
          });
          // Give the listener a beat to bind before connecting.
          std::this_thread::sleep_for(std::chrono::milliseconds(20));
          try {
            (void)run_tcp_sender(addr, instance.s_a, params);
          } catch (...) {
            receiver_thread.join();
            throw;
          }
          receiver_thread.join();
          if (receiver_error) std::rethrow_exception(receiver_error);
          session = receiver_result;
        }
        rec.rounds = 1;
        rec.rows_used = session.completed ? session.outcome.rows_used : 0;
        rec.scalars_sent = session.completed ? session.outcome.scalars_sent
                                             : 2 * session.sender_rows_emitted;
        rec.success = session.completed && oracle_success(session.outcome, oracle);
        break;
      }
      case ProtocolKind::kIbltGuess: {
        const GuessResult result = iblt_guess_reconcile(
            instance.s_a, instance.s_b, instance.n, k, mix64(instance.rng_seed ^ 0x677565ULL));
        rec.rounds = result.rounds;
        rec.scalars_sent = result.outcome.scalars_sent;
        rec.success = oracle_success(result.outcome, oracle);
        break;
      }
      case ProtocolKind::kNaive: {
        const ReconcileOutcome outcome = naive_reconcile(instance.s_a, instance.s_b);
        rec.rounds = 1;
        rec.scalars_sent = outcome.scalars_sent;
        rec.success = oracle_success(outcome, oracle);
        break;
      }
      case ProtocolKind::kBloom: {
        const BloomResult result =
            bloom_reconcile(instance.s_a, instance.s_b, options.bloom_universe_max,
                            options.bloom_bits_per_element, mix64(instance.rng_seed ^ 0x626cULL));
        rec.rounds = 1;
        rec.scalars_sent = result.outcome.scalars_sent;
        rec.success = oracle_success(result.outcome, oracle);
        break;
      }
    }
  } catch (const TransportError&) {
    rec.success = false;
  }

  const auto end = std::chrono::steady_clock::now();
  rec.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
  return rec;
}

std::vector<TrialRecord> sweep(const SweepConfig& config) {
  struct Task {
    ProtocolKind protocol;
    std::uint64_t d;
    std::uint64_t trial;
    std::size_t slot;
  };
  std::vector<Task> tasks;
  for (const ProtocolKind protocol : config.protocols) {
    for (const std::uint64_t d : config.d_values) {
      for (std::uint64_t t = 0; t < config.trials_per_d; ++t) {
        tasks.push_back(Task{protocol, d, t, tasks.size()});
      }
    }
  }

  std::vector<TrialRecord> records(tasks.size());
  std::atomic<std::size_t> cursor{0};
  const int jobs = std::max(1, config.jobs);

  auto worker = [&] {
    while (true) {
      const std::size_t i = cursor.fetch_add(1, std::memory_order_relaxed);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      const std::uint64_t seed = trial_seed(config.base_seed, task.d, task.trial);
      const std::uint64_t universe = task.protocol == ProtocolKind::kBloom
                                         ? config.trial_options.bloom_universe_max
                                         : kElementMax;
      const Instance instance = gen_instance(config.n, task.d, seed, universe);
      TrialRecord rec = run_trial(instance, task.protocol, config.k, config.trial_options);
      rec.trial = task.trial;
      records[task.slot] = std::move(rec);
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

void write_csv(const std::vector<TrialRecord>& records, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const TrialRecord& r : records) {
    char wall[32];
    std::snprintf(wall, sizeof(wall), "%.3f", r.wall_ms);
    out << r.protocol << ',' << r.n << ',' << r.k << ',' << r.d << ',' << r.trial << ','
        << r.scalars_sent << ',' << r.rows_used << ',' << r.rounds << ','
        << (r.success ? 1 : 0) << ',' << wall << '\n';
  }
}

void write_csv_file(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(records, out);
}

std::vector<TrialRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  if (line != kCsvHeader) throw std::runtime_error("csv: unexpected header");

  std::vector<TrialRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 10) {
      throw std::runtime_error("csv: line " + std::to_string(line_no) + " has " +
                               std::to_string(fields.size()) + " fields, want 10");
    }
    try {
      TrialRecord r;
      r.protocol = fields[0];
      r.n = std::stoull(fields[1]);
      r.k = std::stoi(fields[2]);
      r.d = std::stoull(fields[3]);
      r.trial = std::stoull(fields[4]);
      r.scalars_sent = std::stoull(fields[5]);
      r.rows_used = std::stoull(fields[6]);
      r.rounds = static_cast<std::uint32_t>(std::stoul(fields[7]));
      r.success = fields[8] == "1";
      r.wall_ms = std::stod(fields[9]);
      records.push_back(std::move(r));
    } catch (const std::exception&) {
      throw std::runtime_error("csv: malformed line " + std::to_string(line_no));
    }
  }
  return records;
}

std::vector<TrialRecord> read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return read_csv(in);
}

}  // namespace csiblt
