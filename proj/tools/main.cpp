#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "csiblt/baselines.hpp"
#include "csiblt/harness.hpp"
#include "csiblt/plot.hpp"
#include "csiblt/transport.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitReconcileFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitTransport = 3;

const char* abort_reason_name(csiblt::AbortReason reason) {
  switch (reason) {
    case csiblt::AbortReason::kOutOfOrder: return "out-of-order";
    case csiblt::AbortReason::kTimeout: return "timeout";
    case csiblt::AbortReason::kParameterRejection: return "parameter-rejection";
    case csiblt::AbortReason::kRowBudgetExhausted: return "row-budget-exhausted";
  }
  return "unknown";
}

struct ReconcileArgs {
  std::uint64_t n = 0;
  int k = 2;
  std::uint64_t d = 0;
  std::uint64_t seed = 0;
  std::string protocol;
  std::string transport = "inproc";
  std::string listen;
  std::string connect;
};

int run_reconcile(const ReconcileArgs& args) {
  using namespace csiblt;
  const ProtocolKind protocol = protocol_from_name(args.protocol);

  TrialOptions options;
  options.transport = args.transport == "tcp" ? TransportKind::kTcp : TransportKind::kInProc;
  const std::uint64_t universe =
      protocol == ProtocolKind::kBloom ? options.bloom_universe_max : kElementMax;
  const Instance instance = gen_instance(args.n, args.d, args.seed, universe);

  if (options.transport == TransportKind::kTcp && protocol != ProtocolKind::kCsIblt) {
    std::fprintf(stderr, "error: only cs-iblt runs over tcp; baselines are in-process\n");
    return kExitUsage;
  }

  // Split tcp roles: --listen runs the receiver end, --connect the sender.
  if (options.transport == TransportKind::kTcp && !args.listen.empty()) {
    const SessionResult result = run_tcp_receiver(args.listen, instance.s_b, args.n, args.k);
    if (result.completed) {
      std::printf("reconciled: |delta_a|=%zu |delta_b|=%zu rows_used=%llu scalars=%llu\n",
                  result.outcome.delta_a.size(), result.outcome.delta_b.size(),
                  static_cast<unsigned long long>(result.outcome.rows_used),
                  static_cast<unsigned long long>(result.outcome.scalars_sent));
      return kExitOk;
    }
    std::fprintf(stderr, "aborted: %s\n",
                 result.abort ? abort_reason_name(result.abort->reason) : "unknown");
    return kExitReconcileFailed;
  }
  if (options.transport == TransportKind::kTcp && !args.connect.empty()) {
    const SessionParams params = derive_session_params(args.seed, args.n, args.k);
    const SessionResult result = run_tcp_sender(args.connect, instance.s_a, params);
    if (result.completed) {
      std::printf("acknowledged after emitting %llu rows\n",
                  static_cast<unsigned long long>(result.sender_rows_emitted));
      return kExitOk;
    }
    std::fprintf(stderr, "aborted: %s\n",
                 result.abort ? abort_reason_name(result.abort->reason) : "unknown");
    return kExitReconcileFailed;
  }
  if (options.transport == TransportKind::kTcp) {
    std::fprintf(stderr, "error: tcp transport needs --listen or --connect\n");
    return kExitUsage;
  }

  const TrialRecord record = run_trial(instance, protocol, args.k, options);
  std::printf("protocol=%s n=%llu k=%d d=%llu scalars_sent=%llu rows_used=%llu rounds=%u %s\n",
              record.protocol.c_str(), static_cast<unsigned long long>(record.n), record.k,
              static_cast<unsigned long long>(record.d),
              static_cast<unsigned long long>(record.scalars_sent),
              static_cast<unsigned long long>(record.rows_used), record.rounds,
              record.success ? "success" : "FAILED");
  return record.success ? kExitOk : kExitReconcileFailed;
}

struct BenchArgs {
  std::uint64_t n = 200;
  int k = 2;
  std::uint64_t d_min = 1;
  std::uint64_t d_max = 200;
  std::uint64_t d_step = 10;
  std::uint64_t trials = 10;
  std::vector<std::string> protocols;
  std::string out;
  int jobs = 1;
  bool allow_long = false;
};

int run_bench(const BenchArgs& args) {
  using namespace csiblt;
  if (args.n > 500 && !args.allow_long) {
    std::fprintf(stderr, "error: sweeps beyond n=500 take a while; pass --allow-long to confirm\n");
    return kExitUsage;
  }

  SweepConfig config;
  config.n = args.n;
  config.k = args.k;
  config.trials_per_d = args.trials;
  config.jobs = args.jobs;
  for (std::uint64_t d = args.d_min; d <= args.d_max; d += std::max<std::uint64_t>(1, args.d_step)) {
    config.d_values.push_back(d);
  }
  for (const auto& name : args.protocols) config.protocols.push_back(protocol_from_name(name));

  const auto records = sweep(config);
  write_csv_file(records, args.out);

  std::uint64_t failures = 0;
  for (const auto& r : records) {
    if (!r.success) ++failures;
  }
  std::printf("wrote %zu records to %s (%llu failures)\n", records.size(), args.out.c_str(),
              static_cast<unsigned long long>(failures));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"set reconciliation with streamed compressed measurements"};
  app.require_subcommand(1);

  ReconcileArgs rec;
  CLI::App* reconcile = app.add_subcommand("reconcile", "run one reconciliation");
  reconcile->add_option("--n", rec.n, "set size bound")->required();
  reconcile->add_option("--k", rec.k, "hash count")->required();
  reconcile->add_option("--d", rec.d, "total difference size")->required();
  reconcile->add_option("--seed", rec.seed, "instance seed")->required();
  reconcile->add_option("--protocol", rec.protocol, "cs-iblt|iblt-guess|naive|bloom")->required();
  reconcile->add_option("--transport", rec.transport, "inproc|tcp")
      ->check(CLI::IsMember({"inproc", "tcp"}));
  reconcile->add_option("--listen", rec.listen, "host:port to accept on (tcp receiver role)");
  reconcile->add_option("--connect", rec.connect, "host:port to connect to (tcp sender role)");

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "sweep d and write a CSV of trial records");
  bench_cmd->add_option("--n", bench.n, "set size bound")->required();
  bench_cmd->add_option("--k", bench.k, "hash count")->required();
  bench_cmd->add_option("--d-min", bench.d_min, "smallest d")->required();
  bench_cmd->add_option("--d-max", bench.d_max, "largest d")->required();
  bench_cmd->add_option("--d-step", bench.d_step, "d increment")->required();
  bench_cmd->add_option("--trials", bench.trials, "trials per d")->required();
  bench_cmd->add_option("--protocols", bench.protocols, "protocols to run")
      ->required()
      ->delimiter(',');
  bench_cmd->add_option("--out", bench.out, "output CSV path")->required();
  bench_cmd->add_option("--jobs", bench.jobs, "worker threads");
  bench_cmd->add_flag("--allow-long", bench.allow_long, "permit large-n sweeps");

  std::string plot_in;
  std::string plot_out;
  CLI::App* plot_cmd = app.add_subcommand("plot", "render a cost-vs-d SVG from a bench CSV");
  plot_cmd->add_option("--in", plot_in, "input CSV path")->required();
  plot_cmd->add_option("--out", plot_out, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (reconcile->parsed()) return run_reconcile(rec);
    if (bench_cmd->parsed()) return run_bench(bench);
    if (plot_cmd->parsed()) {
      csiblt::plot_csv_to_svg(plot_in, plot_out);
      return kExitOk;
    }
  } catch (const csiblt::TransportError& e) {
    std::fprintf(stderr, "transport error: %s\n", e.what());
    return kExitTransport;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
