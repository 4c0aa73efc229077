#pragma once

#include <cstdint>
#include <vector>

#include "csiblt/protocol.hpp"

namespace csiblt {

// Plain Bloom filter over elements; no false negatives by construction.
class BloomFilter {
 public:
  BloomFilter(std::uint64_t bit_count, int hash_count, std::uint64_t seed);

  void insert(Element value);
  bool contains(Element value) const;

  std::uint64_t bit_count() const noexcept { return bits_; }
  int hash_count() const noexcept { return hash_count_; }

 private:
  std::uint64_t bit_index(Element value, int probe) const noexcept;

  std::uint64_t bits_;
  int hash_count_;
  std::uint64_t seed_;
  std::vector<std::uint64_t> words_;
};

// Difference-size guesses: d0 = ceil(n/2), d_{t+1} = ceil((n + d_t)/2),
// strictly increasing until n.
std::vector<std::uint64_t> guess_schedule(std::uint64_t n);

// Whole-set transfer: the receiver computes the differences exactly.
// Cost: one scalar per element of s_a.
ReconcileOutcome naive_reconcile(const std::vector<Element>& s_a,
                                 const std::vector<Element>& s_b);

struct BloomResult {
  ReconcileOutcome outcome;
  std::uint64_t false_positives = 0;  // spurious delta_a candidates
};

// Bloom-filter exchange: delta_b candidates are s_b elements absent from
// the filter (sound, never flags a shared element); delta_a candidates come
// from querying the rest of [1, universe_max] and may contain false
// positives. Cost: ceil(bits_per_element * |s_a| / 64) scalars.
BloomResult bloom_reconcile(const std::vector<Element>& s_a, const std::vector<Element>& s_b,
                            std::uint64_t universe_max, std::uint32_t bits_per_element,
                            std::uint64_t seed);

struct GuessResult {
  ReconcileOutcome outcome;
  std::uint32_t rounds = 0;
  bool fallback_used = false;  // schedule exhausted, oversized final table
};

// Difference-size guessing: each round ships a fresh difference-decodable
// table of 2 * d_hat cells (2 scalars per cell) until peeling drains it.
// After the schedule is exhausted a final table of 2n cells with the
// standard capacity margin is attempted and flagged.
GuessResult iblt_guess_reconcile(const std::vector<Element>& s_a,
                                 const std::vector<Element>& s_b, std::uint64_t n, int k,
                                 std::uint64_t seed);

}  // namespace csiblt
