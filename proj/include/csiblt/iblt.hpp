#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <vector>

namespace csiblt {

// An element of the universe being reconciled. Zero is reserved: an empty
// cell sums to zero, so a zero element would be indistinguishable from
// absence and would break sign classification during peeling.
using Element = std::uint32_t;

constexpr std::uint64_t kElementMax = 0xFFFFFFFFULL;  // values are in [1, 2^32)

constexpr bool is_valid_element(std::int64_t v) noexcept {
  return v >= 1 && v <= static_cast<std::int64_t>(kElementMax);
}

struct IbltCell {
  std::int64_t sum = 0;    // accumulated element values, signed
  std::int64_t count = 0;  // insertions minus deletions

  bool operator==(const IbltCell&) const = default;
};

struct ExtractResult {
  std::set<Element> positives;  // extracted with count +1
  std::set<Element> negatives;  // extracted with count -1, negated back
  bool success = false;         // table drained to all-zero
  std::size_t residual_cells = 0;
};

// The k pairwise-distinct cell indices an element occupies in a table of
// `table_len` cells. Index t of the stream mix64(mix64(seed ^ mix64(value)) + t)
// modulo table_len, skipping repeats, so a lone element always occupies
// exactly k cells and stays peelable.
std::vector<std::uint32_t> cell_indices(Element value, std::uint64_t table_len,
                                        int hash_count, std::uint64_t seed);

// Invertible Bloom lookup table with signed (sum, count) cells. Deleting an
// element that was never inserted is legal and drives cells negative; the
// cellwise difference of two tables is therefore itself a valid table
// holding one side's surplus as insertions and the other's as deletions.
class Iblt {
 public:
  // Requires table_len >= hash_count >= 2.
  Iblt(std::uint64_t table_len, int hash_count, std::uint64_t seed);

  void insert(Element value);
  void erase(Element value);

  // Cellwise difference; both tables must share (length, hash count, seed).
  Iblt subtract(const Iblt& other) const;

  // Repeatedly peels cells with count +-1 whose contents pass the
  // consistency check (sign(sum) == sign(count), |sum| is a valid element,
  // and |sum| hashes back to the cell it is peeled from). The table itself
  // is not modified.
  ExtractResult list_entries() const;

  std::vector<std::uint32_t> indices_of(Element value) const;

  std::uint64_t length() const noexcept { return cells_.size(); }
  int hash_count() const noexcept { return hash_count_; }
  std::uint64_t seed() const noexcept { return seed_; }

  const std::vector<IbltCell>& cells() const noexcept { return cells_; }
  IbltCell& cell(std::size_t i) { return cells_[i]; }

  bool is_zero() const noexcept;
  std::int64_t count_total() const noexcept;

  bool operator==(const Iblt&) const = default;

 private:
  void apply(Element value, std::int64_t direction);

  int hash_count_;
  std::uint64_t seed_;
  std::vector<IbltCell> cells_;
};

}  // namespace csiblt
