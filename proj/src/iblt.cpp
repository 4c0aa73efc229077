#include "csiblt/iblt.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <stdexcept>

#include "csiblt/hashing.hpp"

namespace csiblt {

std::vector<std::uint32_t> cell_indices(Element value, std::uint64_t table_len,
                                        int hash_count, std::uint64_t seed) {
  std::vector<std::uint32_t> out;
  out.reserve(static_cast<std::size_t>(hash_count));
  const std::uint64_t key = mix64(seed ^ mix64(value));
  for (std::uint64_t attempt = 0; out.size() < static_cast<std::size_t>(hash_count); ++attempt) {
    const auto idx = static_cast<std::uint32_t>(mix64(key + attempt) % table_len);
    if (std::find(out.begin(), out.end(), idx) == out.end()) out.push_back(idx);
  }
  return out;
}

Iblt::Iblt(std::uint64_t table_len, int hash_count, std::uint64_t seed)
    : hash_count_(hash_count), seed_(seed) {
  if (hash_count < 2 || table_len < static_cast<std::uint64_t>(hash_count)) {
    throw std::invalid_argument("iblt: require table_len >= hash_count >= 2");
  }
  cells_.resize(table_len);
}

std::vector<std::uint32_t> Iblt::indices_of(Element value) const {
  return cell_indices(value, cells_.size(), hash_count_, seed_);
}

void Iblt::apply(Element value, std::int64_t direction) {
  if (!is_valid_element(value)) throw std::invalid_argument("iblt: element must be nonzero");
  for (const auto idx : indices_of(value)) {
    cells_[idx].sum += direction * static_cast<std::int64_t>(value);
    cells_[idx].count += direction;
  }
}

void Iblt::insert(Element value) { apply(value, +1); }

void Iblt::erase(Element value) { apply(value, -1); }

Iblt Iblt::subtract(const Iblt& other) const {
  if (length() != other.length() || hash_count_ != other.hash_count_ || seed_ != other.seed_) {
    throw std::invalid_argument("iblt: subtract requires matching length, hash count and seed");
  }
  Iblt out(*this);
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    out.cells_[i].sum -= other.cells_[i].sum;
    out.cells_[i].count -= other.cells_[i].count;
  }
  return out;
}

bool Iblt::is_zero() const noexcept {
  return std::all_of(cells_.begin(), cells_.end(),
                     [](const IbltCell& c) { return c.sum == 0 && c.count == 0; });
}

std::int64_t Iblt::count_total() const noexcept {
  std::int64_t total = 0;
  for (const auto& c : cells_) total += c.count;
  return total;
}

namespace {

// A cell is peelable when it plausibly holds exactly one signed element:
// count is +-1, the sign of sum matches, |sum| is a representable element,
// and that element hashes to this very cell. The last check is what lets
// peeling fail loudly on tables reconstructed from too few measurements,
// which look random and would otherwise occasionally "succeed".
bool is_peelable(const Iblt& table, std::uint32_t idx) {
  const IbltCell& c = table.cells()[idx];
  if (c.count != 1 && c.count != -1) return false;
  if ((c.count > 0) != (c.sum > 0)) return false;
  const std::int64_t magnitude = std::abs(c.sum);
  if (!is_valid_element(magnitude)) return false;
  const auto element = static_cast<Element>(magnitude);
  const auto homes = table.indices_of(element);
  return std::find(homes.begin(), homes.end(), idx) != homes.end();
}

}  // namespace

ExtractResult Iblt::list_entries() const {
  Iblt work(*this);
  ExtractResult result;

  std::deque<std::uint32_t> queue;
  for (std::uint32_t i = 0; i < work.length(); ++i) queue.push_back(i);

  // Each extraction touches hash_count_ cells; re-examine those. The
  // extraction cap breaks adversarial tables that could oscillate.
  const std::uint64_t max_extractions = 4 * work.length() + 16;
  std::uint64_t extracted = 0;

  while (!queue.empty() && extracted < max_extractions) {
    const std::uint32_t idx = queue.front();
    queue.pop_front();
    if (!is_peelable(work, idx)) continue;

    const IbltCell& c = work.cells()[idx];
    const auto element = static_cast<Element>(std::abs(c.sum));
    if (c.count == 1) {
      result.positives.insert(element);
      work.erase(element);
    } else {
      result.negatives.insert(element);
      work.insert(element);
    }
    ++extracted;
    for (const auto touched : work.indices_of(element)) queue.push_back(touched);
  }

  result.residual_cells = static_cast<std::size_t>(
      std::count_if(work.cells().begin(), work.cells().end(),
                    [](const IbltCell& c) { return c.sum != 0 || c.count != 0; }));
  result.success = result.residual_cells == 0;
  return result;
}

}  // namespace csiblt
