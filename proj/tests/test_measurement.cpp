#include "csiblt/measurement.hpp"

#include <cmath>
#include <stdexcept>

#include "csiblt/hashing.hpp"
#include "csiblt/iblt.hpp"
#include "doctest.h"

using namespace csiblt;

namespace {

Iblt build(const std::vector<Element>& elements, std::uint64_t b, int k, std::uint64_t seed) {
  Iblt t(b, k, seed);
  for (const Element e : elements) t.insert(e);
  return t;
}

// Independent dot-product oracle: plain accumulation over matrix_row.
MeasurementRow encode_oracle(const Iblt& table, const MatrixSpec& spec, std::uint64_t i) {
  const auto row = matrix_row(spec, i);
  double ds = 0.0, dc = 0.0;
  for (std::uint64_t j = 0; j < spec.columns; ++j) {
    ds += row[j] * static_cast<double>(table.cells()[j].sum);
    dc += row[j] * static_cast<double>(table.cells()[j].count);
  }
  return {static_cast<std::uint32_t>(i), ds, dc};
}

}  // namespace

TEST_CASE("matrix rows are identical across independent generations") {
  const auto spec = MatrixSpec::for_table(123, 50);
  const auto row_host_a = matrix_row(spec, 3);
  const auto row_host_b = matrix_row(MatrixSpec::for_table(123, 50), 3);
  CHECK(row_host_a == row_host_b);
}

TEST_CASE("different seeds give different rows") {
  const auto a = matrix_row(MatrixSpec::for_table(1, 32), 0);
  const auto b = matrix_row(MatrixSpec::for_table(2, 32), 0);
  CHECK(a != b);
}

TEST_CASE("row budget is enforced") {
  const auto spec = MatrixSpec::for_table(5, 10);
  CHECK_THROWS_AS(matrix_row(spec, 10), std::out_of_range);
  CHECK_THROWS_AS(encode_row(Iblt(10, 2, 0), spec, 10), std::out_of_range);
  CHECK_THROWS_AS(encode_prefix(Iblt(10, 2, 0), spec, 11), std::out_of_range);
}

TEST_CASE("gaussian stream has standard-normal statistics") {
  double sum = 0.0, sum_sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double g = gaussian_entry(20240601, static_cast<std::uint64_t>(i) / 400,
                                    static_cast<std::uint64_t>(i) % 400);
    sum += g;
    sum_sq += g * g;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(mean > -0.02);
  CHECK(mean < 0.02);
  CHECK(var > 0.97);
  CHECK(var < 1.03);
}

TEST_CASE("zero table encodes to zero for every row") {
  const Iblt zero(40, 2, 9);
  const auto spec = MatrixSpec::for_table(31, 40);
  for (std::uint64_t i = 0; i < 40; i += 7) {
    const auto row = encode_row(zero, spec, i);
    CHECK(row.y_sum == 0.0);
    CHECK(row.y_count == 0.0);
  }
}

TEST_CASE("one-hot table picks out a single matrix entry") {
  Iblt t(24, 2, 9);
  t.cell(13) = IbltCell{5, 1};
  const auto spec = MatrixSpec::for_table(77, 24);
  for (std::uint64_t i = 0; i < 5; ++i) {
    const double phi = gaussian_entry(77, i, 13);
    const auto row = encode_row(t, spec, i);
    CHECK(row.y_sum == doctest::Approx(5.0 * phi).epsilon(1e-12));
    CHECK(row.y_count == doctest::Approx(phi).epsilon(1e-12));
  }
}

TEST_CASE("encode_row matches the brute-force dot product") {
  const Iblt a = build({1, 2, 3, 4, 5, 6, 7}, 14, 2, 7);
  const auto spec = MatrixSpec::for_table(11, 14);
  for (std::uint64_t i = 0; i < 14; ++i) {
    const auto got = encode_row(a, spec, i);
    const auto want = encode_oracle(a, spec, i);
    CHECK(got.index == want.index);
    CHECK(got.y_sum == doctest::Approx(want.y_sum).epsilon(1e-12));
    CHECK(got.y_count == doctest::Approx(want.y_count).epsilon(1e-12));
  }
}

TEST_CASE("encode_prefix equals repeated encode_row") {
  const Iblt a = build({3, 1, 4, 1 + 5, 9 * 2, 65}, 20, 3, 13);
  const auto spec = MatrixSpec::for_table(21, 20);
  CHECK(encode_prefix(a, spec, 0).empty());
  const auto prefix = encode_prefix(a, spec, 6);
  REQUIRE(prefix.size() == 6);
  CHECK(prefix[3] == encode_row(a, spec, 3));
  for (std::uint64_t i = 0; i < 6; ++i) CHECK(prefix[i] == encode_row(a, spec, i));
}

TEST_CASE("dimension mismatch is rejected") {
  const auto spec = MatrixSpec::for_table(3, 16);
  CHECK_THROWS_AS(encode_row(Iblt(14, 2, 0), spec, 0), std::invalid_argument);
}

TEST_CASE("measurement differences equal the encoded difference table") {
  // Per-row linearity, the identity the whole protocol rests on.
  SplitMix64 rng(831);
  for (int trial = 0; trial < 10; ++trial) {
    const std::uint64_t table_seed = rng.next();
    const std::uint64_t matrix_seed = rng.next();
    Iblt a(60, 2, table_seed), b(60, 2, table_seed);
    for (int i = 0; i < 40; ++i) a.insert(static_cast<Element>(rng.next_in(1, 1 << 30)));
    for (int i = 0; i < 40; ++i) b.insert(static_cast<Element>(rng.next_in(1, 1 << 30)));
    const auto spec = MatrixSpec::for_table(matrix_seed, 60);
    const Iblt diff = a.subtract(b);
    for (std::uint64_t i = 0; i < 60; i += 13) {
      const auto ra = encode_row(a, spec, i);
      const auto rb = encode_row(b, spec, i);
      const auto rd = encode_row(diff, spec, i);
      const double scale = std::max({1.0, std::fabs(rd.y_sum), std::fabs(rd.y_count)});
      CHECK(std::fabs((ra.y_sum - rb.y_sum) - rd.y_sum) / scale < 1e-9);
      CHECK(std::fabs((ra.y_count - rb.y_count) - rd.y_count) / scale < 1e-9);
    }
  }
}
