#pragma once

#include <cstdint>
#include <vector>

#include "csiblt/iblt.hpp"

namespace csiblt {

// Deterministic, row-streamable Gaussian measurement matrix. Row i is a
// pure function of (seed, i, columns): any row can be regenerated at any
// time, on either host, and is never transmitted.
struct MatrixSpec {
  std::uint64_t seed = 0;
  std::uint64_t columns = 0;   // = table length of the IBLT being encoded
  std::uint64_t max_rows = 0;  // row budget; at max_rows the system is square

  static MatrixSpec for_table(std::uint64_t seed, std::uint64_t columns) {
    return MatrixSpec{seed, columns, columns};
  }
};

// One unit of streamed communication: a row index and the dot products of
// that matrix row with the two table columns.
struct MeasurementRow {
  std::uint32_t index = 0;
  double y_sum = 0.0;
  double y_count = 0.0;

  bool operator==(const MeasurementRow&) const = default;
};

// Standard normal entry (row, col) of the matrix keyed by seed.
// Two uniforms are drawn from the mix64 stream and combined with the
// Box-Muller cosine transform:
//   row_key = mix64(mix64(seed) ^ row)
//   u1 = unit(mix64(row_key + 2*col)), u2 = unit(mix64(row_key + 2*col + 1))
//   entry  = sqrt(-2 ln u1) * cos(2 pi u2)
// where unit(h) = ((h >> 11) + 0.5) * 2^-53, an open-interval (0,1) value.
double gaussian_entry(std::uint64_t seed, std::uint64_t row, std::uint64_t col) noexcept;

// Full matrix row; throws std::out_of_range once the row budget is spent.
std::vector<double> matrix_row(const MatrixSpec& spec, std::uint64_t row);

// y[row] = (matrix row) . (table columns). Throws std::invalid_argument on
// a column-count mismatch and std::out_of_range past the row budget.
MeasurementRow encode_row(const Iblt& table, const MatrixSpec& spec, std::uint64_t row);

// Rows 0..rows-1, identical to repeated encode_row calls.
std::vector<MeasurementRow> encode_prefix(const Iblt& table, const MatrixSpec& spec,
                                          std::uint64_t rows);

}  // namespace csiblt
