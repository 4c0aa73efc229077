#include "csiblt/measurement.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "csiblt/hashing.hpp"

namespace csiblt {

namespace {

double to_unit(std::uint64_t h) noexcept {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double gaussian_entry(std::uint64_t seed, std::uint64_t row, std::uint64_t col) noexcept {
  const std::uint64_t row_key = mix64(mix64(seed) ^ row);
  const double u1 = to_unit(mix64(row_key + 2 * col));
  const double u2 = to_unit(mix64(row_key + 2 * col + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> matrix_row(const MatrixSpec& spec, std::uint64_t row) {
  if (row >= spec.max_rows) throw std::out_of_range("measurement: row budget exceeded");
  std::vector<double> out(spec.columns);
  for (std::uint64_t j = 0; j < spec.columns; ++j) out[j] = gaussian_entry(spec.seed, row, j);
  return out;
}

MeasurementRow encode_row(const Iblt& table, const MatrixSpec& spec, std::uint64_t row) {
  if (spec.columns != table.length()) {
    throw std::invalid_argument("measurement: spec columns != table length");
  }
  if (row >= spec.max_rows) throw std::out_of_range("measurement: row budget exceeded");

  double y_sum = 0.0;
  double y_count = 0.0;
  for (std::uint64_t j = 0; j < spec.columns; ++j) {
    const double phi = gaussian_entry(spec.seed, row, j);
    const IbltCell& c = table.cells()[j];
    y_sum += phi * static_cast<double>(c.sum);
    y_count += phi * static_cast<double>(c.count);
  }
  return MeasurementRow{static_cast<std::uint32_t>(row), y_sum, y_count};
}

std::vector<MeasurementRow> encode_prefix(const Iblt& table, const MatrixSpec& spec,
                                          std::uint64_t rows) {
  if (rows > spec.max_rows) throw std::out_of_range("measurement: row budget exceeded");
  std::vector<MeasurementRow> out;
  out.reserve(rows);
  for (std::uint64_t i = 0; i < rows; ++i) out.push_back(encode_row(table, spec, i));
  return out;
}

}  // namespace csiblt
