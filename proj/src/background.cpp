#include "shapkit/background.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "shapkit/error.hpp"

namespace shapkit {

BackgroundData::BackgroundData(std::vector<double> values, int num_rows,
                               int num_cols)
    : values_(std::move(values)), num_rows_(num_rows), num_cols_(num_cols) {
  if (num_rows < 1 || num_cols < 1) {
    throw Error(ErrorCode::config, "background data must have at least one row "
                                   "and one column");
  }
  if (values_.size() != static_cast<std::size_t>(num_rows) * num_cols) {
    throw Error(ErrorCode::shape, "background values do not form a " +
                                      std::to_string(num_rows) + "x" +
                                      std::to_string(num_cols) + " matrix");
  }
  means_.assign(num_cols, 0.0);
  for (int r = 0; r < num_rows; ++r) {
    for (int c = 0; c < num_cols; ++c) {
      const double v = values_[static_cast<std::size_t>(r) * num_cols + c];
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::numeric, "non-finite background value");
      }
      means_[c] += v;
    }
  }
  for (double& m : means_) m /= num_rows;
}

BackgroundData BackgroundData::from_rows(
    const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorCode::config, "background data is empty");
  const auto cols = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw Error(ErrorCode::shape, "ragged background rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return {std::move(flat), static_cast<int>(rows.size()),
          static_cast<int>(cols)};
}

BackgroundData BackgroundData::single(std::vector<double> reference) {
  const int cols = static_cast<int>(reference.size());
  return {std::move(reference), 1, cols};
}

BackgroundData BackgroundData::capped(int max_rows, std::uint64_t seed) const {
  if (max_rows < 1 || num_rows_ <= max_rows) return *this;
  std::vector<int> idx(num_rows_);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first max_rows slots are a uniform sample.
  for (int i = 0; i < max_rows; ++i) {
    std::uniform_int_distribution<int> pick(i, num_rows_ - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(max_rows);
  std::sort(idx.begin(), idx.end());
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(max_rows) * num_cols_);
  for (int r : idx) {
    auto src = row(r);
    flat.insert(flat.end(), src.begin(), src.end());
  }
  return {std::move(flat), max_rows, num_cols_};
}

}  // namespace shapkit
