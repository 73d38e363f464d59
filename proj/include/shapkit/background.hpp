#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace shapkit {

/// N x M reference sample used to integrate out absent features.
class BackgroundData {
 public:
  // Row-major N x M values. Config error when N == 0 or M == 0, shape error
  // when values.size() != N * M, numeric error on non-finite entries.
  BackgroundData(std::vector<double> values, int num_rows, int num_cols);
  static BackgroundData from_rows(const std::vector<std::vector<double>>& rows);
  static BackgroundData single(std::vector<double> reference);

  int num_rows() const noexcept { return num_rows_; }
  int num_cols() const noexcept { return num_cols_; }
  std::span<const double> row(int r) const {
    return {values_.data() + static_cast<std::size_t>(r) * num_cols_,
            static_cast<std::size_t>(num_cols_)};
  }
  const std::vector<double>& means() const noexcept { return means_; }
  const std::vector<double>& values() const noexcept { return values_; }

  // Seeded uniform subsample of `max_rows` rows (without replacement,
  // original order kept) when N exceeds it, otherwise a copy.
  BackgroundData capped(int max_rows, std::uint64_t seed) const;

 private:
  std::vector<double> values_;
  int num_rows_;
  int num_cols_;
  std::vector<double> means_;
};

}  // namespace shapkit
