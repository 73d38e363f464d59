#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace shapkit {

// Largest feature count a Coalition can hold (one bit per feature).
inline constexpr int kMaxFeatures = 64;
// Largest feature count for which all 2^M coalitions may be enumerated.
inline constexpr int kMaxEnumerationFeatures = 25;

using Mask = std::uint64_t;

inline constexpr Mask full_mask(int num_features) {
  return num_features >= 64 ? ~Mask{0} : (Mask{1} << num_features) - 1;
}

/// A subset of the M simplified features, stored as a bitmask. Bit i set
/// means feature i is present (takes the explained instance's value).
class Coalition {
 public:
  // Throws capacity error unless 1 <= num_features <= kMaxFeatures, and
  // validation error when a bit at or above num_features is set.
  Coalition(Mask mask, int num_features);

  static Coalition empty(int num_features) { return {0, num_features}; }
  static Coalition full(int num_features) {
    return {full_mask(num_features), num_features};
  }

  Mask mask() const noexcept { return mask_; }
  int num_features() const noexcept { return num_features_; }
  int size() const noexcept { return std::popcount(mask_); }

  bool contains(int feature) const noexcept {
    return (mask_ >> feature) & Mask{1};
  }
  Coalition with(int feature) const;
  Coalition without(int feature) const;
  Coalition complement() const {
    return {~mask_ & full_mask(num_features_), num_features_};
  }

  std::vector<int> members() const;

  friend bool operator==(const Coalition&, const Coalition&) = default;

 private:
  Mask mask_;
  int num_features_;
};

/// All 2^M coalitions in ascending mask order, from the empty set to the
/// full set. Capacity error unless 1 <= M <= kMaxEnumerationFeatures.
std::vector<Coalition> enumerate_coalitions(int num_features);

}  // namespace shapkit
