#include "shapkit/coalition.hpp"

#include <string>

#include "shapkit/error.hpp"

namespace shapkit {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::capacity: return "capacity_error";
    case ErrorCode::config: return "config_error";
    case ErrorCode::shape: return "shape_error";
    case ErrorCode::numeric: return "numeric_error";
    case ErrorCode::parse: return "parse_error";
    case ErrorCode::validation: return "validation_error";
    case ErrorCode::singular: return "singular_system";
    case ErrorCode::budget_required: return "budget_required";
    case ErrorCode::invalid_pair: return "invalid_pair";
    case ErrorCode::io: return "io_error";
  }
  return "unknown_error";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::numeric:
    case ErrorCode::singular:
      return 3;
    case ErrorCode::io:
      return 4;
    default:
      return 2;
  }
}

Coalition::Coalition(Mask mask, int num_features)
    : mask_(mask), num_features_(num_features) {
  if (num_features < 1 || num_features > kMaxFeatures) {
    throw Error(ErrorCode::capacity,
                "coalition feature count must be in [1, 64], got " +
                    std::to_string(num_features));
  }
  if ((mask & ~full_mask(num_features)) != 0) {
    throw Error(ErrorCode::validation,
                "coalition mask has bits at or above M=" +
                    std::to_string(num_features));
  }
}

Coalition Coalition::with(int feature) const {
  return {mask_ | (Mask{1} << feature), num_features_};
}

Coalition Coalition::without(int feature) const {
  return {mask_ & ~(Mask{1} << feature), num_features_};
}

std::vector<int> Coalition::members() const {
  std::vector<int> out;
  out.reserve(size());
  for (Mask m = mask_; m != 0; m &= m - 1) {
    out.push_back(std::countr_zero(m));
  }
  return out;
}

std::vector<Coalition> enumerate_coalitions(int num_features) {
  if (num_features < 1 || num_features > kMaxEnumerationFeatures) {
    throw Error(ErrorCode::capacity,
                "enumeration requires 1 <= M <= 25, got M=" +
                    std::to_string(num_features));
  }
  const Mask count = Mask{1} << num_features;
  std::vector<Coalition> out;
  out.reserve(count);
  for (Mask m = 0; m < count; ++m) out.emplace_back(m, num_features);
  return out;
}

}  // namespace shapkit
