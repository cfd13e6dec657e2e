#include "spoofres/filter.hpp"

#include <algorithm>

#include "spoofres/error.hpp"

namespace spoofres {

std::vector<EstimateSlot> trim_extremes(std::vector<EstimateSlot> slots, int c) {
  if (c < 0) throw Error(ErrorCode::ConfigInvalid, "trim count must be non-negative");
  std::sort(slots.begin(), slots.end(), [](const EstimateSlot& l, const EstimateSlot& r) {
    if (l.value != r.value) return l.value < r.value;
    return l.sender < r.sender;
  });
  const auto m = static_cast<std::ptrdiff_t>(slots.size());
  if (m <= 2 * static_cast<std::ptrdiff_t>(c)) return {};
  return {slots.begin() + c, slots.end() - c};
}

std::map<NodeId, double> make_weights(const std::vector<EstimateSlot>& retained) {
  if (retained.empty()) throw Error(ErrorCode::EmptyRetainedSet, "no values survive trimming");
  const double w = 1.0 / static_cast<double>(retained.size());
  std::map<NodeId, double> out;
  for (const auto& slot : retained) out[slot.sender] = w;
  return out;
}

double filtered_update(const FilterParams& params, const std::vector<EstimateSlot>& slots,
                       double current) {
  const auto retained = trim_extremes(slots, params.trim());
  if (retained.empty()) return current;
  // Summing in sorted order keeps the result independent of input order.
  double sum = 0.0;
  for (const auto& slot : retained) sum += slot.value;
  return params.lambda * (sum / static_cast<double>(retained.size()));
}

int beta_prime(int beta, int kbar) {
  if (beta < 0 || kbar < 1) throw Error(ErrorCode::ConfigInvalid, "beta >= 0 and kbar >= 1 required");
  return beta / kbar + 1;
}

}  // namespace spoofres
