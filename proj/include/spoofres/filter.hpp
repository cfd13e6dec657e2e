#pragma once

#include <map>
#include <optional>
#include <vector>

#include "spoofres/types.hpp"

namespace spoofres {

struct FilterParams {
  int f = 0;
  int beta = 0;
  double lambda = 1.0;
  std::optional<int> trim_override;

  /// Number of largest and of smallest values discarded.
  int trim() const { return trim_override ? *trim_override : (beta + 1) * f; }
};

/// Last value received from one parent identity.
struct EstimateSlot {
  NodeId sender = 0;
  double value = 0.0;
  Step send_step = 0;
  Step arrival_step = 0;
  /// Steps between arrival and the read that uses the value.
  Step idle_lag = 0;
  /// Link delay, arrival_step - send_step.
  Step delay = 0;
};

/// Drops the c largest and c smallest slots, ordering by (value, sender).
/// Result is sorted ascending by that key.
std::vector<EstimateSlot> trim_extremes(std::vector<EstimateSlot> slots, int c);

/// Equal weights over `retained`. Throws EmptyRetainedSet if empty.
std::map<NodeId, double> make_weights(const std::vector<EstimateSlot>& retained);

/// lambda times the weighted mean of the trimmed slots, or `current`
/// unchanged when nothing survives trimming.
double filtered_update(const FilterParams& params, const std::vector<EstimateSlot>& slots,
                       double current);

/// floor(beta / kbar) + 1.
int beta_prime(int beta, int kbar);

}  // namespace spoofres
