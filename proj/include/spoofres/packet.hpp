#pragma once

#include <compare>
#include <cstdint>

#include "spoofres/types.hpp"

namespace spoofres {

/// Total order on deliveries. Within a step, lower phases are delivered
/// first; seq breaks ties by enqueue order.
struct ArrivalKey {
  Step step = 0;
  int phase = 0;
  std::int64_t seq = 0;

  auto operator<=>(const ArrivalKey&) const = default;
};

/// Delivery phases inside one step.
enum DeliveryPhase : int {
  kInFlightRegular = 0,
  kInFlightAdversary = 1,
  kImmediateAdversary = 2,
  kImmediateRegular = 3,
};

enum class PacketKind { Chi, Estimate };

struct Packet {
  NodeId claimed_sender = 0;
  NodeId true_origin = 0;  // ground truth, never read by receivers
  NodeId receiver = 0;
  PacketKind kind = PacketKind::Estimate;
  ModeIndex mode = 0;
  double value = 0.0;
  bool chi_valid = true;  // false models a tampered construction flag
  Step send_step = 0;
  ArrivalKey arrival;

  bool spoofed() const { return claimed_sender != true_origin; }
};

}  // namespace spoofres
