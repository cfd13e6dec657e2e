#pragma once

#include <cstdint>

#include "spoofres/config.hpp"

namespace spoofres {

/// Node ids of the sample network: R1 = 0..3, R2 = 4..7, R3 = 8..12 and
/// the spoofer is 13.
struct SampleNetwork {
  static constexpr NodeId kR1First = 0;
  static constexpr NodeId kR2First = 4;
  static constexpr NodeId kR3First = 8;
  static constexpr NodeId kSpoofer = 13;
  static constexpr int kNodes = 14;

  static NodeSet r1();
  static NodeSet r2();
  static NodeSet r3();
};

/// Sample network with the edges and delays of the reference study, no
/// adversary policy and zero initial estimates.
RunConfig sample_network();

/// Two-sequence estimate injection; the network still recovers.
RunConfig scenario_s1();

/// Construction-phase flag tampering plus injection; followers stall.
RunConfig scenario_s2();

struct RandomScenarioOptions {
  int regular = 13;
  int spoofers = 1;
  int unstable_modes = 1;
  int stable_modes = 1;
  double edge_probability = 0.85;
  Step horizon = 300;
  /// Required robustness w.r.t. sources plus adversaries; 0 picks 3(beta+1)f+1.
  int robustness = 0;
  int max_attempts = 2000;
};

/// Random network that is strongly r-robust w.r.t. every unstable mode's
/// sources plus adversaries, with random delays, schedules and a policy
/// drawn from the built-in library. Deterministic in `seed`.
RunConfig random_robust_config(std::uint64_t seed, const RandomScenarioOptions& options = {});

}  // namespace spoofres
