#pragma once

#include <cstdint>
#include <set>

namespace spoofres {

/// Node identifiers are 0-based indices into the node set.
using NodeId = int;

/// Discrete time index of the global sampling clock.
using Step = std::int64_t;

/// Mode index j into the diagonalized state z.
using ModeIndex = int;

using NodeSet = std::set<NodeId>;

}  // namespace spoofres
