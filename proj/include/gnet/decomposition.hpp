#pragma once

// Strategic independence: nodes interact only through probability arcs and
// utility-table neighborhoods. Connected components of the union of those two
// graphs can be solved as separate nets — out-of-component factors multiply
// both the numerator and denominator of every conditional payoff and cancel —
// and full-net equilibria are exactly the products of component equilibria.

#include <vector>

#include "gnet/model.hpp"
#include "gnet/profile.hpp"

namespace gnet {

struct Component {
  std::vector<NodeId> nodes;  // original node ids, ascending
  GNet net;                   // induced subnet (player list unchanged)
};

std::vector<Component> strategic_components(const GNet& net);

// Copy a component profile into/out of the full-net coordinate vector. Blocks
// line up exactly: a component node keeps its domain and (relative) parents.
void scatter_profile(const GNet& net, const Component& comp, const Profile& sub,
                     Profile& full);
Profile gather_profile(const GNet& net, const Component& comp,
                       const Profile& full);

}  // namespace gnet
