#pragma once

#include "fairslice/model.hpp"

namespace fairslice {

// A fractional outcome on the post-disposal grid plus the map back to the original cake.
struct Solution {
  FractionalAssignment assignment;
  OriginMap origin;
  std::vector<std::string> names;

  Allocation rescaled_allocation(const Layout& layout = ContiguousLayout{}) const {
    Allocation alloc = materialize(assignment, layout, names);
    alloc.coordinates = Coordinates::Rescaled;
    alloc.origin = origin;
    return alloc;
  }

  Allocation allocation(const Layout& layout = ContiguousLayout{}) const {
    return to_original(rescaled_allocation(layout));
  }

  // Utilities in original units (rescaled lengths are original lengths / kept).
  std::vector<Rational> utilities() const {
    auto u = assignment.utilities();
    for (auto& x : u) x *= origin.kept();
    return u;
  }
};

inline Disposal prepare(const Profile& profile) { return free_disposal(refine(profile)); }

}  // namespace fairslice
