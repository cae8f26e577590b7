#include "sawlab/command.hpp"

#include "sawlab/util.hpp"

namespace sawlab {

void Command::integrate_heading(double dt) {
  heading_ref = wrap_angle(heading_ref + cyaw * dt);
}

Command Command::mirrored() const {
  return {cx, -cy, -cyaw, wrap_angle(-heading_ref)};
}

}  // namespace sawlab
