#include "xdr/core/phase.hpp"

#include "xdr/core/errors.hpp"

namespace xdr {

void validate_schedule(const PhaseSchedule& s) {
  if (s.od_epochs < 0 || s.pa1_epochs < 0 || s.pa2_epochs < 0) {
    throw ValidationError("phase epoch counts must be >= 0");
  }
}

Phase select_phase(int epoch, const PhaseSchedule& schedule) {
  validate_schedule(schedule);
  if (epoch < 0 || epoch >= schedule.total()) {
    throw RangeError("epoch " + std::to_string(epoch) + " outside schedule of " +
                     std::to_string(schedule.total()) + " epochs");
  }
  if (epoch < schedule.od_epochs) return Phase::OD;
  if (epoch < schedule.od_epochs + schedule.pa1_epochs) return Phase::PA1;
  return Phase::PA2;
}

}  // namespace xdr
