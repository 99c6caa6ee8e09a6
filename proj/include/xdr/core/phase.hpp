#pragma once

#include "xdr/core/types.hpp"

namespace xdr {

/// Phase for a zero-based epoch: [0, od) -> OD, [od, od+pa1) -> PA1, rest -> PA2.
/// Throws RangeError outside [0, schedule.total()).
Phase select_phase(int epoch, const PhaseSchedule& schedule);

void validate_schedule(const PhaseSchedule& schedule);

}  // namespace xdr
