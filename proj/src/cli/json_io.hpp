#pragma once

#include "json.hpp"
#include "poischaos/measure.hpp"

namespace poischaos::cli
{
//! Nested arrays of depth = order; a plain number for order zero
nlohmann::ordered_json kernel_json(Kernel const& f);
}  // namespace poischaos::cli
