#pragma once

#include <cstdint>

#include "expertloop/sim/scenario.hpp"

namespace expertloop::sim {

// A reproducible random scenario over the bundled configuration: three
// seekers asking questions from a fixed pool, experts pressing buttons and
// typing corrections, and clock jumps between 1 minute and 9 hours.
ScenarioScript random_script(std::uint64_t seed, std::size_t steps);

}  // namespace expertloop::sim
