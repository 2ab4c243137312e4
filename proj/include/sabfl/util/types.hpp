#pragma once

#include <cstdint>

namespace sabfl {

using ParticipantId = std::uint32_t;

}  // namespace sabfl
