#pragma once

#include <string>

#include "aware/model.hpp"

namespace aware {

// Graphviz rendering: one box per state showing its true propositions and
// each agent's awareness set, one edge style per agent (colors when
// agent_colors is set), probability labels on edges. Output is byte-stable
// for a given model.
std::string to_dot(const AwarenessModel& m, bool agent_colors = false);

} // namespace aware
