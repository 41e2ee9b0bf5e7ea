#pragma once

#include <string>

#include "teamsim/scenario.hpp"

namespace teamsim {

namespace llm {
class CompletionBackend;
}

// Asks a backend (purpose generator) for a scenario document and validates
// it. A failing draft is sent back with its diagnostics for up to
// `repair_limit` more attempts. Exhausted syntax failures raise AdapterError,
// exhausted semantic failures SemanticError.
Scenario generate_scenario_draft(const std::string& prompt, llm::CompletionBackend& backend, int repair_limit = 1);

// Strips a surrounding ``` fence, if any.
std::string strip_code_fence(const std::string& reply);

}  // namespace teamsim
