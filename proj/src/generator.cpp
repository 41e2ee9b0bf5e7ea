#include "teamsim/generator.hpp"

#include "teamsim/error.hpp"
#include "teamsim/llm.hpp"

namespace teamsim {

namespace {

const char* kGeneratorSystem =
    "You write simulation scenario documents. Reply with one YAML document using format_version: 1 and the fields "
    "id, title, description, seed, max_steps, start_region, env_spec {width, height, num_regions, "
    "region_name_hints}, members [{name, role, skills, backstory, trust_level}], entities [{name, kind, "
    "interactive, region, attributes}], goal {statement, predicate}. No commentary.";

}  // namespace

std::string strip_code_fence(const std::string& reply) {
  const auto first = reply.find("```");
  if (first == std::string::npos) return reply;
  const auto body = reply.find('\n', first);
  if (body == std::string::npos) return reply;
  const auto last = reply.find("```", body);
  return reply.substr(body + 1, last == std::string::npos ? std::string::npos : last - body - 1);
}

Scenario generate_scenario_draft(const std::string& prompt, llm::CompletionBackend& backend, int repair_limit) {
  if (repair_limit < 0) throw InvalidState("repair_limit must be >= 0");
  std::string feedback;
  bool last_was_syntax = false;
  std::string last_error;
  for (int attempt = 0; attempt <= repair_limit; ++attempt) {
    llm::CompletionRequest req;
    req.system = kGeneratorSystem;
    req.user = "[request]\n" + prompt + "\n";
    if (!feedback.empty()) req.user += "[previous draft problems]\n" + feedback + "\n";
    req.max_reply_chars = 8000;
    req.tag = llm::Purpose::Generator;
    const auto reply = backend.complete(req);

    try {
      Scenario s = parse_scenario(strip_code_fence(reply.text));
      const auto diags = validate_scenario(s);
      if (!has_errors(diags)) return s;
      feedback.clear();
      for (const auto& d : diags) feedback += to_string(d) + "\n";
      last_was_syntax = false;
      last_error = "draft failed validation: " + feedback;
    } catch (const SyntaxError& e) {
      feedback = e.what();
      last_was_syntax = true;
      last_error = e.what();
    } catch (const SemanticError& e) {
      feedback = e.what();
      last_was_syntax = false;
      last_error = e.what();
    }
  }
  const std::string attempts = std::to_string(repair_limit + 1) + " attempt(s)";
  if (last_was_syntax) throw AdapterError("generator produced no well-formed document after " + attempts + ": " + last_error);
  throw SemanticError("", "generator draft invalid after " + attempts + ": " + last_error);
}

}  // namespace teamsim
