#ifndef L2NAS_SERIALIZE_HPP
#define L2NAS_SERIALIZE_HPP

#include "json.hpp"
#include "l2nas/agent.hpp"

namespace l2nas {

// Stable JSON encodings shared by config files and checkpoints.
nlohmann::json agent_config_to_json(const AgentConfig& config);
AgentConfig agent_config_from_json(const nlohmann::json& j);

nlohmann::json space_to_json(const SearchSpaceSpec& space);
SearchSpaceSpec space_from_json(const nlohmann::json& j);

nlohmann::json step_log_to_json(const StepLog& log);
StepLog step_log_from_json(const nlohmann::json& j);

}  // namespace l2nas

#endif  // L2NAS_SERIALIZE_HPP
