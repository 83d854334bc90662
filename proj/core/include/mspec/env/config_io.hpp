#pragma once

#include "mspec/common/config_file.hpp"
#include "mspec/env/types.hpp"

namespace mspec::env {

// Keys match NetworkConfig / TaskDistParams field names; missing keys keep
// their defaults. weights/cost_coeffs/penalty_coeffs/power_levels are
// comma-separated lists.
NetworkConfig network_config_from(const KeyValueFile& kv);
TaskDistParams task_dist_from(const KeyValueFile& kv);

// All keys the two loaders understand (used to reject unknown keys upstream).
const std::vector<std::string>& env_config_keys();

}  // namespace mspec::env
