#pragma once

#include <string>

#include "fewb/networks.hpp"

namespace fewb::nets {

/// Checkpoint layout: magic "FEWB1", u32 parameter count, then per parameter
/// u32 name length + name bytes, u32 rank, u64 dims, and the raw values as
/// 64-bit little-endian IEEE doubles.
void save_checkpoint(const std::string& path, AgentNetworks& nets);

/// Loads weights into already-constructed networks. Rejects files whose
/// magic, parameter set, or shapes disagree (CheckpointError).
void load_checkpoint(const std::string& path, AgentNetworks& nets);

}  // namespace fewb::nets
