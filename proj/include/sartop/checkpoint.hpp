#ifndef SARTOP_CHECKPOINT_HPP_
#define SARTOP_CHECKPOINT_HPP_

#include <string>

#include "sartop/network.hpp"

namespace sartop {

inline constexpr int kCheckpointFormatVersion = 1;

/// Text checkpoint: format version, the network spec, and every parameter
/// array as decimal literals in row-major order. The round trip reproduces
/// parameters to full double precision.
std::string checkpoint_to_string(const Network& net);
Network checkpoint_from_string(const std::string& text);

void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

}  // namespace sartop

#endif  // SARTOP_CHECKPOINT_HPP_
