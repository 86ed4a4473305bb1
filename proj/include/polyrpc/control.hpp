#pragma once

#include "polyrpc/rpc.hpp"

namespace polyrpc {

/// Remote administration surface for a space's policy manager. Exported at
/// the reserved object id 0, so any peer can steer policy with an ordinary
/// CALL envelope and no extra wire protocol.
inline constexpr std::uint64_t kControlObjectId = 0;
inline constexpr const char* kControlTypeName = "polyrpc.ManagerControl";

/// Registers the control type in the space's type registry and exports the
/// control object; returns its reference.
RemoteReference install_manager_control(Space& space);

}  // namespace polyrpc
