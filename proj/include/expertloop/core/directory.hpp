#pragma once

#include <optional>
#include <vector>

#include "expertloop/core/types.hpp"

namespace expertloop {

// Read access to registered participants. Implemented by the onboarding
// registry; consumed by the workflow and the service router.
class ProfileDirectory {
public:
    virtual ~ProfileDirectory() = default;

    virtual std::optional<UserProfile> find(const UserId& id) const = 0;
    virtual std::optional<UserProfile> find_by_address(const ChannelAddress& address) const = 0;

    // The deployment's escalation expert for a track.
    virtual std::optional<UserProfile> escalation_expert(Track track) const = 0;
    virtual std::optional<UserProfile> knowledge_base_expert() const = 0;

    virtual std::vector<UserProfile> all() const = 0;
};

}  // namespace expertloop
