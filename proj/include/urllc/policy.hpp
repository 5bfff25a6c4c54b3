#pragma once

#include <string>
#include <vector>

#include "urllc/factory_env.hpp"
#include "urllc/random.hpp"

namespace urllc {

// Common interface for learned and hand-crafted allocators. The evaluator
// calls begin_episode() after every reset and act() once per Phase-I slot.
class Policy {
public:
    virtual ~Policy() = default;

    virtual std::string name() const = 0;
    virtual void begin_episode(const FactoryEnv& /*env*/) {}
    virtual std::vector<LeaderAction> act(const FactoryEnv& env, RandomStream& rng) = 0;
};

}  // namespace urllc
