#pragma once

#include "rsms/bloom_filter.hpp"
#include "rsms/bytes.hpp"
#include "rsms/cost_model.hpp"
#include "rsms/counters.hpp"
#include "rsms/curve.hpp"
#include "rsms/digest.hpp"
#include "rsms/group_protocol.hpp"
#include "rsms/hash_family.hpp"
#include "rsms/hybrid_encryption.hpp"
#include "rsms/ledger.hpp"
#include "rsms/pool_protocol.hpp"
#include "rsms/rng.hpp"
#include "rsms/scenario.hpp"
#include "rsms/shamir.hpp"
#include "rsms/sim_network.hpp"
#include "rsms/throughput_sim.hpp"

namespace rsms {
inline constexpr const char* kArtifactVersion = "1.0.0";
}
