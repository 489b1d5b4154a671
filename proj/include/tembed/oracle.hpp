#pragma once
// Exhaustive ground-truth solver for desk-scale instances. The search walks
// components in topological order and enumerates, for every instance output,
// all ways to distribute the rate over (arc, node) targets in steps of
// rate_granularity, and for every resulting edge one supporting path among
// the k shortest (by delay) between the endpoints. Instances exist exactly
// where flow arrives, so placement enumeration and flow enumeration collapse
// into one tree; branch-and-bound prunes on the monotone part of the
// objective. Restricting each edge to a single supporting path loses only
// optima that must split one flow across parallel paths under capacity
// pressure; no shipped instance needs that (splitting otherwise only adds
// delay-indicator cost).

#include <cstdint>
#include <functional>
#include <vector>

#include "tembed/model.hpp"

namespace tembed {

struct OracleLimits {
  int max_nodes{6};
  int max_components{8};
  int max_total_instances{8};
  double rate_granularity{1.0};
  // Hard cap on search states; the search refuses (throws) when it would
  // exceed this, reporting how many states it had examined.
  uint64_t max_states{50'000'000};
  int paths_per_pair{4};  // k in the k-shortest-path support
};

struct OracleResult {
  ConfigurationScore best;
  SystemConfiguration config;
  Weights weights;        // the default weights the score was computed with
  uint64_t states{0};     // search states examined
};

// Returns the lexicographic optimum (violations, then delay, then resource
// terms — encoded in the weighted objective). Throws std::invalid_argument
// when the instance exceeds the limits and std::runtime_error when the state
// cap trips or no valid configuration exists within the limits.
OracleResult brute_force_embed(const SubstrateNetwork& net,
                               const std::vector<ServiceRequest>& services,
                               const OracleLimits& limits = {});

// Invokes `fn` for every complete valid configuration the search visits.
// With `exhaustive` set, branch-and-bound pruning is disabled so the walk
// covers the entire (discretized) configuration space — meant for property
// tests on tiny instances.
void enumerate_configurations(
    const SubstrateNetwork& net, const std::vector<ServiceRequest>& services,
    const OracleLimits& limits, bool exhaustive,
    const std::function<void(const SystemConfiguration&,
                             const ConfigurationScore&)>& fn);

}  // namespace tembed
