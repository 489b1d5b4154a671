#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "helpers.hpp"
#include "tembed/heuristic.hpp"
#include "tembed/oracle.hpp"
#include "tembed/reduction.hpp"

using namespace tembed;
using namespace tembed::testutil;

namespace {

OracleLimits reduction_limits(const EmbeddingInstance& inst) {
  OracleLimits lim;
  lim.max_nodes = static_cast<int>(inst.network.nodes.size());
  lim.max_components = 3;
  lim.max_total_instances =
      static_cast<int>(inst.sources.size() + inst.network.nodes.size());
  return lim;
}

}  // namespace

TEST_CASE("empty service set costs nothing") {
  SubstrateNetwork net = path_network(2, 10, 10, 10, 1);
  OracleResult r = brute_force_embed(net, {});
  CHECK(r.best.objective == doctest::Approx(0.0));
  CHECK(r.best.n_violations == 0);
  CHECK(r.config.services.empty());
  CHECK(validate_configuration(r.config).empty());
}

TEST_CASE("known optimum on the smallest covering instance") {
  // Universe {0,1,2}, sets {0,1} and {1,2}, k = 2: both relays are forced,
  // so the optimum costs 2 relay mem + 1 sink cpu + 5 unit link flows = 8
  // with zero violations and zero delay.
  EmbeddingInstance inst = to_embedding({3, {{0, 1}, {1, 2}}, 2});
  OracleResult r = brute_force_embed(inst.network, {inst.request()},
                                     reduction_limits(inst));
  CHECK(r.best.n_violations == 0);
  CHECK(r.best.total_delay == doctest::Approx(0.0));
  CHECK(r.best.total_cpu == doctest::Approx(1.0));
  CHECK(r.best.total_mem == doctest::Approx(2.0));
  CHECK(r.best.total_rate == doctest::Approx(5.0));
  CHECK(r.best.objective == doctest::Approx(8.0));
  CHECK(r.states > 0);
  CHECK(validate_configuration(r.config).empty());
  // The reported score is reproducible from the returned configuration.
  CHECK(score(r.config, nullptr, r.weights).objective ==
        doctest::Approx(r.best.objective));
}

TEST_CASE("uncoverable budget forces a violation") {
  // Two disjoint singletons with k = 1: no cover of size 1 exists, so the
  // best embedding must violate some capacity.
  SetCoverInstance sc{2, {{0}, {1}}, 1};
  CHECK(brute_force_set_cover(sc) == 2);
  EmbeddingInstance inst = to_embedding(sc);
  OracleResult r = brute_force_embed(inst.network, {inst.request()},
                                     reduction_limits(inst));
  CHECK(r.best.n_violations >= 1);
}

TEST_CASE("exhaustive enumeration visits every split") {
  // Rate 2 in unit steps toward one worker over two nodes: the worker can
  // sit on node 0, node 1, or both -> exactly three complete configurations.
  SubstrateNetwork net = path_network(2, 100, 100, 50, 1);
  Template t = chain_template(0, {{0, 1, 0, 0, 0, 0}});
  ServiceRequest req{t, {{0, 0, 2}}};
  OracleLimits lim;
  lim.max_nodes = 2;
  lim.max_components = 2;
  lim.max_total_instances = 3;
  int leaves = 0;
  enumerate_configurations(net, {req}, lim, /*exhaustive=*/true,
                           [&](const SystemConfiguration& c,
                               const ConfigurationScore& s) {
                             ++leaves;
                             CHECK(validate_configuration(c).empty());
                             CHECK(s.n_violations == 0);
                           });
  CHECK(leaves == 3);
}

TEST_CASE("pruned search finds the exhaustive minimum") {
  SubstrateNetwork net = path_network(3, 4, 100, 2, 1);
  Template t = chain_template(0, {{2, 1, 0, 0, 0, 1}});
  ServiceRequest req{t, {{0, 0, 2}}};
  OracleLimits lim;
  lim.max_nodes = 3;
  lim.max_components = 3;
  lim.max_total_instances = 4;

  double best = 1e300;
  enumerate_configurations(net, {req}, lim, /*exhaustive=*/true,
                           [&](const SystemConfiguration&,
                               const ConfigurationScore& s) {
                             best = std::min(best, s.objective);
                           });
  OracleResult r = brute_force_embed(net, {req}, lim);
  CHECK(r.best.objective == doctest::Approx(best));
}

TEST_CASE("oracle never reports fewer violations than the heuristic achieves") {
  // Spot instances; the statistical sweep lives in the acceptance suite.
  for (double rate : {2.0, 5.0, 9.0}) {
    SubstrateNetwork net;
    net.nodes.push_back({0, 0, 0});
    net.nodes.push_back({1, 5, 50});
    net.nodes.push_back({2, 5, 50});
    connect(net, 0, 1, 100, 1);
    connect(net, 1, 2, 100, 1);
    Template t = chain_template(0, {{0, 1, 0, 0, 0, 0}});
    ServiceRequest req{t, {{0, 0, rate}}};

    OracleLimits lim;
    lim.max_nodes = 3;
    lim.max_components = 2;
    lim.max_total_instances = 4;
    OracleResult r = brute_force_embed(net, {req}, lim);

    SystemConfiguration start;
    start.substrate = net;
    SystemConfiguration h = embed(start, {req});
    CHECK(score(h, nullptr, r.weights).n_violations >= r.best.n_violations);
  }
}

TEST_CASE("limit refusals") {
  SubstrateNetwork big = path_network(7, 10, 10, 10, 1);
  Template t = chain_template(0, {{0, 1, 0, 0, 0, 0}});
  // 7 nodes exceed the default max_nodes of 6.
  CHECK_THROWS_AS(brute_force_embed(big, {{t, {{0, 0, 1}}}}),
                  std::invalid_argument);

  SubstrateNetwork net = path_network(2, 10, 10, 10, 1);
  OracleLimits tiny;
  tiny.max_nodes = 2;
  tiny.max_components = 2;
  tiny.max_total_instances = 1;  // the source alone fills the budget
  CHECK_THROWS_AS(brute_force_embed(net, {{t, {{0, 0, 1}, {1, 0, 1}}}}, tiny),
                  std::invalid_argument);

  OracleLimits bad;
  bad.rate_granularity = 0.0;
  CHECK_THROWS_AS(brute_force_embed(net, {{t, {{0, 0, 1}}}}, bad),
                  std::invalid_argument);
}

TEST_CASE("the state cap aborts oversized searches") {
  EmbeddingInstance inst = to_embedding({3, {{0, 1}, {1, 2}}, 2});
  OracleLimits lim = reduction_limits(inst);
  lim.max_states = 5;
  try {
    brute_force_embed(inst.network, {inst.request()}, lim);
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("state cap") != std::string::npos);
  }
}
