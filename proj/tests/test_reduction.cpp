#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tembed/model.hpp"
#include "tembed/oracle.hpp"
#include "tembed/reduction.hpp"

using namespace tembed;

namespace {

bool mentions(const std::vector<std::string>& msgs, const std::string& what) {
  return std::any_of(msgs.begin(), msgs.end(), [&](const std::string& m) {
    return m.find(what) != std::string::npos;
  });
}

// Independent upper bound: repeatedly take the set covering the most
// still-uncovered elements.
int greedy_cover(const SetCoverInstance& sc) {
  std::set<int> missing;
  for (int i = 0; i < sc.universe; ++i) missing.insert(i);
  int used = 0;
  while (!missing.empty()) {
    size_t best = 0;
    int best_gain = -1;
    for (size_t j = 0; j < sc.sets.size(); ++j) {
      int gain = 0;
      for (int e : sc.sets[j]) gain += missing.count(e) ? 1 : 0;
      if (gain > best_gain) {
        best_gain = gain;
        best = j;
      }
    }
    for (int e : sc.sets[best]) missing.erase(e);
    ++used;
  }
  return used;
}

}  // namespace

TEST_CASE("set cover validation") {
  CHECK(validate_set_cover({3, {{0, 1}, {2}}, 1}).empty());
  CHECK(mentions(validate_set_cover({0, {}, 1}), "universe"));
  CHECK(mentions(validate_set_cover({2, {{0, 1}}, 0}), "k must be at least 1"));
  CHECK(mentions(validate_set_cover({2, {{0, 5}, {1}}, 1}),
                 "outside the universe"));
  CHECK(mentions(validate_set_cover({3, {{0, 1}}, 1}),
                 "element 2 is not covered"));
}

TEST_CASE("smallest instance: structure is forced") {
  EmbeddingInstance inst = to_embedding({1, {{0}}, 1});
  CHECK(validate_network(inst.network).empty());
  CHECK(validate_template(inst.tmpl).empty());
  REQUIRE(inst.network.nodes.size() == 3);  // element, set, collector
  REQUIRE(inst.network.links.size() == 2);  // membership + collection

  // Element node: no resources at all; set node: 1 mem; collector: 1 cpu.
  CHECK(inst.network.nodes[0].cap_cpu == 0);
  CHECK(inst.network.nodes[0].cap_mem == 0);
  CHECK(inst.network.nodes[1].cap_cpu == 0);
  CHECK(inst.network.nodes[1].cap_mem == 1);
  CHECK(inst.network.nodes[2].cap_cpu == 1);
  CHECK(inst.network.nodes[2].cap_mem == 0);
  for (const Link& l : inst.network.links) {
    CHECK(l.max_rate == 1);
    CHECK(l.delay == 0);
  }
  CHECK(inst.network.find_link(0, 1) == 0);
  CHECK(inst.network.find_link(1, 2) == 1);

  REQUIRE(inst.sources.size() == 1);
  CHECK(inst.sources[0].node == 0);
  CHECK(inst.sources[0].rate == 1);

  // Template: source, relay (constant output 1), step-cpu sink.
  REQUIRE(inst.tmpl.components.size() == 3);
  CHECK(inst.tmpl.components[0].is_source);
  CHECK(inst.tmpl.components[1].mem_fn.eval_zero() == doctest::Approx(1.0));
  double in5[] = {5.0};
  CHECK(inst.tmpl.components[1].out_fns[0].eval(in5) == doctest::Approx(1.0));
  CHECK(!inst.tmpl.components[2].cpu_fn.is_affine());
  double in1[] = {1.0}, in2[] = {2.0};
  CHECK(inst.tmpl.components[2].cpu_fn.eval(in1) == doctest::Approx(1.0));
  CHECK(inst.tmpl.components[2].cpu_fn.eval(in2) == doctest::Approx(2.0));
  CHECK(inst.tmpl.arcs.size() == 2);
}

TEST_CASE("node and link counts scale with the family shape") {
  // |U| = 4, three sets, k = 2: 4 + 3 + 1 nodes and memberships + 3 links.
  SetCoverInstance sc{4, {{0, 1}, {1, 2}, {2, 3}}, 2};
  EmbeddingInstance inst = to_embedding(sc);
  CHECK(inst.network.nodes.size() == 8);
  CHECK(inst.network.links.size() == 6 + 3);
  CHECK(inst.sources.size() == 4);

  // Membership links come grouped by set with elements ascending, and
  // repeated elements within one set collapse.
  EmbeddingInstance dup = to_embedding({2, {{1, 1, 0}}, 1});
  CHECK(dup.network.links.size() == 2 + 1);
  CHECK(dup.network.links[0].src == 0);
  CHECK(dup.network.links[1].src == 1);

  CHECK_THROWS_AS(to_embedding({2, {{0}}, 1}), std::invalid_argument);
}

TEST_CASE("step threshold follows k") {
  EmbeddingInstance inst = to_embedding({3, {{0}, {1}, {2}}, 3});
  const ResourceFunction& f = inst.tmpl.components[2].cpu_fn;
  double in3[] = {3.0}, in4[] = {4.0};
  CHECK(f.eval(in3) == doctest::Approx(1.0));  // at the threshold: cheap
  CHECK(f.eval(in4) == doctest::Approx(2.0));  // beyond: expensive
}

TEST_CASE("exact minimum cover") {
  CHECK(brute_force_set_cover({3, {{0, 1}, {1, 2}}, 1}) == 2);
  CHECK(brute_force_set_cover({3, {{0, 1, 2}}, 1}) == 1);
  CHECK(brute_force_set_cover({4, {{0}, {1}, {2}, {3}, {0, 1, 2, 3}}, 1}) == 1);
  CHECK(brute_force_set_cover({2, {{0}, {1}}, 1}) == 2);

  SetCoverInstance huge{1, std::vector<std::vector<int>>(21, {0}), 1};
  CHECK_THROWS_AS(brute_force_set_cover(huge), std::invalid_argument);
}

TEST_CASE("greedy never beats the exact minimum") {
  std::mt19937_64 rng(42);
  for (int round = 0; round < 50; ++round) {
    SetCoverInstance sc;
    sc.universe = 1 + static_cast<int>(rng() % 6);
    int n_sets = 1 + static_cast<int>(rng() % 5);
    sc.k = 1;
    sc.sets.assign(static_cast<size_t>(n_sets), {});
    for (int j = 0; j < n_sets; ++j)
      for (int e = 0; e < sc.universe; ++e)
        if (rng() % 2) sc.sets[static_cast<size_t>(j)].push_back(e);
    // Patch up coverage so the instance is valid.
    for (int e = 0; e < sc.universe; ++e)
      sc.sets[static_cast<size_t>(rng() % n_sets)].push_back(e);
    int exact = brute_force_set_cover(sc);
    CHECK(greedy_cover(sc) >= exact);
    CHECK(exact >= 1);
    CHECK(exact <= n_sets);
  }
}

TEST_CASE("embedding feasibility mirrors coverability") {
  auto violations = [](const SetCoverInstance& sc) {
    EmbeddingInstance inst = to_embedding(sc);
    OracleLimits lim;
    lim.max_nodes = static_cast<int>(inst.network.nodes.size());
    lim.max_components = 3;
    lim.max_total_instances =
        static_cast<int>(inst.sources.size() + inst.network.nodes.size());
    return brute_force_embed(inst.network, {inst.request()}, lim)
        .best.n_violations;
  };

  // Coverable with k = 2: zero violations.
  CHECK(violations({3, {{0, 1}, {1, 2}}, 2}) == 0);
  // The same family with k = 1: a cover needs 2 sets, so something breaks.
  CHECK(violations({3, {{0, 1}, {1, 2}}, 1}) >= 1);
  // One set covering everything with k = 1: fine again.
  CHECK(violations({3, {{0, 1, 2}}, 1}) == 0);
}
