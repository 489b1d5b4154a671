#pragma once
// Shared builders for the test suite: tiny substrates and chain templates
// assembled field-by-field so every expected number in the assertions can be
// recomputed by hand.

#include <utility>
#include <vector>

#include "tembed/model.hpp"

namespace tembed::testutil {

// Appends the two reciprocal directed links realizing one undirected edge.
inline void connect(SubstrateNetwork& net, NodeId u, NodeId v, double rate,
                    double delay) {
  LinkId id = static_cast<LinkId>(net.links.size());
  net.links.push_back({id, u, v, rate, delay});
  net.links.push_back({id + 1, v, u, rate, delay});
}

// n nodes of uniform capacity on a path 0 - 1 - ... - n-1.
inline SubstrateNetwork path_network(int n, double cpu, double mem,
                                     double rate, double delay) {
  SubstrateNetwork net;
  for (int v = 0; v < n; ++v) net.nodes.push_back({v, cpu, mem});
  for (int v = 0; v + 1 < n; ++v) connect(net, v, v + 1, rate, delay);
  return net;
}

inline Component source_component(ComponentId id) {
  Component c;
  c.id = id;
  c.is_source = true;
  c.n_inputs = 0;
  c.n_outputs = 1;
  c.cpu_fn = ResourceFunction::zero(0);
  c.mem_fn = ResourceFunction::zero(0);
  c.out_fns = {ResourceFunction::zero(0)};
  return c;
}

// Unary worker: affine cpu = pc + pk*x, mem = mc + mk*x, one output
// oc + ok*x per (oc, ok) pair (none = sink).
inline Component stage_component(ComponentId id, double pc, double pk,
                                 double mc, double mk,
                                 std::vector<std::pair<double, double>> outs) {
  Component c;
  c.id = id;
  c.n_inputs = 1;
  c.n_outputs = static_cast<int>(outs.size());
  c.cpu_fn = ResourceFunction::affine(pc, {pk});
  c.mem_fn = ResourceFunction::affine(mc, {mk});
  for (auto [oc, ok] : outs)
    c.out_fns.push_back(ResourceFunction::affine(oc, {ok}));
  return c;
}

// S -> C1 -> ... -> Ck chain; stages given as (pc, pk, mc, mk, oc, ok), the
// last stage ignoring (oc, ok) and acting as a sink.
struct StageSpec {
  double pc{0}, pk{0}, mc{0}, mk{0}, oc{0}, ok{1};
};

inline Template chain_template(TemplateId id,
                               const std::vector<StageSpec>& stages) {
  Template t;
  t.id = id;
  t.components.push_back(source_component(0));
  for (size_t s = 0; s < stages.size(); ++s) {
    const StageSpec& sp = stages[s];
    bool sink = s + 1 == stages.size();
    std::vector<std::pair<double, double>> outs;
    if (!sink) outs.push_back({sp.oc, sp.ok});
    t.components.push_back(stage_component(static_cast<ComponentId>(s) + 1,
                                           sp.pc, sp.pk, sp.mc, sp.mk, outs));
    t.arcs.push_back({static_cast<ComponentId>(s), 0,
                      static_cast<ComponentId>(s) + 1, 0});
  }
  return t;
}

// The 10-node / 20-directed-link example network used across the suite:
// a triangle 0-1-2 with a chain 2-3-...-9 hanging off it, uniform capacity
// 100/100 and bandwidth 100.
inline SubstrateNetwork reference_network() {
  SubstrateNetwork net;
  for (int v = 0; v < 10; ++v) net.nodes.push_back({v, 100, 100});
  connect(net, 0, 1, 100, 2);
  connect(net, 0, 2, 100, 1);
  connect(net, 1, 2, 100, 2);
  connect(net, 2, 3, 100, 1);
  connect(net, 3, 4, 100, 1);
  connect(net, 4, 5, 100, 1);
  connect(net, 5, 6, 100, 1);
  connect(net, 6, 7, 100, 1);
  connect(net, 7, 8, 100, 1);
  connect(net, 8, 9, 100, 1);
  return net;
}

// Security chain S -> FW -> DPI -> AV -> PC: firewall cpu 1 + 0.5x, the rest
// cpu 10 + x, every stage mem 1, rate passed through unchanged.
inline Template security_chain(TemplateId id = 0) {
  return chain_template(id, {{1, 0.5, 1, 0, 0, 1},
                             {10, 1, 1, 0, 0, 1},
                             {10, 1, 1, 0, 0, 1},
                             {10, 1, 1, 0, 0, 0}});
}

}  // namespace tembed::testutil
