#pragma once
// Incremental embedding heuristic: joint scaling, placement, and routing in
// one topological pass per service. Unchanged services are left untouched;
// rate deltas propagate only where demand actually moved.

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "tembed/model.hpp"

namespace tembed {

struct HeuristicParams {
  uint64_t seed{0};
  // false (default): overflow instances are created over the arcs of an
  // output round-robin in declaration order; true: picked uniformly at
  // random with the seeded generator.
  bool random_arc_choice{false};
};

struct PathResult {
  std::vector<NodeId> nodes;  // src .. dst
  std::vector<LinkId> links;  // one per hop, empty when src == dst
  double bottleneck{0};       // min residual bandwidth over the links
  double latency{0};          // sum of link delays
};

// Mutable embedding state over one SystemConfiguration. embed() drives the
// whole pipeline; tests drive the subroutines directly. Every method keeps
// the overlay, the per-node/per-link load accounting, and the instance rate
// vectors consistent.
class Embedder {
 public:
  Embedder(SystemConfiguration cfg, const HeuristicParams& params = {});

  const SystemConfiguration& config() const { return cfg_; }
  SystemConfiguration take() && { return std::move(cfg_); }

  // Best-first residual-bandwidth search. Priority: higher min(bottleneck,
  // cutoff), then lower latency, then lower node id; every node is expanded
  // at most once. Returns a path with positive bottleneck, or nullopt.
  std::optional<PathResult> best_first_path(NodeId src, NodeId dst,
                                            double cutoff) const;

  // Raise the rate of edge `edge_idx` by at most `d`, capped by the
  // destination's residual cpu/mem headroom (affine inversion, binary search
  // for piecewise) and by one residual path. Returns the achieved increase.
  double incr_flow(TemplateId tid, size_t edge_idx, double d);

  // Instantiate the destination component of template arc `arc_idx`, fed from
  // instance `from`. Tries every node not yet hosting that component, keeps
  // the one with the best capped flow (ties: lower path latency, then lower
  // node id). When no fresh placement can carry anything but a reachable
  // existing replica can, the arc is wired to that replica instead (`done`,
  // when given, forgets the replica so it is re-processed). Returns the new
  // edge's index, or nullopt when no node is eligible.
  std::optional<size_t> create_instance_and_flow(TemplateId tid, int arc_idx,
                                                 InstanceId from, double cutoff,
                                                 std::set<InstanceId>* done = nullptr);

  // Shed `delta` rate from the edges leaving output `output` of instance `i`:
  // whole edges are removed smallest-rate-first, then one edge is scaled
  // proportionally. Throws std::logic_error if delta exceeds the total.
  void decrease(TemplateId tid, InstanceId i, int output, double delta);

  // Discharge `delta` extra rate from output `output` of instance `i`:
  // missing successor edges are created first (template consistency), then
  // existing flows are raised, then further instances are created; leftovers
  // are forced onto the least-loaded existing flow (a scored violation).
  void increase(TemplateId tid, InstanceId i, int output, double delta);

  // Full pass: drop removed services, create new ones, sync source instances,
  // then walk each overlay in topological order adjusting flows.
  void run(const std::vector<ServiceRequest>& services);

 private:
  struct Reach {
    bool ok{false};
    double bn{0};       // min(widest bottleneck, cutoff)
    double lat{0};
    LinkId via_link{-1};
    NodeId via_node{-1};
  };

  Service& svc(TemplateId tid) { return cfg_.services.at(tid); }
  const Service& svc(TemplateId tid) const { return cfg_.services.at(tid); }

  std::vector<Reach> search_from(NodeId src, double cutoff) const;
  std::optional<PathResult> min_latency_path(NodeId src, NodeId dst) const;

  // Load bookkeeping.
  void rebuild_bookkeeping();
  void add_instance_load(const Instance& inst, double sign);
  void update_loads(TemplateId tid, Instance& inst);
  void refresh_instance(TemplateId tid, Instance& inst);
  void scale_edge(TemplateId tid, size_t edge_idx, double new_rate);
  void add_edge_rate(TemplateId tid, size_t edge_idx, double amount,
                     const std::vector<LinkId>& links);
  void remove_edge(TemplateId tid, size_t edge_idx);
  void remove_instance(TemplateId tid, InstanceId id);
  InstanceId new_instance(TemplateId tid, ComponentId j, NodeId v);

  // Largest extra rate on input k a destination can absorb within `d` given
  // the residual budget for one resource function.
  double capped_headroom(const ResourceFunction& fn, const std::vector<double>& in,
                         int k, double residual, double d) const;
  double flow_cap(TemplateId tid, const Instance& dst, int input, double d) const;

  void increase_impl(TemplateId tid, InstanceId i, int output, double delta,
                     std::set<InstanceId>* done);
  void overload_fallback(TemplateId tid, InstanceId i, int output, double delta,
                         std::set<InstanceId>* done);
  void process_instance(TemplateId tid, InstanceId id, std::set<InstanceId>& done);
  void run_service(TemplateId tid);

  SystemConfiguration cfg_;
  HeuristicParams params_;
  std::vector<std::vector<LinkId>> out_links_;  // per node
  std::vector<double> link_load_;
  std::vector<double> node_cpu_;
  std::vector<double> node_mem_;
  std::mt19937_64 rng_;
};

// Re-embed: previous configuration plus the requested services yield the new
// configuration. Deterministic for a fixed seed.
SystemConfiguration embed(const SystemConfiguration& prev,
                          const std::vector<ServiceRequest>& services,
                          const HeuristicParams& params = {});

}  // namespace tembed
