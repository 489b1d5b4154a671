#pragma once
// Core data model: substrate networks, service templates, overlays, and
// configuration scoring. All ids are dense non-negative integers; the JSON
// layer (json_io.hpp) maps external string ids onto them.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tembed {

// Absolute tolerance for floating-point comparisons. Constraint boundaries are
// closed: load == capacity (within kTol) is feasible.
inline constexpr double kTol = 1e-9;

using NodeId = int;
using LinkId = int;
using ComponentId = int;
using InstanceId = int;
using TemplateId = int;

// ---------------------------------------------------------------------------
// Substrate

struct Node {
  NodeId id{-1};
  double cap_cpu{0};
  double cap_mem{0};
};

// Directed link. Traffic between instances on the same node never touches
// links (unlimited rate, zero delay), so self-loops are invalid.
struct Link {
  LinkId id{-1};
  NodeId src{-1};
  NodeId dst{-1};
  double max_rate{0};
  double delay{0};
};

struct SubstrateNetwork {
  std::vector<Node> nodes;
  std::vector<Link> links;

  const Node& node(NodeId v) const { return nodes[v]; }
  const Link& link(LinkId l) const { return links[l]; }
  // First link src->dst, or -1. Parallel links are rejected by validation.
  LinkId find_link(NodeId src, NodeId dst) const;
};

// Structural checks: ids dense and in order, endpoints exist, no self-loops,
// capacities/delays >= 0, rates > 0, no parallel links. Returns one message
// per defect, empty when valid.
std::vector<std::string> validate_network(const SubstrateNetwork& net);

// ---------------------------------------------------------------------------
// Resource functions
//
// The default shape is affine: f(in) = constant + sum_k coefficients[k]*in[k].
// A per-input piecewise-linear override (pieces[k] non-empty) replaces that
// input's affine term; pieces must be non-decreasing in x and y, start at
// x = 0, and may encode jumps by repeating an x (the left value wins at the
// breakpoint itself). Piecewise functions are accepted by the heuristic and
// oracle; the MILP builder rejects them.

struct PwPoint {
  double x{0};
  double y{0};
};

struct ResourceFunction {
  double constant{0};
  std::vector<double> coefficients;           // one per input
  std::vector<std::vector<PwPoint>> pieces;   // empty, or one list per input

  static ResourceFunction affine(double c, std::vector<double> coeffs);
  // Zero function of the given arity.
  static ResourceFunction zero(int n_inputs);

  int arity() const { return static_cast<int>(coefficients.size()); }
  bool is_affine() const;
  double eval(std::span<const double> in) const;
  double eval_zero() const;  // value at the all-zero input vector
  // Defects: negative constant/coefficients, pieces arity mismatch,
  // non-monotone or ill-formed breakpoint lists.
  std::vector<std::string> validate(const std::string& where) const;
};

// ---------------------------------------------------------------------------
// Templates

struct Component {
  ComponentId id{-1};
  bool is_source{false};
  int n_inputs{0};
  int n_outputs{0};
  ResourceFunction cpu_fn;
  ResourceFunction mem_fn;
  std::vector<ResourceFunction> out_fns;  // one per output
};

// Directed arc from output `output` of component `src` to input `input` of
// component `dst`.
struct Arc {
  ComponentId src{-1};
  int output{0};
  ComponentId dst{-1};
  int input{0};
};

struct Template {
  TemplateId id{-1};
  std::vector<Component> components;
  std::vector<Arc> arcs;

  const Component& component(ComponentId j) const { return components[j]; }
  // Index of the unique arc matching all four endpoints, or -1.
  int find_arc(ComponentId src, int output, ComponentId dst, int input) const;
  std::vector<int> arcs_from(ComponentId src, int output) const;
  std::vector<int> arcs_into(ComponentId dst, int input) const;
};

// Full structural validation: component ids dense, arities consistent with
// the resource functions, sources have no inputs / one output / zero
// resources, arcs reference valid endpoints, no duplicate arcs, the arc graph
// is acyclic, and every non-source input is fed by at least one arc.
std::vector<std::string> validate_template(const Template& t);

// Component ids in topological order (sources first); empty if cyclic.
std::vector<ComponentId> topo_components(const Template& t);

// ---------------------------------------------------------------------------
// Overlays and configurations

// Demand bound to a service: rate `rate` enters the template at the source
// component `component` placed on substrate node `node`.
struct Source {
  NodeId node{-1};
  ComponentId component{-1};
  double rate{0};
};

struct Instance {
  InstanceId id{-1};
  ComponentId component{-1};
  NodeId node{-1};
  std::vector<double> in_rates;   // one per component input
  std::vector<double> out_rates;  // one per component output
  double cpu_load{0};
  double mem_load{0};
};

// Splittable routing of one overlay edge: rate carried per link. Empty when
// both endpoints share a node.
struct FlowRouting {
  std::map<LinkId, double> link_rates;
};

struct OverlayEdge {
  InstanceId src{-1};
  int src_output{0};
  InstanceId dst{-1};
  int dst_input{0};
  double rate{0};
  FlowRouting routing;
};

struct Overlay {
  std::vector<Instance> instances;
  std::vector<OverlayEdge> edges;
  InstanceId next_instance_id{0};  // never reused within the overlay

  const Instance* find(InstanceId id) const;
  Instance* find(InstanceId id);
  // Instance of `j` on `v`, or nullptr. At most one exists (uniqueness).
  const Instance* find(ComponentId j, NodeId v) const;
  Instance* find(ComponentId j, NodeId v);
  std::vector<size_t> edges_from(InstanceId src, int output) const;
  std::vector<size_t> edges_into(InstanceId dst) const;
};

// One embedded service: its template, its current demand bindings, and the
// overlay realizing them on the substrate.
struct Service {
  Template tmpl;
  std::vector<Source> sources;
  Overlay overlay;
};

struct SystemConfiguration {
  SubstrateNetwork substrate;
  std::map<TemplateId, Service> services;
};

// A service to embed: template plus demand. Shared by every solver front-end.
struct ServiceRequest {
  Template tmpl;
  std::vector<Source> sources;
};

// ---------------------------------------------------------------------------
// Derived state and scoring

// Instance ids of one overlay in topological order of the edge graph, ties
// broken by (component id, node id). Throws std::runtime_error on a cycle.
std::vector<InstanceId> topo_instances(const Overlay& ol);

// Recomputes, in topological order: in_rates from incoming edge rates,
// out_rates through the component output functions (sources take their bound
// Source rate), and cpu/mem loads. Edge rates and routings are inputs, not
// outputs, of this pass. Throws std::runtime_error on a cyclic overlay.
void propagate_rates(SystemConfiguration& cfg);

struct ViolationSummary {
  int n{0};             // violated node-cpu + node-mem + link constraints
  double psi_cpu{0};    // worst cpu over-subscription across nodes
  double psi_mem{0};    // worst mem over-subscription across nodes
  double psi_dr{0};     // worst rate over-subscription across links
};

ViolationSummary count_violations(const SystemConfiguration& cfg);

struct Weights {
  double m1{0};  // per capacity violation
  double m2{0};  // per unit of path delay and per churn event
};

struct ConfigurationScore {
  int n_violations{0};
  double total_delay{0};  // sum of d(l) over used (edge, link) pairs
  int churn{0};           // placement changes vs. the reference, (j, v) level
  double psi_cpu{0};
  double psi_mem{0};
  double psi_dr{0};
  double total_cpu{0};
  double total_mem{0};
  double total_rate{0};   // sum of all per-link routed rates
  double objective{0};
};

// Objective = m1*n_violations + m2*(total_delay + churn)
//           + psi_cpu + psi_mem + psi_dr + total_cpu + total_mem + total_rate.
// Churn compares placements against `reference` for services present in both
// (newly requested and removed services contribute none); pass nullptr for no
// reference.
ConfigurationScore score(const SystemConfiguration& cfg,
                         const SystemConfiguration* reference,
                         const Weights& w);

// Upper bounds on total propagated rate and load, used for weight and big-M
// derivation. Bounds sum across all instances of a component (at most |V|),
// so they are safe for any placement.
struct RateBounds {
  // per template: component -> per-input / per-output totals
  std::map<TemplateId, std::vector<std::vector<double>>> in_bounds;
  std::map<TemplateId, std::vector<std::vector<double>>> out_bounds;
  double total_cpu{0};
  double total_mem{0};
  double total_edge_rate{0};  // sum over arcs of the arc's rate bound
};

RateBounds propagate_rate_bounds(const SubstrateNetwork& net,
                                 const std::vector<ServiceRequest>& services);

// Weights making the objective strictly lexicographic:
//   violations  >  delay + churn  >  psi + loads + rates.
// m2 = 1 + sum of capacities + demand-derived bound on all priority-3 terms;
// m1 = 1 + m2 * (bound on priority-2 terms + 1).
// Throws std::invalid_argument if any bound is non-finite.
Weights default_weights(const SystemConfiguration& cfg);

// Every structural invariant checkable by linear scan: placement uniqueness,
// edge/arc correspondence, per-edge flow conservation of the routing,
// function consistency of rates and loads, source fidelity, acyclicity,
// routing over existing links only. Returns one message per defect.
std::vector<std::string> validate_configuration(const SystemConfiguration& cfg);

// Sum of all Source rates across services (the scenario "demand" metric).
double total_source_rate(const SystemConfiguration& cfg);

}  // namespace tembed
