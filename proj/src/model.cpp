#include "tembed/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <tuple>

namespace tembed {
namespace {

// |a - b| within kTol, scaled up for large magnitudes so chained float ops
// on big rates do not trip the validators.
bool near(double a, double b) {
  return std::fabs(a - b) <= kTol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

std::string fmt_id(const char* what, int id) {
  return std::string(what) + " " + std::to_string(id);
}

double pw_eval(const std::vector<PwPoint>& pts, double t) {
  if (t <= pts.front().x) return pts.front().y;
  for (size_t i = 1; i < pts.size(); ++i) {
    const PwPoint& a = pts[i - 1];
    const PwPoint& b = pts[i];
    if (t <= b.x) {
      if (b.x - a.x <= 0) return a.y;  // jump point: left value wins
      return a.y + (b.y - a.y) * (t - a.x) / (b.x - a.x);
    }
  }
  // Extend past the last breakpoint with the final slope (0 after a jump).
  double slope = 0;
  if (pts.size() >= 2) {
    const PwPoint& a = pts[pts.size() - 2];
    const PwPoint& b = pts.back();
    if (b.x - a.x > 0) slope = (b.y - a.y) / (b.x - a.x);
  }
  return pts.back().y + slope * (t - pts.back().x);
}

}  // namespace

// ---------------------------------------------------------------------------
// SubstrateNetwork

LinkId SubstrateNetwork::find_link(NodeId src, NodeId dst) const {
  for (const Link& l : links)
    if (l.src == src && l.dst == dst) return l.id;
  return -1;
}

std::vector<std::string> validate_network(const SubstrateNetwork& net) {
  std::vector<std::string> out;
  const int nv = static_cast<int>(net.nodes.size());
  for (int i = 0; i < nv; ++i) {
    const Node& n = net.nodes[i];
    if (n.id != i) out.push_back(fmt_id("node", i) + ": id not dense");
    if (n.cap_cpu < 0) out.push_back(fmt_id("node", i) + ": negative cpu capacity");
    if (n.cap_mem < 0) out.push_back(fmt_id("node", i) + ": negative mem capacity");
  }
  std::set<std::pair<NodeId, NodeId>> seen;
  for (size_t i = 0; i < net.links.size(); ++i) {
    const Link& l = net.links[i];
    std::string loc = fmt_id("link", static_cast<int>(i));
    if (l.id != static_cast<int>(i)) out.push_back(loc + ": id not dense");
    if (l.src < 0 || l.src >= nv || l.dst < 0 || l.dst >= nv) {
      out.push_back(loc + ": endpoint out of range");
      continue;
    }
    if (l.src == l.dst) out.push_back(loc + ": self-loop");
    if (l.max_rate < 0) out.push_back(loc + ": negative max_rate");
    if (l.delay < 0) out.push_back(loc + ": negative delay");
    if (!seen.insert({l.src, l.dst}).second)
      out.push_back(loc + ": parallel link");
  }
  return out;
}

// ---------------------------------------------------------------------------
// ResourceFunction

ResourceFunction ResourceFunction::affine(double c, std::vector<double> coeffs) {
  ResourceFunction f;
  f.constant = c;
  f.coefficients = std::move(coeffs);
  return f;
}

ResourceFunction ResourceFunction::zero(int n_inputs) {
  return affine(0, std::vector<double>(static_cast<size_t>(n_inputs), 0.0));
}

bool ResourceFunction::is_affine() const {
  for (const auto& p : pieces)
    if (!p.empty()) return false;
  return true;
}

double ResourceFunction::eval(std::span<const double> in) const {
  double v = constant;
  for (size_t k = 0; k < coefficients.size(); ++k) {
    double x = k < in.size() ? in[k] : 0;
    if (k < pieces.size() && !pieces[k].empty())
      v += pw_eval(pieces[k], x);
    else
      v += coefficients[k] * x;
  }
  return v;
}

double ResourceFunction::eval_zero() const {
  std::vector<double> zeros(coefficients.size(), 0.0);
  return eval(zeros);
}

std::vector<std::string> ResourceFunction::validate(const std::string& where) const {
  std::vector<std::string> out;
  if (!std::isfinite(constant) || constant < 0)
    out.push_back(where + ": constant must be finite and >= 0");
  for (size_t k = 0; k < coefficients.size(); ++k)
    if (!std::isfinite(coefficients[k]) || coefficients[k] < 0)
      out.push_back(where + ": coefficient " + std::to_string(k) +
                    " must be finite and >= 0");
  if (!pieces.empty() && pieces.size() != coefficients.size())
    out.push_back(where + ": pieces arity mismatch");
  for (size_t k = 0; k < pieces.size(); ++k) {
    const auto& pts = pieces[k];
    if (pts.empty()) continue;
    std::string loc = where + ": pieces " + std::to_string(k);
    if (std::fabs(pts.front().x) > kTol)
      out.push_back(loc + ": first breakpoint must be at x = 0");
    for (size_t i = 0; i < pts.size(); ++i) {
      if (!std::isfinite(pts[i].x) || !std::isfinite(pts[i].y) ||
          pts[i].x < 0 || pts[i].y < 0) {
        out.push_back(loc + ": breakpoints must be finite and >= 0");
        break;
      }
      if (i > 0 && (pts[i].x < pts[i - 1].x - kTol || pts[i].y < pts[i - 1].y - kTol)) {
        out.push_back(loc + ": breakpoints must be non-decreasing");
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Template

int Template::find_arc(ComponentId src, int output, ComponentId dst, int input) const {
  for (size_t i = 0; i < arcs.size(); ++i) {
    const Arc& a = arcs[i];
    if (a.src == src && a.output == output && a.dst == dst && a.input == input)
      return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> Template::arcs_from(ComponentId src, int output) const {
  std::vector<int> out;
  for (size_t i = 0; i < arcs.size(); ++i)
    if (arcs[i].src == src && arcs[i].output == output)
      out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> Template::arcs_into(ComponentId dst, int input) const {
  std::vector<int> out;
  for (size_t i = 0; i < arcs.size(); ++i)
    if (arcs[i].dst == dst && arcs[i].input == input)
      out.push_back(static_cast<int>(i));
  return out;
}

std::vector<std::string> validate_template(const Template& t) {
  std::vector<std::string> out;
  const int nc = static_cast<int>(t.components.size());
  if (nc == 0) out.push_back("template has no components");
  for (int j = 0; j < nc; ++j) {
    const Component& c = t.components[j];
    std::string loc = fmt_id("component", j);
    if (c.id != j) out.push_back(loc + ": id not dense");
    if (c.n_inputs < 0 || c.n_outputs < 0) {
      out.push_back(loc + ": negative arity");
      continue;
    }
    if (c.is_source) {
      if (c.n_inputs != 0 || c.n_outputs != 1)
        out.push_back(loc + ": source must have 0 inputs and 1 output");
      if (c.cpu_fn.eval_zero() > kTol || c.mem_fn.eval_zero() > kTol)
        out.push_back(loc + ": source must consume no resources");
    } else if (c.n_inputs < 1) {
      out.push_back(loc + ": non-source component needs at least one input");
    }
    if (c.cpu_fn.arity() != c.n_inputs)
      out.push_back(loc + ": cpu function arity mismatch");
    if (c.mem_fn.arity() != c.n_inputs)
      out.push_back(loc + ": mem function arity mismatch");
    if (static_cast<int>(c.out_fns.size()) != c.n_outputs)
      out.push_back(loc + ": expected one output function per output");
    for (size_t k = 0; k < c.out_fns.size(); ++k)
      if (c.out_fns[k].arity() != c.n_inputs)
        out.push_back(loc + ": output function " + std::to_string(k) +
                      " arity mismatch");
    auto app = [&](const std::vector<std::string>& v) {
      out.insert(out.end(), v.begin(), v.end());
    };
    app(c.cpu_fn.validate(loc + " cpu"));
    app(c.mem_fn.validate(loc + " mem"));
    for (size_t k = 0; k < c.out_fns.size(); ++k)
      app(c.out_fns[k].validate(loc + " out " + std::to_string(k)));
  }
  std::set<std::tuple<int, int, int, int>> uniq;
  for (size_t i = 0; i < t.arcs.size(); ++i) {
    const Arc& a = t.arcs[i];
    std::string loc = fmt_id("arc", static_cast<int>(i));
    if (a.src < 0 || a.src >= nc || a.dst < 0 || a.dst >= nc) {
      out.push_back(loc + ": endpoint out of range");
      continue;
    }
    if (a.output < 0 || a.output >= t.components[a.src].n_outputs)
      out.push_back(loc + ": output index out of range");
    if (a.input < 0 || a.input >= t.components[a.dst].n_inputs)
      out.push_back(loc + ": input index out of range");
    if (!uniq.insert({a.src, a.output, a.dst, a.input}).second)
      out.push_back(loc + ": duplicate arc");
  }
  if (topo_components(t).empty() && nc > 0)
    out.push_back("template arc graph is cyclic");
  for (int j = 0; j < nc; ++j) {
    const Component& c = t.components[j];
    for (int k = 0; k < c.n_inputs; ++k)
      if (t.arcs_into(j, k).empty())
        out.push_back(fmt_id("component", j) + ": input " + std::to_string(k) +
                      " is fed by no arc");
  }
  return out;
}

std::vector<ComponentId> topo_components(const Template& t) {
  const int nc = static_cast<int>(t.components.size());
  std::vector<int> indeg(nc, 0);
  for (const Arc& a : t.arcs)
    if (a.src >= 0 && a.src < nc && a.dst >= 0 && a.dst < nc) ++indeg[a.dst];
  std::set<int> ready;
  for (int j = 0; j < nc; ++j)
    if (indeg[j] == 0) ready.insert(j);
  std::vector<ComponentId> order;
  while (!ready.empty()) {
    int j = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(j);
    for (const Arc& a : t.arcs)
      if (a.src == j && a.dst >= 0 && a.dst < nc && --indeg[a.dst] == 0)
        ready.insert(a.dst);
  }
  if (static_cast<int>(order.size()) != nc) return {};
  return order;
}

// ---------------------------------------------------------------------------
// Overlay

const Instance* Overlay::find(InstanceId id) const {
  for (const Instance& i : instances)
    if (i.id == id) return &i;
  return nullptr;
}

Instance* Overlay::find(InstanceId id) {
  return const_cast<Instance*>(static_cast<const Overlay*>(this)->find(id));
}

const Instance* Overlay::find(ComponentId j, NodeId v) const {
  for (const Instance& i : instances)
    if (i.component == j && i.node == v) return &i;
  return nullptr;
}

Instance* Overlay::find(ComponentId j, NodeId v) {
  return const_cast<Instance*>(static_cast<const Overlay*>(this)->find(j, v));
}

std::vector<size_t> Overlay::edges_from(InstanceId src, int output) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].src == src && edges[i].src_output == output) out.push_back(i);
  return out;
}

std::vector<size_t> Overlay::edges_into(InstanceId dst) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].dst == dst) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Derived state

std::vector<InstanceId> topo_instances(const Overlay& ol) {
  std::map<InstanceId, int> indeg;
  for (const Instance& i : ol.instances) indeg[i.id] = 0;
  for (const OverlayEdge& e : ol.edges) {
    auto it = indeg.find(e.dst);
    if (it != indeg.end() && indeg.count(e.src)) ++it->second;
  }
  // Ready instances ordered by (component, node, id) for determinism.
  std::set<std::tuple<ComponentId, NodeId, InstanceId>> ready;
  auto key = [&](InstanceId id) {
    const Instance* i = ol.find(id);
    return std::make_tuple(i->component, i->node, id);
  };
  for (const auto& [id, d] : indeg)
    if (d == 0) ready.insert(key(id));
  std::vector<InstanceId> order;
  while (!ready.empty()) {
    InstanceId id = std::get<2>(*ready.begin());
    ready.erase(ready.begin());
    order.push_back(id);
    for (const OverlayEdge& e : ol.edges)
      if (e.src == id && indeg.count(e.dst) && --indeg[e.dst] == 0)
        ready.insert(key(e.dst));
  }
  if (order.size() != ol.instances.size())
    throw std::runtime_error("overlay edge graph is cyclic");
  return order;
}

void propagate_rates(SystemConfiguration& cfg) {
  for (auto& [tid, svc] : cfg.services) {
    Overlay& ol = svc.overlay;
    for (InstanceId id : topo_instances(ol)) {
      Instance& inst = *ol.find(id);
      const Component& c = svc.tmpl.component(inst.component);
      inst.in_rates.assign(static_cast<size_t>(c.n_inputs), 0.0);
      for (size_t ei : ol.edges_into(id)) {
        const OverlayEdge& e = ol.edges[ei];
        if (e.dst_input >= 0 && e.dst_input < c.n_inputs)
          inst.in_rates[static_cast<size_t>(e.dst_input)] += e.rate;
      }
      if (c.is_source) {
        inst.out_rates.resize(1, 0.0);
        for (const Source& s : svc.sources)
          if (s.component == inst.component && s.node == inst.node)
            inst.out_rates[0] = s.rate;
      } else {
        inst.out_rates.resize(static_cast<size_t>(c.n_outputs));
        for (int k = 0; k < c.n_outputs; ++k)
          inst.out_rates[static_cast<size_t>(k)] =
              c.out_fns[static_cast<size_t>(k)].eval(inst.in_rates);
      }
      inst.cpu_load = c.cpu_fn.eval(inst.in_rates);
      inst.mem_load = c.mem_fn.eval(inst.in_rates);
    }
  }
}

ViolationSummary count_violations(const SystemConfiguration& cfg) {
  const auto& net = cfg.substrate;
  std::vector<double> cpu(net.nodes.size(), 0.0), mem(net.nodes.size(), 0.0);
  std::vector<double> load(net.links.size(), 0.0);
  for (const auto& [tid, svc] : cfg.services) {
    for (const Instance& i : svc.overlay.instances) {
      if (i.node < 0 || i.node >= static_cast<int>(net.nodes.size())) continue;
      cpu[static_cast<size_t>(i.node)] += i.cpu_load;
      mem[static_cast<size_t>(i.node)] += i.mem_load;
    }
    for (const OverlayEdge& e : svc.overlay.edges)
      for (const auto& [l, r] : e.routing.link_rates)
        if (l >= 0 && l < static_cast<int>(net.links.size()))
          load[static_cast<size_t>(l)] += r;
  }
  ViolationSummary vs;
  for (const Node& n : net.nodes) {
    double ec = cpu[static_cast<size_t>(n.id)] - n.cap_cpu;
    double em = mem[static_cast<size_t>(n.id)] - n.cap_mem;
    if (ec > kTol) ++vs.n;
    if (em > kTol) ++vs.n;
    vs.psi_cpu = std::max(vs.psi_cpu, ec);
    vs.psi_mem = std::max(vs.psi_mem, em);
  }
  for (const Link& l : net.links) {
    double ed = load[static_cast<size_t>(l.id)] - l.max_rate;
    if (ed > kTol) ++vs.n;
    vs.psi_dr = std::max(vs.psi_dr, ed);
  }
  vs.psi_cpu = std::max(vs.psi_cpu, 0.0);
  vs.psi_mem = std::max(vs.psi_mem, 0.0);
  vs.psi_dr = std::max(vs.psi_dr, 0.0);
  return vs;
}

namespace {

// (component, node) placement set of one service, the x_{j,v} support.
std::set<std::pair<ComponentId, NodeId>> placements(const Service& svc) {
  std::set<std::pair<ComponentId, NodeId>> out;
  for (const Instance& i : svc.overlay.instances) out.insert({i.component, i.node});
  return out;
}

}  // namespace

ConfigurationScore score(const SystemConfiguration& cfg,
                         const SystemConfiguration* reference,
                         const Weights& w) {
  ConfigurationScore s;
  ViolationSummary vs = count_violations(cfg);
  s.n_violations = vs.n;
  s.psi_cpu = vs.psi_cpu;
  s.psi_mem = vs.psi_mem;
  s.psi_dr = vs.psi_dr;
  for (const auto& [tid, svc] : cfg.services) {
    for (const Instance& i : svc.overlay.instances) {
      s.total_cpu += i.cpu_load;
      s.total_mem += i.mem_load;
    }
    for (const OverlayEdge& e : svc.overlay.edges) {
      for (const auto& [l, r] : e.routing.link_rates) {
        s.total_rate += r;
        // Delay counts once per used (edge, link) pair, not rate-weighted.
        if (r > kTol && l >= 0 && l < static_cast<int>(cfg.substrate.links.size()))
          s.total_delay += cfg.substrate.link(l).delay;
      }
    }
    if (reference) {
      auto it = reference->services.find(tid);
      if (it != reference->services.end()) {
        auto cur = placements(svc);
        auto prev = placements(it->second);
        for (const auto& p : cur)
          if (!prev.count(p)) ++s.churn;
        for (const auto& p : prev)
          if (!cur.count(p)) ++s.churn;
      }
    }
  }
  s.objective = w.m1 * s.n_violations + w.m2 * (s.total_delay + s.churn) +
                s.psi_cpu + s.psi_mem + s.psi_dr + s.total_cpu + s.total_mem +
                s.total_rate;
  return s;
}

RateBounds propagate_rate_bounds(const SubstrateNetwork& net,
                                 const std::vector<ServiceRequest>& services) {
  RateBounds rb;
  const double nv = static_cast<double>(net.nodes.size());
  for (const ServiceRequest& req : services) {
    const Template& t = req.tmpl;
    auto& ins = rb.in_bounds[t.id];
    auto& outs = rb.out_bounds[t.id];
    ins.assign(t.components.size(), {});
    outs.assign(t.components.size(), {});
    std::vector<ComponentId> order = topo_components(t);
    if (order.empty() && !t.components.empty())
      throw std::invalid_argument("cyclic template");
    for (ComponentId j : order) {
      const Component& c = t.components[static_cast<size_t>(j)];
      auto& in_b = ins[static_cast<size_t>(j)];
      auto& out_b = outs[static_cast<size_t>(j)];
      in_b.assign(static_cast<size_t>(c.n_inputs), 0.0);
      out_b.assign(static_cast<size_t>(c.n_outputs), 0.0);
      for (int k = 0; k < c.n_inputs; ++k)
        for (int ai : t.arcs_into(j, k)) {
          const Arc& a = t.arcs[static_cast<size_t>(ai)];
          in_b[static_cast<size_t>(k)] +=
              outs[static_cast<size_t>(a.src)][static_cast<size_t>(a.output)];
        }
      if (c.is_source) {
        for (const Source& s : req.sources)
          if (s.component == j) out_b[0] += s.rate;
      } else {
        // Total across at most |V| instances: per-instance input never exceeds
        // the total, and the functions are non-decreasing.
        for (int k = 0; k < c.n_outputs; ++k)
          out_b[static_cast<size_t>(k)] =
              nv * c.out_fns[static_cast<size_t>(k)].eval(in_b);
        rb.total_cpu += nv * c.cpu_fn.eval(in_b);
        rb.total_mem += nv * c.mem_fn.eval(in_b);
      }
    }
    for (const Arc& a : t.arcs)
      rb.total_edge_rate +=
          outs[static_cast<size_t>(a.src)][static_cast<size_t>(a.output)];
  }
  bool ok = std::isfinite(rb.total_cpu) && std::isfinite(rb.total_mem) &&
            std::isfinite(rb.total_edge_rate);
  for (const auto& [tid, v] : rb.out_bounds)
    for (const auto& per : v)
      for (double x : per) ok = ok && std::isfinite(x);
  if (!ok) throw std::invalid_argument("rate bounds are unbounded");
  return rb;
}

Weights default_weights(const SystemConfiguration& cfg) {
  std::vector<ServiceRequest> reqs;
  for (const auto& [tid, svc] : cfg.services)
    reqs.push_back({svc.tmpl, svc.sources});
  RateBounds rb = propagate_rate_bounds(cfg.substrate, reqs);

  double sum_caps = 0;
  for (const Node& n : cfg.substrate.nodes) sum_caps += n.cap_cpu + n.cap_mem;
  double sum_delay = 0;
  for (const Link& l : cfg.substrate.links) {
    sum_caps += l.max_rate;
    sum_delay += l.delay;
  }
  // A flow may touch every link, so total routed rate is bounded by the total
  // edge rate times |L|; psi terms are bounded by the matching totals.
  double z_bound = rb.total_edge_rate * static_cast<double>(cfg.substrate.links.size());
  double demand_bound = 2 * (rb.total_cpu + rb.total_mem + z_bound);

  double n_arcs = 0, n_comps = 0;
  for (const auto& [tid, svc] : cfg.services) {
    n_arcs += static_cast<double>(svc.tmpl.arcs.size());
    n_comps += static_cast<double>(svc.tmpl.components.size());
  }
  const double nv = static_cast<double>(cfg.substrate.nodes.size());

  Weights w;
  w.m2 = 1 + sum_caps + demand_bound;
  double p2_bound = sum_delay * n_arcs * nv * nv + n_comps * nv;
  w.m1 = 1 + w.m2 * (p2_bound + 1);
  if (!std::isfinite(w.m1) || !std::isfinite(w.m2))
    throw std::invalid_argument("weights are unbounded");
  return w;
}

std::vector<std::string> validate_configuration(const SystemConfiguration& cfg) {
  std::vector<std::string> out = validate_network(cfg.substrate);
  const int nv = static_cast<int>(cfg.substrate.nodes.size());
  const int nl = static_cast<int>(cfg.substrate.links.size());

  for (const auto& [tid, svc] : cfg.services) {
    std::string sl = "service " + std::to_string(tid) + ": ";
    for (const std::string& m : validate_template(svc.tmpl)) out.push_back(sl + m);
    const Template& t = svc.tmpl;
    const Overlay& ol = svc.overlay;
    const int nc = static_cast<int>(t.components.size());

    std::set<InstanceId> ids;
    std::set<std::pair<ComponentId, NodeId>> placed;
    for (const Instance& i : ol.instances) {
      std::string loc = sl + fmt_id("instance", i.id);
      if (!ids.insert(i.id).second) out.push_back(loc + ": duplicate id");
      if (i.component < 0 || i.component >= nc) {
        out.push_back(loc + ": unknown component");
        continue;
      }
      if (i.node < 0 || i.node >= nv) out.push_back(loc + ": unknown node");
      if (!placed.insert({i.component, i.node}).second)
        out.push_back(loc + ": duplicate instance of component " +
                      std::to_string(i.component) + " on node " +
                      std::to_string(i.node));
      const Component& c = t.components[static_cast<size_t>(i.component)];
      if (static_cast<int>(i.in_rates.size()) != c.n_inputs ||
          static_cast<int>(i.out_rates.size()) != c.n_outputs)
        out.push_back(loc + ": rate vector arity mismatch");
      for (double r : i.in_rates)
        if (r < -kTol) out.push_back(loc + ": negative input rate");
    }

    // Source fidelity, both directions.
    for (const Source& s : svc.sources) {
      if (s.rate <= 0) out.push_back(sl + "source with non-positive rate");
      const Instance* i = ol.find(s.component, s.node);
      if (!i) {
        out.push_back(sl + "source at node " + std::to_string(s.node) +
                      " has no instance");
      } else if (i->out_rates.empty() || !near(i->out_rates[0], s.rate)) {
        out.push_back(sl + "source instance " + std::to_string(i->id) +
                      " rate mismatch");
      }
    }
    for (const Instance& i : ol.instances) {
      if (i.component < 0 || i.component >= nc) continue;
      if (!t.components[static_cast<size_t>(i.component)].is_source) continue;
      bool bound = false;
      for (const Source& s : svc.sources)
        bound = bound || (s.component == i.component && s.node == i.node);
      if (!bound)
        out.push_back(sl + fmt_id("instance", i.id) +
                      ": source instance without a matching source");
    }

    std::set<std::tuple<InstanceId, int, InstanceId, int>> edge_uniq;
    for (size_t ei = 0; ei < ol.edges.size(); ++ei) {
      const OverlayEdge& e = ol.edges[ei];
      std::string loc = sl + fmt_id("edge", static_cast<int>(ei));
      const Instance* si = ol.find(e.src);
      const Instance* di = ol.find(e.dst);
      if (!si || !di) {
        out.push_back(loc + ": dangling endpoint");
        continue;
      }
      if (e.rate < -kTol) out.push_back(loc + ": negative rate");
      if (t.find_arc(si->component, e.src_output, di->component, e.dst_input) < 0)
        out.push_back(loc + ": no matching template arc");
      if (!edge_uniq.insert({e.src, e.src_output, e.dst, e.dst_input}).second)
        out.push_back(loc + ": duplicate edge");
      // Flow conservation: net outflow is +rate at the source
      // node, -rate at the destination node, 0 elsewhere; same-node edges
      // carry no routing.
      std::map<NodeId, double> net_out;
      bool links_ok = true;
      for (const auto& [l, r] : e.routing.link_rates) {
        if (l < 0 || l >= nl) {
          out.push_back(loc + ": routing over unknown link");
          links_ok = false;
          break;
        }
        if (r < -kTol) out.push_back(loc + ": negative routed rate");
        net_out[cfg.substrate.link(l).src] += r;
        net_out[cfg.substrate.link(l).dst] -= r;
      }
      if (!links_ok) continue;
      if (si->node == di->node) {
        if (!e.routing.link_rates.empty())
          out.push_back(loc + ": same-node edge must have empty routing");
        continue;
      }
      for (const auto& [v, f] : net_out) {
        double want = v == si->node ? e.rate : (v == di->node ? -e.rate : 0.0);
        if (!near(f, want)) {
          out.push_back(loc + ": flow conservation broken at node " +
                        std::to_string(v));
          break;
        }
      }
      if (!net_out.count(si->node) && e.rate > kTol)
        out.push_back(loc + ": rate carried over no links");
    }

    // Rate propagation and load consistency.
    try {
      for (InstanceId id : topo_instances(ol)) {
        const Instance& inst = *ol.find(id);
        if (inst.component < 0 || inst.component >= nc) continue;
        const Component& c = t.components[static_cast<size_t>(inst.component)];
        std::string loc = sl + fmt_id("instance", id);
        std::vector<double> in(static_cast<size_t>(c.n_inputs), 0.0);
        for (size_t ei : ol.edges_into(id)) {
          const OverlayEdge& e = ol.edges[ei];
          if (e.dst_input >= 0 && e.dst_input < c.n_inputs)
            in[static_cast<size_t>(e.dst_input)] += e.rate;
        }
        for (int k = 0; k < c.n_inputs; ++k)
          if (k < static_cast<int>(inst.in_rates.size()) &&
              !near(in[static_cast<size_t>(k)], inst.in_rates[static_cast<size_t>(k)]))
            out.push_back(loc + ": input rate " + std::to_string(k) +
                          " does not match incoming edges");
        if (!c.is_source)
          for (int k = 0; k < c.n_outputs && k < static_cast<int>(inst.out_rates.size()); ++k)
            if (!near(inst.out_rates[static_cast<size_t>(k)],
                      c.out_fns[static_cast<size_t>(k)].eval(in)))
              out.push_back(loc + ": output rate " + std::to_string(k) +
                            " does not match its function");
        if (!near(inst.cpu_load, c.cpu_fn.eval(in)))
          out.push_back(loc + ": cpu load does not match its function");
        if (!near(inst.mem_load, c.mem_fn.eval(in)))
          out.push_back(loc + ": mem load does not match its function");
        // Demand discharge: each output fully carried by its edges.
        for (int k = 0; k < c.n_outputs && k < static_cast<int>(inst.out_rates.size()); ++k) {
          double carried = 0;
          for (size_t ei : ol.edges_from(id, k)) carried += ol.edges[ei].rate;
          if (!near(carried, inst.out_rates[static_cast<size_t>(k)]))
            out.push_back(loc + ": output " + std::to_string(k) +
                          " not fully discharged");
        }
      }
    } catch (const std::runtime_error&) {
      out.push_back(sl + "overlay edge graph is cyclic");
    }
  }
  return out;
}

double total_source_rate(const SystemConfiguration& cfg) {
  double total = 0;
  for (const auto& [tid, svc] : cfg.services)
    for (const Source& s : svc.sources) total += s.rate;
  return total;
}

}  // namespace tembed
