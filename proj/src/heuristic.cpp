#include "tembed/heuristic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace tembed {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

Embedder::Embedder(SystemConfiguration cfg, const HeuristicParams& params)
    : cfg_(std::move(cfg)), params_(params), rng_(params.seed) {
  rebuild_bookkeeping();
}

void Embedder::rebuild_bookkeeping() {
  const SubstrateNetwork& net = cfg_.substrate;
  out_links_.assign(net.nodes.size(), {});
  for (const Link& l : net.links) out_links_[l.src].push_back(l.id);
  link_load_.assign(net.links.size(), 0.0);
  node_cpu_.assign(net.nodes.size(), 0.0);
  node_mem_.assign(net.nodes.size(), 0.0);
  for (const auto& [tid, s] : cfg_.services) {
    for (const Instance& inst : s.overlay.instances) add_instance_load(inst, +1.0);
    for (const OverlayEdge& e : s.overlay.edges)
      for (const auto& [l, r] : e.routing.link_rates) link_load_[l] += r;
  }
}

void Embedder::add_instance_load(const Instance& inst, double sign) {
  node_cpu_[inst.node] += sign * inst.cpu_load;
  node_mem_[inst.node] += sign * inst.mem_load;
}

void Embedder::update_loads(TemplateId tid, Instance& inst) {
  const Component& c = svc(tid).tmpl.component(inst.component);
  add_instance_load(inst, -1.0);
  inst.cpu_load = c.cpu_fn.eval(inst.in_rates);
  inst.mem_load = c.mem_fn.eval(inst.in_rates);
  add_instance_load(inst, +1.0);
}

void Embedder::refresh_instance(TemplateId tid, Instance& inst) {
  const Service& s = svc(tid);
  std::fill(inst.in_rates.begin(), inst.in_rates.end(), 0.0);
  for (const OverlayEdge& e : s.overlay.edges)
    if (e.dst == inst.id) inst.in_rates[e.dst_input] += e.rate;
  update_loads(tid, inst);
}

// ---------------------------------------------------------------------------
// Path search
// ---------------------------------------------------------------------------

std::vector<Embedder::Reach> Embedder::search_from(NodeId src, double cutoff) const {
  struct Entry {
    double bn;
    double lat;
    NodeId node;
    LinkId via_link;
    NodeId via_node;
    bool operator<(const Entry& o) const {
      if (bn != o.bn) return bn < o.bn;   // prefer wider
      if (lat != o.lat) return lat > o.lat;  // then shorter
      return node > o.node;               // then lower node id
    }
  };
  std::vector<Reach> reach(cfg_.substrate.nodes.size());
  std::priority_queue<Entry> pq;
  pq.push({cutoff, 0.0, src, -1, -1});
  while (!pq.empty()) {
    Entry e = pq.top();
    pq.pop();
    Reach& r = reach[e.node];
    if (r.ok) continue;
    r.ok = true;
    r.bn = e.bn;
    r.lat = e.lat;
    r.via_link = e.via_link;
    r.via_node = e.via_node;
    for (LinkId l : out_links_[e.node]) {
      const Link& lk = cfg_.substrate.link(l);
      if (reach[lk.dst].ok) continue;
      double residual = lk.max_rate - link_load_[l];
      if (residual <= kTol) continue;
      pq.push({std::min(e.bn, residual), e.lat + lk.delay, lk.dst, l, e.node});
    }
  }
  return reach;
}

std::optional<PathResult> Embedder::best_first_path(NodeId src, NodeId dst,
                                                    double cutoff) const {
  if (src == dst) return PathResult{{src}, {}, kInf, 0.0};
  std::vector<Reach> reach = search_from(src, cutoff);
  if (!reach[dst].ok) return std::nullopt;
  PathResult p;
  for (NodeId v = dst; v != src; v = reach[v].via_node) {
    p.nodes.push_back(v);
    p.links.push_back(reach[v].via_link);
  }
  p.nodes.push_back(src);
  std::reverse(p.nodes.begin(), p.nodes.end());
  std::reverse(p.links.begin(), p.links.end());
  p.bottleneck = kInf;
  for (LinkId l : p.links) {
    const Link& lk = cfg_.substrate.link(l);
    p.bottleneck = std::min(p.bottleneck, lk.max_rate - link_load_[l]);
    p.latency += lk.delay;
  }
  if (p.bottleneck <= kTol) return std::nullopt;
  return p;
}

std::optional<PathResult> Embedder::min_latency_path(NodeId src, NodeId dst) const {
  if (src == dst) return PathResult{{src}, {}, kInf, 0.0};
  const size_t n = cfg_.substrate.nodes.size();
  std::vector<double> dist(n, kInf);
  std::vector<LinkId> via_link(n, -1);
  std::vector<NodeId> via_node(n, -1);
  std::set<std::pair<double, NodeId>> pq;
  dist[src] = 0.0;
  pq.insert({0.0, src});
  while (!pq.empty()) {
    auto [d, v] = *pq.begin();
    pq.erase(pq.begin());
    if (v == dst) break;
    for (LinkId l : out_links_[v]) {
      const Link& lk = cfg_.substrate.link(l);
      if (d + lk.delay < dist[lk.dst]) {
        pq.erase({dist[lk.dst], lk.dst});
        dist[lk.dst] = d + lk.delay;
        via_link[lk.dst] = l;
        via_node[lk.dst] = v;
        pq.insert({dist[lk.dst], lk.dst});
      }
    }
  }
  if (!std::isfinite(dist[dst])) return std::nullopt;
  PathResult p;
  for (NodeId v = dst; v != src; v = via_node[v]) {
    p.nodes.push_back(v);
    p.links.push_back(via_link[v]);
  }
  p.nodes.push_back(src);
  std::reverse(p.nodes.begin(), p.nodes.end());
  std::reverse(p.links.begin(), p.links.end());
  p.bottleneck = kInf;
  for (LinkId l : p.links) {
    const Link& lk = cfg_.substrate.link(l);
    p.bottleneck = std::min(p.bottleneck, lk.max_rate - link_load_[l]);
  }
  p.latency = dist[dst];
  return p;
}

// ---------------------------------------------------------------------------
// Edge and instance mutation
// ---------------------------------------------------------------------------

void Embedder::scale_edge(TemplateId tid, size_t edge_idx, double new_rate) {
  Service& s = svc(tid);
  OverlayEdge& e = s.overlay.edges[edge_idx];
  double factor = new_rate / e.rate;
  for (auto& [l, r] : e.routing.link_rates) {
    double scaled = r * factor;
    link_load_[l] += scaled - r;
    r = scaled;
  }
  Instance& di = *s.overlay.find(e.dst);
  di.in_rates[e.dst_input] += new_rate - e.rate;
  e.rate = new_rate;
  update_loads(tid, di);
}

void Embedder::add_edge_rate(TemplateId tid, size_t edge_idx, double amount,
                             const std::vector<LinkId>& links) {
  Service& s = svc(tid);
  OverlayEdge& e = s.overlay.edges[edge_idx];
  e.rate += amount;
  for (LinkId l : links) {
    e.routing.link_rates[l] += amount;
    link_load_[l] += amount;
  }
  Instance& di = *s.overlay.find(e.dst);
  di.in_rates[e.dst_input] += amount;
  update_loads(tid, di);
}

void Embedder::remove_edge(TemplateId tid, size_t edge_idx) {
  Service& s = svc(tid);
  OverlayEdge& e = s.overlay.edges[edge_idx];
  for (const auto& [l, r] : e.routing.link_rates) link_load_[l] -= r;
  Instance& di = *s.overlay.find(e.dst);
  di.in_rates[e.dst_input] -= e.rate;
  update_loads(tid, di);
  s.overlay.edges.erase(s.overlay.edges.begin() + static_cast<long>(edge_idx));
}

void Embedder::remove_instance(TemplateId tid, InstanceId id) {
  Service& s = svc(tid);
  for (;;) {
    size_t idx = s.overlay.edges.size();
    for (size_t i = 0; i < s.overlay.edges.size(); ++i)
      if (s.overlay.edges[i].src == id || s.overlay.edges[i].dst == id) {
        idx = i;
        break;
      }
    if (idx == s.overlay.edges.size()) break;
    remove_edge(tid, idx);
  }
  auto& insts = s.overlay.instances;
  for (size_t i = 0; i < insts.size(); ++i)
    if (insts[i].id == id) {
      add_instance_load(insts[i], -1.0);
      insts.erase(insts.begin() + static_cast<long>(i));
      return;
    }
}

InstanceId Embedder::new_instance(TemplateId tid, ComponentId j, NodeId v) {
  Service& s = svc(tid);
  const Component& c = s.tmpl.component(j);
  Instance inst;
  inst.id = s.overlay.next_instance_id++;
  inst.component = j;
  inst.node = v;
  inst.in_rates.assign(static_cast<size_t>(c.n_inputs), 0.0);
  inst.out_rates.assign(static_cast<size_t>(c.n_outputs), 0.0);
  inst.cpu_load = c.cpu_fn.eval_zero();
  inst.mem_load = c.mem_fn.eval_zero();
  add_instance_load(inst, +1.0);
  s.overlay.instances.push_back(std::move(inst));
  return s.overlay.instances.back().id;
}

// ---------------------------------------------------------------------------
// Headroom
// ---------------------------------------------------------------------------

double Embedder::capped_headroom(const ResourceFunction& fn,
                                 const std::vector<double>& in, int k,
                                 double residual, double d) const {
  if (d <= 0.0) return 0.0;
  double base = fn.eval(in);
  std::vector<double> probe = in;
  auto extra = [&](double x) {
    probe[k] = in[k] + x;
    double v = fn.eval(probe) - base;
    probe[k] = in[k];
    return v;
  };
  if (extra(d) <= residual + kTol) return d;
  if (fn.is_affine()) {
    double a = static_cast<size_t>(k) < fn.coefficients.size()
                   ? fn.coefficients[k]
                   : 0.0;
    if (a <= 0.0) return 0.0;  // constant in k yet over budget: residual < 0
    return std::clamp(residual / a, 0.0, d);
  }
  // Piecewise: the increment is non-decreasing in x, binary-search the
  // largest feasible step.
  double lo = 0.0, hi = d;
  for (int iter = 0; iter < 200 && hi - lo > kTol; ++iter) {
    double mid = 0.5 * (lo + hi);
    if (extra(mid) <= residual + kTol)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double Embedder::flow_cap(TemplateId tid, const Instance& dst, int input,
                          double d) const {
  const Component& c = svc(tid).tmpl.component(dst.component);
  const Node& n = cfg_.substrate.node(dst.node);
  double res_cpu = n.cap_cpu - node_cpu_[dst.node];
  double res_mem = n.cap_mem - node_mem_[dst.node];
  double b_cpu = capped_headroom(c.cpu_fn, dst.in_rates, input, res_cpu, d);
  double b_mem = capped_headroom(c.mem_fn, dst.in_rates, input, res_mem, d);
  return std::min({d, b_cpu, b_mem});
}

// ---------------------------------------------------------------------------
// incrFlow
// ---------------------------------------------------------------------------

double Embedder::incr_flow(TemplateId tid, size_t edge_idx, double d) {
  Service& s = svc(tid);
  const OverlayEdge& e = s.overlay.edges[edge_idx];
  const Instance& si = *s.overlay.find(e.src);
  const Instance& di = *s.overlay.find(e.dst);
  d = flow_cap(tid, di, e.dst_input, d);
  if (d <= kTol) return 0.0;
  if (si.node == di.node) {
    add_edge_rate(tid, edge_idx, d, {});
    return d;
  }
  std::optional<PathResult> p = best_first_path(si.node, di.node, d);
  if (!p) return 0.0;
  double amount = std::min(p->bottleneck, d);
  if (amount <= kTol) return 0.0;
  add_edge_rate(tid, edge_idx, amount, p->links);
  return amount;
}

// ---------------------------------------------------------------------------
// createInstanceAndFlow
// ---------------------------------------------------------------------------

std::optional<size_t> Embedder::create_instance_and_flow(
    TemplateId tid, int arc_idx, InstanceId from, double cutoff,
    std::set<InstanceId>* done) {
  Service& s = svc(tid);
  const Arc& a = s.tmpl.arcs[static_cast<size_t>(arc_idx)];
  const Component& cj = s.tmpl.component(a.dst);
  const NodeId v = s.overlay.find(from)->node;
  cutoff = std::max(cutoff, 0.0);

  std::vector<NodeId> cands;
  for (const Node& n : cfg_.substrate.nodes)
    if (!s.overlay.find(a.dst, n.id)) cands.push_back(n.id);
  if (cands.empty()) return std::nullopt;

  const std::vector<Reach> main_reach = search_from(v, cutoff);
  const std::vector<double> zeros(static_cast<size_t>(cj.n_inputs), 0.0);

  // Latency of reaching `cand` when the search is capped at `eff`; re-search
  // only for strictly smaller caps (the widest-path tree depends on the cap).
  std::map<double, std::vector<Reach>> cache;
  auto latency_at = [&](NodeId cand, double eff) {
    if (cand == v) return 0.0;
    const std::vector<Reach>* r = &main_reach;
    if (eff < cutoff) {
      auto it = cache.find(eff);
      if (it == cache.end()) it = cache.emplace(eff, search_from(v, eff)).first;
      r = &it->second;
    }
    return (*r)[cand].ok ? (*r)[cand].lat : kInf;
  };

  NodeId best_node = -1;
  double best_flow = -1.0, best_lat = kInf;
  for (NodeId cand : cands) {
    const Node& n = cfg_.substrate.node(cand);
    double res_cpu = n.cap_cpu - node_cpu_[cand] - cj.cpu_fn.eval_zero();
    double res_mem = n.cap_mem - node_mem_[cand] - cj.mem_fn.eval_zero();
    double beta = std::min(capped_headroom(cj.cpu_fn, zeros, a.input, res_cpu, cutoff),
                           capped_headroom(cj.mem_fn, zeros, a.input, res_mem, cutoff));
    double wide;  // what routing alone could deliver, capped at cutoff
    if (cand == v)
      wide = cutoff;
    else if (main_reach[cand].ok)
      wide = main_reach[cand].bn;
    else
      wide = 0.0;
    double flow = std::min(wide, beta);
    if (flow > best_flow) {
      best_flow = flow;
      best_node = cand;
      best_lat = flow > kTol ? latency_at(cand, std::min(cutoff, beta)) : kInf;
    } else if (flow == best_flow && flow > kTol) {
      double lat = latency_at(cand, std::min(cutoff, beta));
      if (lat < best_lat) {
        best_lat = lat;
        best_node = cand;
      }
    }
  }

  if (best_flow <= kTol && cutoff > kTol) {
    // No fresh placement can carry anything (unreachable or zero headroom
    // everywhere). Wiring the arc to a reachable existing replica keeps the
    // demand flowing; a dead new instance would only be garbage-collected
    // later with the demand stranded.
    const Instance* target = nullptr;
    double t_bn = 0.0, t_lat = kInf;
    for (const Instance& cand : s.overlay.instances) {
      if (cand.component != a.dst) continue;
      bool linked = false;
      for (size_t ei : s.overlay.edges_from(from, a.output)) {
        const OverlayEdge& ex = s.overlay.edges[ei];
        if (ex.dst == cand.id && ex.dst_input == a.input) {
          linked = true;
          break;
        }
      }
      if (linked) continue;
      double bn, lat;
      if (cand.node == v) {
        bn = cutoff;
        lat = 0.0;
      } else if (main_reach[cand.node].ok) {
        bn = main_reach[cand.node].bn;
        lat = main_reach[cand.node].lat;
      } else {
        continue;
      }
      if (bn <= kTol) continue;
      if (!target || bn > t_bn || (bn == t_bn && lat < t_lat) ||
          (bn == t_bn && lat == t_lat && cand.node < target->node)) {
        target = &cand;
        t_bn = bn;
        t_lat = lat;
      }
    }
    if (target) {
      InstanceId tgt = target->id;
      OverlayEdge e;
      e.src = from;
      e.src_output = a.output;
      e.dst = tgt;
      e.dst_input = a.input;
      e.rate = 0.0;
      s.overlay.edges.push_back(std::move(e));
      size_t edge_idx = s.overlay.edges.size() - 1;
      incr_flow(tid, edge_idx, cutoff);
      if (s.overlay.edges[edge_idx].rate > kTol) {
        // The target may already have been processed; its input changed.
        if (done) done->erase(tgt);
        return edge_idx;
      }
      remove_edge(tid, edge_idx);  // no headroom there either; fall through
    }
  }

  InstanceId ni = new_instance(tid, a.dst, best_node);
  OverlayEdge e;
  e.src = from;
  e.src_output = a.output;
  e.dst = ni;
  e.dst_input = a.input;
  e.rate = 0.0;
  s.overlay.edges.push_back(std::move(e));
  size_t edge_idx = s.overlay.edges.size() - 1;
  if (cutoff > kTol) incr_flow(tid, edge_idx, cutoff);
  return edge_idx;
}

// ---------------------------------------------------------------------------
// decrease
// ---------------------------------------------------------------------------

void Embedder::decrease(TemplateId tid, InstanceId i, int output, double delta) {
  Service& s = svc(tid);
  double total = 0.0;
  for (size_t ei : s.overlay.edges_from(i, output)) total += s.overlay.edges[ei].rate;
  if (delta > total + kTol * std::max(1.0, total))
    throw std::logic_error("decrease: delta exceeds the rate carried by output");
  while (delta > kTol) {
    std::vector<size_t> idxs = s.overlay.edges_from(i, output);
    if (idxs.empty()) break;
    size_t pick = idxs[0];
    for (size_t ei : idxs)
      if (s.overlay.edges[ei].rate < s.overlay.edges[pick].rate) pick = ei;
    double r = s.overlay.edges[pick].rate;
    if (r <= delta + kTol) {
      remove_edge(tid, pick);
      delta -= r;
    } else {
      scale_edge(tid, pick, r - delta);
      delta = 0.0;
    }
  }
}

// ---------------------------------------------------------------------------
// increase
// ---------------------------------------------------------------------------

void Embedder::increase(TemplateId tid, InstanceId i, int output, double delta) {
  increase_impl(tid, i, output, delta, nullptr);
}

void Embedder::increase_impl(TemplateId tid, InstanceId i, int output,
                             double delta, std::set<InstanceId>* done) {
  Service& s = svc(tid);
  const ComponentId comp = s.overlay.find(i)->component;
  const std::vector<int> arcs = s.tmpl.arcs_from(comp, output);

  // 1. Template consistency: every outgoing arc must be served by at least
  //    one edge, even if there is nothing to send yet.
  for (int ai : arcs) {
    const Arc& a = s.tmpl.arcs[static_cast<size_t>(ai)];
    bool have = false;
    for (size_t ei : s.overlay.edges_from(i, output)) {
      const OverlayEdge& e = s.overlay.edges[ei];
      const Instance* di = s.overlay.find(e.dst);
      if (di && di->component == a.dst && e.dst_input == a.input) {
        have = true;
        break;
      }
    }
    if (!have) {
      std::optional<size_t> created =
          create_instance_and_flow(tid, ai, i, std::max(delta, 0.0), done);
      if (created) delta -= s.overlay.edges[*created].rate;
    }
  }

  // 2. Push the remainder through existing flows.
  if (delta > kTol)
    for (size_t ei : s.overlay.edges_from(i, output)) {
      if (delta <= kTol) break;
      delta -= incr_flow(tid, ei, delta);
    }

  // 3. Scale out: create additional instances, cycling over the arcs.
  size_t rr = 0, fails = 0;
  while (delta > kTol && !arcs.empty() && fails < arcs.size()) {
    int ai;
    if (params_.random_arc_choice)
      ai = arcs[static_cast<size_t>(rng_() % arcs.size())];
    else
      ai = arcs[rr++ % arcs.size()];
    std::optional<size_t> created =
        create_instance_and_flow(tid, ai, i, delta, done);
    if (!created) {
      ++fails;
      continue;
    }
    double got = s.overlay.edges[*created].rate;
    if (got <= kTol) {
      InstanceId nid = s.overlay.edges[*created].dst;
      remove_instance(tid, nid);  // also removes the new edge
      ++fails;
    } else {
      delta -= got;
      fails = 0;
    }
  }

  // 4. Existing flows may have gained slack (other edges moved load around);
  //    keep raising them while it makes progress.
  while (delta > kTol) {
    double progress = 0.0;
    for (size_t ei : s.overlay.edges_from(i, output)) {
      if (delta <= kTol) break;
      double got = incr_flow(tid, ei, delta);
      delta -= got;
      progress += got;
    }
    if (progress <= kTol) break;
  }

  // 5. Nothing fits: force the remainder onto the best existing flow and let
  //    the violation be scored rather than silently dropping demand.
  if (delta > kTol) overload_fallback(tid, i, output, delta, done);
}

void Embedder::overload_fallback(TemplateId tid, InstanceId i, int output,
                                 double delta, std::set<InstanceId>* done) {
  Service& s = svc(tid);
  const Instance& inst = *s.overlay.find(i);
  std::vector<size_t> idxs = s.overlay.edges_from(i, output);

  if (!idxs.empty()) {
    // Pick the edge whose current routing has the most residual bandwidth at
    // its bottleneck (intra-node edges count as unconstrained).
    size_t best = idxs[0];
    double best_res = -kInf;
    NodeId best_dst = -1;
    for (size_t ei : idxs) {
      const OverlayEdge& e = s.overlay.edges[ei];
      double res = kInf;
      for (const auto& [l, r] : e.routing.link_rates)
        res = std::min(res, cfg_.substrate.link(l).max_rate - link_load_[l]);
      NodeId dn = s.overlay.find(e.dst)->node;
      if (res > best_res || (res == best_res && dn < best_dst)) {
        best_res = res;
        best = ei;
        best_dst = dn;
      }
    }
    OverlayEdge& e = s.overlay.edges[best];
    const Instance& di = *s.overlay.find(e.dst);
    if (di.node == inst.node) {
      add_edge_rate(tid, best, delta, {});
    } else if (e.rate > kTol && !e.routing.link_rates.empty()) {
      scale_edge(tid, best, e.rate + delta);
    } else {
      std::optional<PathResult> p = min_latency_path(inst.node, di.node);
      if (!p) return;  // substrate is disconnected; demand stays undelivered
      add_edge_rate(tid, best, delta, p->links);
    }
    return;
  }

  // No edge leaves this output at all (every node already hosts the successor
  // component). Feed an existing instance of a successor over the lowest
  // latency path, ignoring capacity.
  for (int ai : s.tmpl.arcs_from(inst.component, output)) {
    const Arc& a = s.tmpl.arcs[static_cast<size_t>(ai)];
    const Instance* target = nullptr;
    std::optional<PathResult> target_path;
    double target_lat = kInf;
    for (const Instance& cand : s.overlay.instances) {
      if (cand.component != a.dst) continue;
      std::optional<PathResult> p = min_latency_path(inst.node, cand.node);
      if (!p) continue;
      if (!target || p->latency < target_lat ||
          (p->latency == target_lat && cand.node < target->node)) {
        target = &cand;
        target_path = std::move(p);
        target_lat = target_path->latency;
      }
    }
    if (!target) continue;
    OverlayEdge e;
    e.src = i;
    e.src_output = output;
    e.dst = target->id;
    e.dst_input = a.input;
    e.rate = 0.0;
    s.overlay.edges.push_back(std::move(e));
    InstanceId tgt = s.overlay.edges.back().dst;
    add_edge_rate(tid, s.overlay.edges.size() - 1, delta,
                  target_path->nodes.size() > 1 ? target_path->links
                                                : std::vector<LinkId>{});
    // The target may already have been processed this pass; its input just
    // changed, so it must run again.
    if (done) done->erase(tgt);
    return;
  }
}

// ---------------------------------------------------------------------------
// Per-instance visit and full pass
// ---------------------------------------------------------------------------

void Embedder::process_instance(TemplateId tid, InstanceId id,
                                std::set<InstanceId>& done) {
  Service& s = svc(tid);
  Instance* ip = s.overlay.find(id);
  if (!ip) return;
  const Component& c = s.tmpl.component(ip->component);
  refresh_instance(tid, *ip);

  if (!c.is_source) {
    bool idle = true;
    for (double r : ip->in_rates)
      if (r > kTol) {
        idle = false;
        break;
      }
    if (idle) {
      remove_instance(tid, id);
      return;
    }
  }

  std::vector<double> want(static_cast<size_t>(c.n_outputs), 0.0);
  if (c.is_source) {
    for (const Source& src : s.sources)
      if (src.component == ip->component && src.node == ip->node)
        want[0] = src.rate;
  } else {
    for (int k = 0; k < c.n_outputs; ++k)
      want[static_cast<size_t>(k)] = c.out_fns[static_cast<size_t>(k)].eval(ip->in_rates);
  }
  ip->out_rates = want;

  for (int k = 0; k < c.n_outputs; ++k) {
    double carried = 0.0;
    for (size_t ei : s.overlay.edges_from(id, k)) carried += s.overlay.edges[ei].rate;
    double target = want[static_cast<size_t>(k)];
    if (target < carried - kTol)
      decrease(tid, id, k, carried - target);
    else if (target > carried + kTol)
      increase_impl(tid, id, k, target - carried, &done);
    ip = s.overlay.find(id);
    if (!ip) return;
    ip->out_rates = want;  // mutations may have rebuilt the instance list
  }
}

void Embedder::run_service(TemplateId tid) {
  Service& s = svc(tid);

  // Source instances mirror the source list exactly.
  for (const Source& src : s.sources)
    if (!s.overlay.find(src.component, src.node))
      new_instance(tid, src.component, src.node);
  for (;;) {
    InstanceId victim = -1;
    for (const Instance& inst : s.overlay.instances) {
      if (!s.tmpl.component(inst.component).is_source) continue;
      bool bound = false;
      for (const Source& src : s.sources)
        if (src.component == inst.component && src.node == inst.node) {
          bound = true;
          break;
        }
      if (!bound) {
        victim = inst.id;
        break;
      }
    }
    if (victim < 0) break;
    remove_instance(tid, victim);
  }

  // Topological walk. The overlay mutates while we walk: instances appear
  // (scale-out), disappear (starved), and occasionally re-enter the queue
  // (overload spill into an already processed instance).
  std::set<InstanceId> done;
  for (;;) {
    InstanceId pick = -1;
    std::tuple<ComponentId, NodeId, InstanceId> best{};
    for (const Instance& inst : s.overlay.instances) {
      if (done.count(inst.id)) continue;
      bool ready = true;
      for (const OverlayEdge& e : s.overlay.edges)
        if (e.dst == inst.id && !done.count(e.src)) {
          ready = false;
          break;
        }
      if (!ready) continue;
      auto key = std::make_tuple(inst.component, inst.node, inst.id);
      if (pick < 0 || key < best) {
        pick = inst.id;
        best = key;
      }
    }
    if (pick < 0) break;
    process_instance(tid, pick, done);
    if (s.overlay.find(pick)) done.insert(pick);
  }
  for (const Instance& inst : s.overlay.instances)
    if (!done.count(inst.id))
      throw std::runtime_error("embedding stalled: overlay contains a cycle");
}

void Embedder::run(const std::vector<ServiceRequest>& services) {
  std::set<TemplateId> keep;
  for (const ServiceRequest& r : services) keep.insert(r.tmpl.id);

  for (auto it = cfg_.services.begin(); it != cfg_.services.end();) {
    if (keep.count(it->first)) {
      ++it;
      continue;
    }
    for (const Instance& inst : it->second.overlay.instances)
      add_instance_load(inst, -1.0);
    for (const OverlayEdge& e : it->second.overlay.edges)
      for (const auto& [l, r] : e.routing.link_rates) link_load_[l] -= r;
    it = cfg_.services.erase(it);
  }

  for (const ServiceRequest& r : services) {
    Service& s = cfg_.services[r.tmpl.id];
    s.tmpl = r.tmpl;
    s.sources = r.sources;
  }

  for (auto& [tid, s] : cfg_.services) {
    (void)s;
    run_service(tid);
  }
}

SystemConfiguration embed(const SystemConfiguration& prev,
                          const std::vector<ServiceRequest>& services,
                          const HeuristicParams& params) {
  Embedder e(prev, params);
  e.run(services);
  return std::move(e).take();
}

}  // namespace tembed
