#include "tembed/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace tembed {

namespace {

constexpr size_t kPathCap = 100000;  // simple-path enumeration safety cap

struct Path {
  std::vector<LinkId> links;
  std::vector<NodeId> nodes;
  double latency{0};
};

bool path_less(const Path& a, const Path& b) {
  if (a.latency != b.latency) return a.latency < b.latency;
  return a.nodes < b.nodes;
}

class Search {
 public:
  Search(const SubstrateNetwork& net, std::vector<ServiceRequest> services,
         const OracleLimits& lim, bool exhaustive,
         const std::function<void(const SystemConfiguration&,
                                  const ConfigurationScore&)>* cb)
      : net_(net), lim_(lim), exhaustive_(exhaustive), cb_(cb) {
    if (auto errs = validate_network(net); !errs.empty())
      throw std::invalid_argument(errs.front());
    if (lim_.rate_granularity <= 0.0)
      throw std::invalid_argument("rate_granularity must be positive");
    if (static_cast<int>(net.nodes.size()) > lim_.max_nodes)
      throw std::invalid_argument(
          "instance exceeds limits: " + std::to_string(net.nodes.size()) +
          " nodes > max_nodes " + std::to_string(lim_.max_nodes));
    std::sort(services.begin(), services.end(),
              [](const ServiceRequest& a, const ServiceRequest& b) {
                return a.tmpl.id < b.tmpl.id;
              });
    size_t n_comps = 0, n_sources = 0;
    for (size_t i = 0; i < services.size(); ++i) {
      if (i > 0 && services[i].tmpl.id == services[i - 1].tmpl.id)
        throw std::invalid_argument("duplicate template id " +
                                    std::to_string(services[i].tmpl.id));
      if (auto errs = validate_template(services[i].tmpl); !errs.empty())
        throw std::invalid_argument(errs.front());
      n_comps += services[i].tmpl.components.size();
      n_sources += services[i].sources.size();
    }
    if (static_cast<int>(n_comps) > lim_.max_components)
      throw std::invalid_argument(
          "instance exceeds limits: " + std::to_string(n_comps) +
          " components > max_components " + std::to_string(lim_.max_components));
    if (static_cast<int>(n_sources) > lim_.max_total_instances)
      throw std::invalid_argument(
          "instance exceeds limits: " + std::to_string(n_sources) +
          " sources alone exceed max_total_instances " +
          std::to_string(lim_.max_total_instances));

    cfg_.substrate = net;
    for (ServiceRequest& r : services) {
      order_.push_back(r.tmpl.id);
      topo_.push_back(topo_components(r.tmpl));
      Service svc;
      svc.tmpl = std::move(r.tmpl);
      svc.sources = std::move(r.sources);
      svc.overlay.instances.reserve(
          static_cast<size_t>(lim_.max_total_instances) + svc.sources.size() + 4);
      cfg_.services.emplace(svc.tmpl.id, std::move(svc));
    }
    weights_ = default_weights(cfg_);

    node_cpu_.assign(net.nodes.size(), 0.0);
    node_mem_.assign(net.nodes.size(), 0.0);
    link_load_.assign(net.links.size(), 0.0);
    out_links_.assign(net.nodes.size(), {});
    for (const Link& l : net.links) out_links_[l.src].push_back(l.id);

    for (auto& [tid, svc] : cfg_.services)
      for (const Source& s : svc.sources)
        if (!svc.overlay.find(s.component, s.node))
          create_instance(svc, svc.tmpl.component(s.component), s.node);
  }

  void walk() { do_service(0); }

  OracleResult result() {
    if (!found_)
      throw std::runtime_error(
          "no valid configuration exists within the given limits");
    OracleResult r;
    r.best = best_score_;
    r.config = std::move(best_cfg_);
    r.weights = weights_;
    r.states = states_;
    return r;
  }

  uint64_t states() const { return states_; }

 private:
  struct Task {
    Instance* inst;
    int output;
    double rate;
  };

  struct FlowUndo {
    Service* svc{nullptr};
    Instance* target{nullptr};
    NodeId tnode{-1};
    int input{0};
    size_t edge_idx{0};
    bool created_target{false};
    double old_in{0}, old_cpu_load{0}, old_mem_load{0};
    double old_node_cpu{0}, old_node_mem{0};
    std::vector<std::pair<LinkId, double>> old_link_loads;
    int old_nviol{0}, old_total_instances{0};
    double old_delay{0}, old_z{0}, old_load_sum{0};
  };

  Instance* create_instance(Service& svc, const Component& c, NodeId v) {
    Instance inst;
    inst.id = svc.overlay.next_instance_id++;
    inst.component = c.id;
    inst.node = v;
    inst.in_rates.assign(static_cast<size_t>(c.n_inputs), 0.0);
    inst.out_rates.assign(static_cast<size_t>(c.n_outputs), 0.0);
    inst.cpu_load = c.cpu_fn.eval_zero();
    inst.mem_load = c.mem_fn.eval_zero();
    // Source instances are permanent; their baseline enters the accounting
    // here. Searched instances get their baseline applied in apply_flow.
    double old_cpu = node_cpu_[v], old_mem = node_mem_[v];
    node_cpu_[v] += inst.cpu_load;
    node_mem_[v] += inst.mem_load;
    adjust_node_viol(v, old_cpu, old_mem);
    load_sum_ += inst.cpu_load + inst.mem_load;
    ++total_instances_;
    svc.overlay.instances.push_back(std::move(inst));
    return &svc.overlay.instances.back();
  }

  void adjust_node_viol(NodeId v, double old_cpu, double old_mem) {
    const Node& n = net_.node(v);
    n_viol_ += static_cast<int>(node_cpu_[v] > n.cap_cpu + kTol) -
               static_cast<int>(old_cpu > n.cap_cpu + kTol);
    n_viol_ += static_cast<int>(node_mem_[v] > n.cap_mem + kTol) -
               static_cast<int>(old_mem > n.cap_mem + kTol);
  }

  bool apply_flow(Service& svc, Instance& from, int output, const Arc& arc,
                  NodeId tnode, double amount, const Path* path, FlowUndo& u) {
    if (++states_ > lim_.max_states)
      throw std::runtime_error(
          "enumeration exceeded the state cap (" +
          std::to_string(lim_.max_states) +
          " states); the instance is too large for the exhaustive search");
    u.svc = &svc;
    u.tnode = tnode;
    u.input = arc.input;
    u.old_nviol = n_viol_;
    u.old_delay = delay_sum_;
    u.old_z = z_sum_;
    u.old_load_sum = load_sum_;
    u.old_total_instances = total_instances_;
    u.old_node_cpu = node_cpu_[tnode];
    u.old_node_mem = node_mem_[tnode];
    u.old_link_loads.clear();

    const Component& tc = svc.tmpl.component(arc.dst);
    Instance* t = svc.overlay.find(arc.dst, tnode);
    u.created_target = (t == nullptr);
    if (!t) {
      if (total_instances_ >= lim_.max_total_instances) return false;
      Instance inst;
      inst.id = svc.overlay.next_instance_id++;
      inst.component = arc.dst;
      inst.node = tnode;
      inst.in_rates.assign(static_cast<size_t>(tc.n_inputs), 0.0);
      inst.out_rates.assign(static_cast<size_t>(tc.n_outputs), 0.0);
      inst.cpu_load = tc.cpu_fn.eval_zero();
      inst.mem_load = tc.mem_fn.eval_zero();
      ++total_instances_;
      svc.overlay.instances.push_back(std::move(inst));
      t = &svc.overlay.instances.back();
    }
    u.target = t;
    u.old_in = t->in_rates[static_cast<size_t>(arc.input)];
    u.old_cpu_load = t->cpu_load;
    u.old_mem_load = t->mem_load;

    t->in_rates[static_cast<size_t>(arc.input)] = u.old_in + amount;
    double new_cpu = tc.cpu_fn.eval(t->in_rates);
    double new_mem = tc.mem_fn.eval(t->in_rates);
    // A freshly created instance's baseline was not yet on the node.
    double prev_cpu = u.created_target ? 0.0 : u.old_cpu_load;
    double prev_mem = u.created_target ? 0.0 : u.old_mem_load;
    t->cpu_load = new_cpu;
    t->mem_load = new_mem;
    node_cpu_[tnode] = u.old_node_cpu - prev_cpu + new_cpu;
    node_mem_[tnode] = u.old_node_mem - prev_mem + new_mem;
    adjust_node_viol(tnode, u.old_node_cpu, u.old_node_mem);
    load_sum_ += (new_cpu - prev_cpu) + (new_mem - prev_mem);

    OverlayEdge e;
    e.src = from.id;
    e.src_output = output;
    e.dst = t->id;
    e.dst_input = arc.input;
    e.rate = amount;
    if (path)
      for (LinkId l : path->links) {
        u.old_link_loads.emplace_back(l, link_load_[l]);
        const Link& lk = net_.link(l);
        double old = link_load_[l];
        link_load_[l] = old + amount;
        n_viol_ += static_cast<int>(link_load_[l] > lk.max_rate + kTol) -
                   static_cast<int>(old > lk.max_rate + kTol);
        delay_sum_ += lk.delay;
        z_sum_ += amount;
        e.routing.link_rates[l] = amount;
      }
    u.edge_idx = svc.overlay.edges.size();
    svc.overlay.edges.push_back(std::move(e));
    return true;
  }

  void undo_flow(const FlowUndo& u) {
    Service& svc = *u.svc;
    svc.overlay.edges.pop_back();
    for (auto it = u.old_link_loads.rbegin(); it != u.old_link_loads.rend(); ++it)
      link_load_[it->first] = it->second;
    u.target->in_rates[static_cast<size_t>(u.input)] = u.old_in;
    u.target->cpu_load = u.old_cpu_load;
    u.target->mem_load = u.old_mem_load;
    node_cpu_[u.tnode] = u.old_node_cpu;
    node_mem_[u.tnode] = u.old_node_mem;
    if (u.created_target) {
      svc.overlay.instances.pop_back();
      --svc.overlay.next_instance_id;
    }
    n_viol_ = u.old_nviol;
    delay_sum_ = u.old_delay;
    z_sum_ = u.old_z;
    load_sum_ = u.old_load_sum;
    total_instances_ = u.old_total_instances;
  }

  // Monotone lower bound on the final objective of any completion: violations,
  // delay, loads and routed rate only grow as flow is added; the psi terms are
  // left out (they are nonnegative).
  double bound() const {
    return weights_.m1 * n_viol_ + weights_.m2 * delay_sum_ + load_sum_ +
           z_sum_;
  }

  bool pruned() const {
    return !exhaustive_ && found_ && bound() >= best_obj_ - 1e-9;
  }

  const std::vector<Path>& paths(NodeId u, NodeId v) {
    auto key = std::make_pair(u, v);
    auto it = path_memo_.find(key);
    if (it != path_memo_.end()) return it->second;
    std::vector<Path> all;
    std::vector<char> visited(net_.nodes.size(), 0);
    Path cur;
    cur.nodes.push_back(u);
    visited[static_cast<size_t>(u)] = 1;
    collect_paths(u, v, visited, cur, all);
    std::sort(all.begin(), all.end(), path_less);
    if (all.size() > static_cast<size_t>(lim_.paths_per_pair))
      all.resize(static_cast<size_t>(lim_.paths_per_pair));
    return path_memo_.emplace(key, std::move(all)).first->second;
  }

  void collect_paths(NodeId u, NodeId v, std::vector<char>& visited, Path& cur,
                     std::vector<Path>& all) {
    if (all.size() >= kPathCap) return;
    if (u == v) {
      all.push_back(cur);
      return;
    }
    for (LinkId l : out_links_[u]) {
      const Link& lk = net_.link(l);
      if (visited[static_cast<size_t>(lk.dst)]) continue;
      visited[static_cast<size_t>(lk.dst)] = 1;
      cur.links.push_back(l);
      cur.nodes.push_back(lk.dst);
      cur.latency += lk.delay;
      collect_paths(lk.dst, v, visited, cur, all);
      cur.latency -= lk.delay;
      cur.nodes.pop_back();
      cur.links.pop_back();
      visited[static_cast<size_t>(lk.dst)] = 0;
    }
  }

  void leaf() {
    ConfigurationScore sc = score(cfg_, nullptr, weights_);
    if (cb_) (*cb_)(cfg_, sc);
    if (!found_ || sc.objective < best_obj_) {
      found_ = true;
      best_obj_ = sc.objective;
      best_score_ = sc;
      best_cfg_ = cfg_;
    }
  }

  void do_service(size_t si) {
    if (si == order_.size()) {
      leaf();
      return;
    }
    do_comp(si, 0);
  }

  void do_comp(size_t si, size_t cpos) {
    if (cpos == topo_[si].size()) {
      do_service(si + 1);
      return;
    }
    Service& svc = cfg_.services.at(order_[si]);
    const ComponentId cid = topo_[si][cpos];
    const Component& c = svc.tmpl.component(cid);

    std::vector<Instance*> insts;
    for (Instance& i : svc.overlay.instances)
      if (i.component == cid) insts.push_back(&i);
    std::sort(insts.begin(), insts.end(),
              [](const Instance* a, const Instance* b) {
                return a->node < b->node;
              });

    std::vector<std::vector<double>> old_outs;
    old_outs.reserve(insts.size());
    for (Instance* ip : insts) {
      old_outs.push_back(ip->out_rates);
      std::vector<double> out(static_cast<size_t>(c.n_outputs), 0.0);
      if (c.is_source) {
        for (const Source& s : svc.sources)
          if (s.component == cid && s.node == ip->node) out[0] = s.rate;
      } else {
        for (int k = 0; k < c.n_outputs; ++k)
          out[static_cast<size_t>(k)] =
              c.out_fns[static_cast<size_t>(k)].eval(ip->in_rates);
      }
      ip->out_rates = std::move(out);
    }

    bool dead = false;
    std::vector<Task> tasks;
    for (Instance* ip : insts) {
      for (int k = 0; k < c.n_outputs && !dead; ++k) {
        double r = ip->out_rates[static_cast<size_t>(k)];
        if (r <= kTol) continue;
        if (svc.tmpl.arcs_from(cid, k).empty())
          dead = true;  // positive output with nowhere to go: invalid branch
        else
          tasks.push_back({ip, k, r});
      }
      if (dead) break;
    }
    if (!dead) do_task(si, cpos, svc, c, tasks, 0);

    for (size_t i = 0; i < insts.size(); ++i)
      insts[i]->out_rates = std::move(old_outs[i]);
  }

  void do_task(size_t si, size_t cpos, Service& svc, const Component& c,
               const std::vector<Task>& tasks, size_t ti) {
    if (ti == tasks.size()) {
      do_comp(si, cpos + 1);
      return;
    }
    std::vector<std::pair<int, NodeId>> targets;
    for (int ai : svc.tmpl.arcs_from(c.id, tasks[ti].output))
      for (NodeId v = 0; v < static_cast<NodeId>(net_.nodes.size()); ++v)
        targets.push_back({ai, v});
    split(si, cpos, svc, c, tasks, ti, targets, 0, tasks[ti].rate);
  }

  void split(size_t si, size_t cpos, Service& svc, const Component& c,
             const std::vector<Task>& tasks, size_t ti,
             const std::vector<std::pair<int, NodeId>>& targets, size_t x,
             double remaining) {
    if (remaining <= kTol) {
      do_task(si, cpos, svc, c, tasks, ti + 1);
      return;
    }
    if (x == targets.size()) return;  // rate left undischarged: invalid branch

    const auto& [ai, tnode] = targets[x];
    const Arc& arc = svc.tmpl.arcs[static_cast<size_t>(ai)];
    Instance* from = tasks[ti].inst;

    // Amounts tried largest-first (the whole remainder, then grid steps);
    // the all-zero branch comes last.
    const double g = lim_.rate_granularity;
    std::vector<double> amounts{remaining};
    for (long uq = static_cast<long>(std::floor(remaining / g + kTol)); uq >= 1;
         --uq) {
      double a = static_cast<double>(uq) * g;
      if (a > remaining - kTol) continue;  // equals the remainder, already in
      amounts.push_back(a);
    }
    for (double a : amounts) {
      if (tnode == from->node) {
        FlowUndo u;
        if (apply_flow(svc, *from, tasks[ti].output, arc, tnode, a, nullptr, u)) {
          if (!pruned())
            split(si, cpos, svc, c, tasks, ti, targets, x + 1, remaining - a);
          undo_flow(u);
        }
      } else {
        for (const Path& p : paths(from->node, tnode)) {
          FlowUndo u;
          if (apply_flow(svc, *from, tasks[ti].output, arc, tnode, a, &p, u)) {
            if (!pruned())
              split(si, cpos, svc, c, tasks, ti, targets, x + 1, remaining - a);
            undo_flow(u);
          }
        }
      }
    }
    split(si, cpos, svc, c, tasks, ti, targets, x + 1, remaining);
  }

  const SubstrateNetwork& net_;
  OracleLimits lim_;
  bool exhaustive_;
  const std::function<void(const SystemConfiguration&,
                           const ConfigurationScore&)>* cb_;

  SystemConfiguration cfg_;
  std::vector<TemplateId> order_;
  std::vector<std::vector<ComponentId>> topo_;
  Weights weights_;

  std::vector<double> node_cpu_, node_mem_, link_load_;
  std::vector<std::vector<LinkId>> out_links_;
  std::map<std::pair<NodeId, NodeId>, std::vector<Path>> path_memo_;

  int n_viol_{0};
  int total_instances_{0};
  double delay_sum_{0}, z_sum_{0}, load_sum_{0};
  uint64_t states_{0};

  bool found_{false};
  double best_obj_{std::numeric_limits<double>::infinity()};
  ConfigurationScore best_score_;
  SystemConfiguration best_cfg_;
};

}  // namespace

OracleResult brute_force_embed(const SubstrateNetwork& net,
                               const std::vector<ServiceRequest>& services,
                               const OracleLimits& limits) {
  Search s(net, services, limits, /*exhaustive=*/false, nullptr);
  s.walk();
  return s.result();
}

void enumerate_configurations(
    const SubstrateNetwork& net, const std::vector<ServiceRequest>& services,
    const OracleLimits& limits, bool exhaustive,
    const std::function<void(const SystemConfiguration&,
                             const ConfigurationScore&)>& fn) {
  Search s(net, services, limits, exhaustive, &fn);
  s.walk();
}

}  // namespace tembed
