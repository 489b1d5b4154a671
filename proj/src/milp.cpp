#include "tembed/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

namespace tembed {

namespace {

std::string num(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string nm(const char* prefix, std::initializer_list<int> idx) {
  std::string s = prefix;
  for (int i : idx) {
    s += '_';
    s += std::to_string(i);
  }
  return s;
}

// Global component/arc ordinals: services are sorted by template id, then
// components and arcs are numbered consecutively across services.
struct GlobalIndex {
  struct Base {
    int comp{0};
    int arc{0};
  };
  std::vector<Base> base;  // parallel to MilpModel::services

  int comp(size_t s, ComponentId j) const { return base[s].comp + j; }
  int arc(size_t s, int a) const { return base[s].arc + a; }
};

GlobalIndex make_global_index(const std::vector<ServiceRequest>& services) {
  GlobalIndex g;
  int cb = 0, ab = 0;
  for (const ServiceRequest& r : services) {
    g.base.push_back({cb, ab});
    cb += static_cast<int>(r.tmpl.components.size());
    ab += static_cast<int>(r.tmpl.arcs.size());
  }
  return g;
}

void require_affine(const Template& t) {
  for (const Component& c : t.components) {
    auto check = [&](const ResourceFunction& fn, const char* what) {
      if (!fn.is_affine())
        throw std::invalid_argument(
            "template " + std::to_string(t.id) + ": component " +
            std::to_string(c.id) + ": " + what +
            " is piecewise-linear; the exact model requires affine functions");
    };
    check(c.cpu_fn, "cpu function");
    check(c.mem_fn, "memory function");
    for (size_t k = 0; k < c.out_fns.size(); ++k)
      check(c.out_fns[k], ("output function " + std::to_string(k)).c_str());
  }
}

class ModelBuilder {
 public:
  ModelBuilder(const SubstrateNetwork& net, std::vector<ServiceRequest> services,
               const SystemConfiguration* prev, const Weights& weights) {
    if (auto errs = validate_network(net); !errs.empty())
      throw std::invalid_argument(errs.front());
    std::sort(services.begin(), services.end(),
              [](const ServiceRequest& a, const ServiceRequest& b) {
                return a.tmpl.id < b.tmpl.id;
              });
    for (size_t i = 0; i + 1 < services.size(); ++i)
      if (services[i].tmpl.id == services[i + 1].tmpl.id)
        throw std::invalid_argument("duplicate template id " +
                                    std::to_string(services[i].tmpl.id));
    for (const ServiceRequest& r : services) {
      if (auto errs = validate_template(r.tmpl); !errs.empty())
        throw std::invalid_argument(errs.front());
      require_affine(r.tmpl);
      for (const Source& s : r.sources)
        if (s.node < 0 || s.node >= static_cast<NodeId>(net.nodes.size()))
          throw std::invalid_argument("template " + std::to_string(r.tmpl.id) +
                                      ": source on unknown node " +
                                      std::to_string(s.node));
    }
    m_.substrate = net;
    m_.services = std::move(services);
    if (prev) m_.previous = *prev;
    m_.weights = weights;
    m_.big_m = compute_big_m(net, m_.services);
    g_ = make_global_index(m_.services);
    in_links_.assign(net.nodes.size(), {});
    out_links_.assign(net.nodes.size(), {});
    for (const Link& l : net.links) {
      out_links_[l.src].push_back(l.id);
      in_links_[l.dst].push_back(l.id);
    }
  }

  MilpModel build() {
    make_variables();
    make_constraints();
    make_objective();
    return std::move(m_);
  }

 private:
  int add_var(std::string name, VarKind kind) {
    int id = static_cast<int>(m_.variables.size());
    m_.index.emplace(name, id);
    m_.variables.push_back({std::move(name), kind, std::nullopt});
    return id;
  }

  int vid(const std::string& name) const { return m_.index.at(name); }

  void add_con(std::string name, std::vector<LinearTerm> terms, Relation rel,
               double rhs) {
    if (terms.empty()) return;  // trivially satisfied rows are not emitted
    m_.constraints.push_back({std::move(name), std::move(terms), rel, rhs});
  }

  bool has_prev(size_t s) const {
    return m_.previous && m_.previous->services.count(m_.services[s].tmpl.id) > 0;
  }

  bool prev_placed(size_t s, ComponentId j, NodeId v) const {
    const Service& svc = m_.previous->services.at(m_.services[s].tmpl.id);
    return svc.overlay.find(j, v) != nullptr;
  }

  void make_variables() {
    const int nV = static_cast<int>(m_.substrate.nodes.size());
    const int nL = static_cast<int>(m_.substrate.links.size());
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (const Component& c : m_.services[s].tmpl.components)
        for (int v = 0; v < nV; ++v)
          add_var(nm("x", {g_.comp(s, c.id), v}), VarKind::kBinary);
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (size_t a = 0; a < m_.services[s].tmpl.arcs.size(); ++a)
        for (int v = 0; v < nV; ++v)
          for (int vp = 0; vp < nV; ++vp)
            add_var(nm("y", {g_.arc(s, static_cast<int>(a)), v, vp}),
                    VarKind::kContinuous);
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (size_t a = 0; a < m_.services[s].tmpl.arcs.size(); ++a)
        for (int v = 0; v < nV; ++v)
          for (int vp = 0; vp < nV; ++vp)
            for (int l = 0; l < nL; ++l)
              add_var(nm("z", {g_.arc(s, static_cast<int>(a)), v, vp, l}),
                      VarKind::kContinuous);
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (const Component& c : m_.services[s].tmpl.components)
        for (int v = 0; v < nV; ++v)
          for (int k = 0; k < c.n_inputs; ++k)
            add_var(nm("Lam", {g_.comp(s, c.id), v, k}), VarKind::kContinuous);
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (const Component& c : m_.services[s].tmpl.components)
        for (int v = 0; v < nV; ++v)
          for (int k = 0; k < c.n_outputs; ++k)
            add_var(nm("LamP", {g_.comp(s, c.id), v, k}), VarKind::kContinuous);
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (const Component& c : m_.services[s].tmpl.components)
        for (int v = 0; v < nV; ++v)
          add_var(nm("rho", {g_.comp(s, c.id), v}), VarKind::kContinuous);
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (const Component& c : m_.services[s].tmpl.components)
        for (int v = 0; v < nV; ++v)
          add_var(nm("mu", {g_.comp(s, c.id), v}), VarKind::kContinuous);
    for (int v = 0; v < nV; ++v)
      add_var("om_cpu_" + std::to_string(v), VarKind::kBinary);
    for (int v = 0; v < nV; ++v)
      add_var("om_mem_" + std::to_string(v), VarKind::kBinary);
    for (int l = 0; l < nL; ++l) add_var(nm("om", {l}), VarKind::kBinary);
    add_var("psi_cpu", VarKind::kContinuous);
    add_var("psi_mem", VarKind::kContinuous);
    add_var("psi_dr", VarKind::kContinuous);
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (size_t a = 0; a < m_.services[s].tmpl.arcs.size(); ++a)
        for (int v = 0; v < nV; ++v)
          for (int vp = 0; vp < nV; ++vp)
            for (int l = 0; l < nL; ++l)
              add_var(nm("zeta", {g_.arc(s, static_cast<int>(a)), v, vp, l}),
                      VarKind::kBinary);
    for (size_t s = 0; s < m_.services.size(); ++s) {
      if (!has_prev(s)) continue;
      for (const Component& c : m_.services[s].tmpl.components)
        for (int v = 0; v < nV; ++v)
          add_var(nm("del", {g_.comp(s, c.id), v}), VarKind::kBinary);
    }
  }

  void make_constraints() {
    const int nV = static_cast<int>(m_.substrate.nodes.size());
    const int nL = static_cast<int>(m_.substrate.links.size());
    const double M = m_.big_m.rate_M;

    // (1), (2): sources are pinned and emit their specified rate.
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (const Source& src : m_.services[s].sources) {
        int gj = g_.comp(s, src.component);
        add_con(nm("c1", {gj, src.node}),
                {{1.0, vid(nm("x", {gj, src.node}))}}, Relation::kEq, 1.0);
        add_con(nm("c2", {gj, src.node}),
                {{1.0, vid(nm("LamP", {gj, src.node, 0}))}}, Relation::kEq,
                src.rate);
      }

    // (3), (4): rates only on mapped instances.
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (const Component& c : m_.services[s].tmpl.components) {
        int gj = g_.comp(s, c.id);
        for (int v = 0; v < nV; ++v) {
          for (int k = 0; k < c.n_inputs; ++k)
            add_con(nm("c3", {gj, v, k}),
                    {{1.0, vid(nm("Lam", {gj, v, k}))},
                     {-M, vid(nm("x", {gj, v}))}},
                    Relation::kLe, 0.0);
          for (int k = 0; k < c.n_outputs; ++k)
            add_con(nm("c4", {gj, v, k}),
                    {{1.0, vid(nm("LamP", {gj, v, k}))},
                     {-M, vid(nm("x", {gj, v}))}},
                    Relation::kLe, 0.0);
        }
      }

    // (5), (6): churn indicators against the previous placement.
    for (size_t s = 0; s < m_.services.size(); ++s) {
      if (!has_prev(s)) continue;
      for (const Component& c : m_.services[s].tmpl.components) {
        int gj = g_.comp(s, c.id);
        for (int v = 0; v < nV; ++v) {
          double xstar = prev_placed(s, c.id, v) ? 1.0 : 0.0;
          add_con(nm("c5", {gj, v}),
                  {{1.0, vid(nm("x", {gj, v}))}, {-1.0, vid(nm("del", {gj, v}))}},
                  Relation::kLe, xstar);
          add_con(nm("c6", {gj, v}),
                  {{-1.0, vid(nm("x", {gj, v}))}, {-1.0, vid(nm("del", {gj, v}))}},
                  Relation::kLe, -xstar);
        }
      }
    }

    // (7): output rates follow r_j, with the affine-constant correction that
    // forces zero output on unmapped nodes.
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (const Component& c : m_.services[s].tmpl.components) {
        if (c.is_source) continue;
        int gj = g_.comp(s, c.id);
        for (int v = 0; v < nV; ++v)
          for (int k = 0; k < c.n_outputs; ++k) {
            const ResourceFunction& fn = c.out_fns[static_cast<size_t>(k)];
            std::vector<LinearTerm> t{{1.0, vid(nm("LamP", {gj, v, k}))}};
            for (int i = 0; i < c.n_inputs; ++i) {
              double a = static_cast<size_t>(i) < fn.coefficients.size()
                             ? fn.coefficients[static_cast<size_t>(i)]
                             : 0.0;
              if (a != 0.0) t.push_back({-a, vid(nm("Lam", {gj, v, i}))});
            }
            if (fn.constant != 0.0)
              t.push_back({-fn.constant, vid(nm("x", {gj, v}))});
            add_con(nm("c7", {gj, v, k}), std::move(t), Relation::kEq, 0.0);
          }
      }

    // (8), (9): instance rates aggregate the incident flows.
    for (size_t s = 0; s < m_.services.size(); ++s) {
      const Template& tp = m_.services[s].tmpl;
      for (const Component& c : tp.components) {
        int gj = g_.comp(s, c.id);
        for (int v = 0; v < nV; ++v) {
          for (int k = 0; k < c.n_inputs; ++k) {
            std::vector<LinearTerm> t{{1.0, vid(nm("Lam", {gj, v, k}))}};
            for (size_t a = 0; a < tp.arcs.size(); ++a)
              if (tp.arcs[a].dst == c.id && tp.arcs[a].input == k)
                for (int vp = 0; vp < nV; ++vp)
                  t.push_back(
                      {-1.0,
                       vid(nm("y", {g_.arc(s, static_cast<int>(a)), vp, v}))});
            add_con(nm("c8", {gj, v, k}), std::move(t), Relation::kEq, 0.0);
          }
          for (int k = 0; k < c.n_outputs; ++k) {
            std::vector<LinearTerm> t{{1.0, vid(nm("LamP", {gj, v, k}))}};
            for (size_t a = 0; a < tp.arcs.size(); ++a)
              if (tp.arcs[a].src == c.id && tp.arcs[a].output == k)
                for (int vp = 0; vp < nV; ++vp)
                  t.push_back(
                      {-1.0,
                       vid(nm("y", {g_.arc(s, static_cast<int>(a)), v, vp}))});
            add_con(nm("c9", {gj, v, k}), std::move(t), Relation::kEq, 0.0);
          }
        }
      }
    }

    // (10): flow conservation per (arc, endpoints, transit node). The case
    // v == v2 != v1 is implied by the others and is not generated.
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (size_t a = 0; a < m_.services[s].tmpl.arcs.size(); ++a) {
        int ga = g_.arc(s, static_cast<int>(a));
        for (int v = 0; v < nV; ++v)
          for (int v1 = 0; v1 < nV; ++v1)
            for (int v2 = 0; v2 < nV; ++v2) {
              if (v == v2 && v != v1) continue;
              std::vector<LinearTerm> t;
              for (LinkId l : out_links_[v])
                t.push_back({1.0, vid(nm("z", {ga, v1, v2, l}))});
              for (LinkId l : in_links_[v])
                t.push_back({-1.0, vid(nm("z", {ga, v1, v2, l}))});
              if (v == v1 && v1 != v2)
                t.push_back({-1.0, vid(nm("y", {ga, v1, v2}))});
              add_con(nm("c10", {ga, v, v1, v2}), std::move(t), Relation::kEq,
                      0.0);
            }
      }

    // (11): path-use indicators.
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (size_t a = 0; a < m_.services[s].tmpl.arcs.size(); ++a) {
        int ga = g_.arc(s, static_cast<int>(a));
        for (int v = 0; v < nV; ++v)
          for (int vp = 0; vp < nV; ++vp)
            for (int l = 0; l < nL; ++l)
              add_con(nm("c11", {ga, v, vp, l}),
                      {{1.0, vid(nm("z", {ga, v, vp, l}))},
                       {-M, vid(nm("zeta", {ga, v, vp, l}))}},
                      Relation::kLe, 0.0);
      }

    // (12), (13): resource consumption with the same correction as (7).
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (const Component& c : m_.services[s].tmpl.components) {
        int gj = g_.comp(s, c.id);
        for (int v = 0; v < nV; ++v) {
          auto load_con = [&](const char* name, const char* var,
                              const ResourceFunction& fn) {
            std::vector<LinearTerm> t{{1.0, vid(nm(var, {gj, v}))}};
            for (int i = 0; i < c.n_inputs; ++i) {
              double a = static_cast<size_t>(i) < fn.coefficients.size()
                             ? fn.coefficients[static_cast<size_t>(i)]
                             : 0.0;
              if (a != 0.0) t.push_back({-a, vid(nm("Lam", {gj, v, i}))});
            }
            if (fn.constant != 0.0)
              t.push_back({-fn.constant, vid(nm("x", {gj, v}))});
            add_con(nm(name, {gj, v}), std::move(t), Relation::kEq, 0.0);
          };
          load_con("c12", "rho", c.cpu_fn);
          load_con("c13", "mu", c.mem_fn);
        }
      }

    // (14)-(19): overload indicators and maxima.
    for (int v = 0; v < nV; ++v) {
      std::vector<LinearTerm> rho, mu;
      for (size_t s = 0; s < m_.services.size(); ++s)
        for (const Component& c : m_.services[s].tmpl.components) {
          rho.push_back({1.0, vid(nm("rho", {g_.comp(s, c.id), v}))});
          mu.push_back({1.0, vid(nm("mu", {g_.comp(s, c.id), v}))});
        }
      const Node& n = m_.substrate.node(v);
      std::vector<LinearTerm> t = rho;
      t.push_back({-m_.big_m.cpu_M, vid("om_cpu_" + std::to_string(v))});
      add_con(nm("c14", {v}), std::move(t), Relation::kLe, n.cap_cpu);
      t = rho;
      t.push_back({-1.0, vid("psi_cpu")});
      add_con(nm("c15", {v}), std::move(t), Relation::kLe, n.cap_cpu);
      t = mu;
      t.push_back({-m_.big_m.mem_M, vid("om_mem_" + std::to_string(v))});
      add_con(nm("c16", {v}), std::move(t), Relation::kLe, n.cap_mem);
      t = mu;
      t.push_back({-1.0, vid("psi_mem")});
      add_con(nm("c17", {v}), std::move(t), Relation::kLe, n.cap_mem);
    }
    for (int l = 0; l < nL; ++l) {
      std::vector<LinearTerm> zs;
      for (size_t s = 0; s < m_.services.size(); ++s)
        for (size_t a = 0; a < m_.services[s].tmpl.arcs.size(); ++a) {
          int ga = g_.arc(s, static_cast<int>(a));
          for (int v = 0; v < nV; ++v)
            for (int vp = 0; vp < nV; ++vp)
              zs.push_back({1.0, vid(nm("z", {ga, v, vp, l}))});
        }
      const Link& lk = m_.substrate.link(l);
      std::vector<LinearTerm> t = zs;
      t.push_back({-m_.big_m.dr_M, vid(nm("om", {l}))});
      add_con(nm("c18", {l}), std::move(t), Relation::kLe, lk.max_rate);
      t = zs;
      t.push_back({-1.0, vid("psi_dr")});
      add_con(nm("c19", {l}), std::move(t), Relation::kLe, lk.max_rate);
    }
  }

  void make_objective() {
    const int nV = static_cast<int>(m_.substrate.nodes.size());
    const int nL = static_cast<int>(m_.substrate.links.size());
    auto put = [&](double coef, int var) {
      if (coef != 0.0) m_.objective.push_back({coef, var});
    };
    for (int v = 0; v < nV; ++v) {
      put(m_.weights.m1, vid("om_cpu_" + std::to_string(v)));
      put(m_.weights.m1, vid("om_mem_" + std::to_string(v)));
    }
    for (int l = 0; l < nL; ++l) put(m_.weights.m1, vid(nm("om", {l})));
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (size_t a = 0; a < m_.services[s].tmpl.arcs.size(); ++a) {
        int ga = g_.arc(s, static_cast<int>(a));
        for (int v = 0; v < nV; ++v)
          for (int vp = 0; vp < nV; ++vp)
            for (int l = 0; l < nL; ++l)
              put(m_.weights.m2 * m_.substrate.link(l).delay,
                  vid(nm("zeta", {ga, v, vp, l})));
      }
    for (size_t s = 0; s < m_.services.size(); ++s) {
      if (!has_prev(s)) continue;
      for (const Component& c : m_.services[s].tmpl.components)
        for (int v = 0; v < nV; ++v)
          put(m_.weights.m2, vid(nm("del", {g_.comp(s, c.id), v})));
    }
    put(1.0, vid("psi_cpu"));
    put(1.0, vid("psi_mem"));
    put(1.0, vid("psi_dr"));
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (const Component& c : m_.services[s].tmpl.components) {
        int gj = g_.comp(s, c.id);
        for (int v = 0; v < nV; ++v) {
          put(1.0, vid(nm("rho", {gj, v})));
          put(1.0, vid(nm("mu", {gj, v})));
        }
      }
    for (size_t s = 0; s < m_.services.size(); ++s)
      for (size_t a = 0; a < m_.services[s].tmpl.arcs.size(); ++a) {
        int ga = g_.arc(s, static_cast<int>(a));
        for (int v = 0; v < nV; ++v)
          for (int vp = 0; vp < nV; ++vp)
            for (int l = 0; l < nL; ++l)
              put(1.0, vid(nm("z", {ga, v, vp, l})));
      }
  }

  MilpModel m_;
  GlobalIndex g_;
  std::vector<std::vector<LinkId>> in_links_;
  std::vector<std::vector<LinkId>> out_links_;
};

// Appends the terms of one row, wrapping lines at a fixed width.
void append_terms(std::string& out, std::string line,
                  const std::vector<LinearTerm>& terms, const MilpModel& m) {
  constexpr size_t kWidth = 76;
  bool first = true;
  for (const LinearTerm& t : terms) {
    std::string tok;
    if (first) {
      tok = (t.coef < 0 ? "-" : "") + num(std::fabs(t.coef)) + " " +
            m.variables[static_cast<size_t>(t.var)].name;
      first = false;
    } else {
      tok = (t.coef < 0 ? "- " : "+ ") + num(std::fabs(t.coef)) + " " +
            m.variables[static_cast<size_t>(t.var)].name;
    }
    if (line.size() + 1 + tok.size() > kWidth && line.size() > 3) {
      out += line;
      out += '\n';
      line = "  ";
    }
    line += ' ';
    line += tok;
  }
  out += line;
}

const char* rel_text(Relation r) {
  switch (r) {
    case Relation::kLe: return "<=";
    case Relation::kGe: return ">=";
    default: return "=";
  }
}

}  // namespace

int MilpModel::var(const std::string& name) const {
  auto it = index.find(name);
  return it == index.end() ? -1 : it->second;
}

BigM compute_big_m(const SubstrateNetwork& net,
                   const std::vector<ServiceRequest>& services) {
  RateBounds rb = propagate_rate_bounds(net, services);
  double max_rate = 0.0;
  for (const auto& [tid, per_comp] : rb.in_bounds)
    for (const auto& bounds : per_comp)
      for (double b : bounds) max_rate = std::max(max_rate, b);
  for (const auto& [tid, per_comp] : rb.out_bounds)
    for (const auto& bounds : per_comp)
      for (double b : bounds) max_rate = std::max(max_rate, b);
  BigM bm;
  bm.rate_M = max_rate + 1.0;
  bm.cpu_M = rb.total_cpu + 1.0;
  bm.mem_M = rb.total_mem + 1.0;
  // Any cycle-free routing carries at most the total arc rate over a link.
  bm.dr_M = rb.total_edge_rate + 1.0;
  return bm;
}

MilpModel build_model(const SubstrateNetwork& net,
                      const std::vector<ServiceRequest>& services,
                      const SystemConfiguration* prev, const Weights& weights) {
  return ModelBuilder(net, services, prev, weights).build();
}

std::string emit_lp(const MilpModel& model) {
  std::string out = "Minimize\n";
  {
    std::string line = " obj:";
    if (model.objective.empty()) {
      out += line;
      out += '\n';
    } else {
      append_terms(out, std::move(line), model.objective, model);
      out += '\n';
    }
  }
  out += "Subject To\n";
  for (const MilpConstraint& c : model.constraints) {
    if (c.terms.empty()) continue;
    std::string line = " " + c.name + ":";
    append_terms(out, std::move(line), c.terms, model);
    out += ' ';
    out += rel_text(c.rel);
    out += ' ';
    out += num(c.rhs);
    out += '\n';
  }
  std::string bounds;
  for (const MilpVariable& v : model.variables)
    if (v.upper && v.kind == VarKind::kContinuous)
      bounds += " " + v.name + " <= " + num(*v.upper) + "\n";
  if (!bounds.empty()) {
    out += "Bounds\n";
    out += bounds;
  }
  std::string binaries;
  for (const MilpVariable& v : model.variables)
    if (v.kind == VarKind::kBinary) binaries += " " + v.name + "\n";
  if (!binaries.empty()) {
    out += "Binary\n";
    out += binaries;
  }
  out += "End\n";
  return out;
}

SystemConfiguration import_solution(const MilpModel& model,
                                    const std::string& solution_text) {
  std::map<std::string, double> val;
  std::optional<double> claimed;
  std::istringstream in(solution_text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto pos = raw.find('#'); pos != std::string::npos) raw.resize(pos);
    std::istringstream ls(raw);
    std::string name;
    if (!(ls >> name)) continue;
    double value;
    std::string extra;
    if (!(ls >> value) || (ls >> extra))
      throw std::invalid_argument("solution line " + std::to_string(line_no) +
                                  ": expected 'name value'");
    if (name == "objective") {
      claimed = value;
      continue;
    }
    if (model.var(name) < 0)
      throw std::invalid_argument("solution line " + std::to_string(line_no) +
                                  ": unknown variable '" + name + "'");
    val[name] = value;
  }
  auto get = [&](const std::string& name) {
    auto it = val.find(name);
    return it == val.end() ? 0.0 : it->second;
  };

  SystemConfiguration cfg;
  cfg.substrate = model.substrate;
  GlobalIndex g = make_global_index(model.services);
  const int nV = static_cast<int>(model.substrate.nodes.size());

  for (size_t s = 0; s < model.services.size(); ++s) {
    const ServiceRequest& req = model.services[s];
    Service svc;
    svc.tmpl = req.tmpl;
    svc.sources = req.sources;
    for (const Component& c : req.tmpl.components)
      for (int v = 0; v < nV; ++v) {
        if (get(nm("x", {g.comp(s, c.id), v})) <= 0.5) continue;
        Instance inst;
        inst.id = svc.overlay.next_instance_id++;
        inst.component = c.id;
        inst.node = v;
        inst.in_rates.assign(static_cast<size_t>(c.n_inputs), 0.0);
        inst.out_rates.assign(static_cast<size_t>(c.n_outputs), 0.0);
        svc.overlay.instances.push_back(std::move(inst));
      }
    for (size_t a = 0; a < req.tmpl.arcs.size(); ++a) {
      const Arc& arc = req.tmpl.arcs[a];
      int ga = g.arc(s, static_cast<int>(a));
      for (int v = 0; v < nV; ++v)
        for (int vp = 0; vp < nV; ++vp) {
          double y = get(nm("y", {ga, v, vp}));
          if (y <= kTol) continue;
          const Instance* si = svc.overlay.find(arc.src, v);
          const Instance* di = svc.overlay.find(arc.dst, vp);
          if (!si || !di)
            throw std::invalid_argument(
                "solution maps flow " + nm("y", {ga, v, vp}) +
                " between nodes without the corresponding instances");
          OverlayEdge e;
          e.src = si->id;
          e.src_output = arc.output;
          e.dst = di->id;
          e.dst_input = arc.input;
          e.rate = y;
          std::vector<double> net_flow(static_cast<size_t>(nV), 0.0);
          for (const Link& l : model.substrate.links) {
            double z = get(nm("z", {ga, v, vp, l.id}));
            if (z <= kTol) continue;
            e.routing.link_rates[l.id] = z;
            net_flow[l.src] += z;
            net_flow[l.dst] -= z;
          }
          const double ctol = 1e-6 * std::max(1.0, y);
          for (int u = 0; u < nV; ++u) {
            double expect = 0.0;
            if (v != vp && u == v) expect = y;
            if (v != vp && u == vp) expect = -y;
            if (std::fabs(net_flow[static_cast<size_t>(u)] - expect) > ctol)
              throw std::invalid_argument(
                  "solution violates flow conservation for " +
                  nm("y", {ga, v, vp}) + " at node " + std::to_string(u));
          }
          if (v == vp && !e.routing.link_rates.empty())
            throw std::invalid_argument(
                "solution routes co-located flow " + nm("y", {ga, v, vp}) +
                " over links");
          svc.overlay.edges.push_back(std::move(e));
        }
    }
    cfg.services.emplace(req.tmpl.id, std::move(svc));
  }

  propagate_rates(cfg);

  if (claimed) {
    const SystemConfiguration* ref =
        model.previous ? &*model.previous : nullptr;
    ConfigurationScore sc = score(cfg, ref, model.weights);
    if (std::fabs(sc.objective - *claimed) >
        1e-6 * std::max(1.0, std::fabs(*claimed)))
      throw std::invalid_argument(
          "claimed objective " + num(*claimed) +
          " does not match the reconstructed configuration's " +
          num(sc.objective));
  }
  return cfg;
}

std::map<std::string, double> assignment_from_configuration(
    const MilpModel& model, const SystemConfiguration& cfg) {
  std::map<std::string, double> val;
  GlobalIndex g = make_global_index(model.services);
  const int nV = static_cast<int>(model.substrate.nodes.size());
  std::vector<double> node_cpu(static_cast<size_t>(nV), 0.0);
  std::vector<double> node_mem(static_cast<size_t>(nV), 0.0);
  std::vector<double> link_load(model.substrate.links.size(), 0.0);

  for (size_t s = 0; s < model.services.size(); ++s) {
    const TemplateId tid = model.services[s].tmpl.id;
    auto it = cfg.services.find(tid);
    if (it == cfg.services.end())
      throw std::invalid_argument("configuration lacks service " +
                                  std::to_string(tid));
    const Service& svc = it->second;
    for (const Instance& inst : svc.overlay.instances) {
      int gj = g.comp(s, inst.component);
      val[nm("x", {gj, inst.node})] = 1.0;
      for (size_t k = 0; k < inst.in_rates.size(); ++k)
        val[nm("Lam", {gj, inst.node, static_cast<int>(k)})] = inst.in_rates[k];
      for (size_t k = 0; k < inst.out_rates.size(); ++k)
        val[nm("LamP", {gj, inst.node, static_cast<int>(k)})] =
            inst.out_rates[k];
      val[nm("rho", {gj, inst.node})] = inst.cpu_load;
      val[nm("mu", {gj, inst.node})] = inst.mem_load;
      node_cpu[inst.node] += inst.cpu_load;
      node_mem[inst.node] += inst.mem_load;
    }
    for (const OverlayEdge& e : svc.overlay.edges) {
      const Instance& si = *svc.overlay.find(e.src);
      const Instance& di = *svc.overlay.find(e.dst);
      int local_arc = svc.tmpl.find_arc(si.component, e.src_output,
                                        di.component, e.dst_input);
      if (local_arc < 0)
        throw std::invalid_argument("service " + std::to_string(tid) +
                                    ": edge matches no template arc");
      int ga = g.arc(s, local_arc);
      val[nm("y", {ga, si.node, di.node})] += e.rate;
      for (const auto& [l, r] : e.routing.link_rates) {
        val[nm("z", {ga, si.node, di.node, l})] += r;
        link_load[static_cast<size_t>(l)] += r;
        if (r > kTol) val[nm("zeta", {ga, si.node, di.node, l})] = 1.0;
      }
    }
    if (model.previous) {
      auto pit = model.previous->services.find(tid);
      if (pit != model.previous->services.end())
        for (const Component& c : svc.tmpl.components)
          for (int v = 0; v < nV; ++v) {
            bool now = svc.overlay.find(c.id, v) != nullptr;
            bool before = pit->second.overlay.find(c.id, v) != nullptr;
            if (now != before) val[nm("del", {g.comp(s, c.id), v})] = 1.0;
          }
    }
  }

  double psi_cpu = 0.0, psi_mem = 0.0, psi_dr = 0.0;
  for (int v = 0; v < nV; ++v) {
    const Node& n = model.substrate.node(v);
    double over_cpu = node_cpu[static_cast<size_t>(v)] - n.cap_cpu;
    double over_mem = node_mem[static_cast<size_t>(v)] - n.cap_mem;
    if (over_cpu > kTol) val["om_cpu_" + std::to_string(v)] = 1.0;
    if (over_mem > kTol) val["om_mem_" + std::to_string(v)] = 1.0;
    psi_cpu = std::max(psi_cpu, over_cpu);
    psi_mem = std::max(psi_mem, over_mem);
  }
  for (const Link& l : model.substrate.links) {
    double over = link_load[static_cast<size_t>(l.id)] - l.max_rate;
    if (over > kTol) val[nm("om", {l.id})] = 1.0;
    psi_dr = std::max(psi_dr, over);
  }
  if (psi_cpu > 0.0) val["psi_cpu"] = psi_cpu;
  if (psi_mem > 0.0) val["psi_mem"] = psi_mem;
  if (psi_dr > 0.0) val["psi_dr"] = psi_dr;

  for (auto it = val.begin(); it != val.end(); ++it)
    if (model.var(it->first) < 0)
      throw std::invalid_argument("configuration produced unknown variable " +
                                  it->first);
  return val;
}

std::vector<ConstraintCheck> check_constraints(
    const MilpModel& model, const std::map<std::string, double>& assignment) {
  auto get = [&](int var) {
    auto it = assignment.find(model.variables[static_cast<size_t>(var)].name);
    return it == assignment.end() ? 0.0 : it->second;
  };
  std::vector<ConstraintCheck> out;
  out.reserve(model.constraints.size());
  for (const MilpConstraint& c : model.constraints) {
    double lhs = 0.0;
    for (const LinearTerm& t : c.terms) lhs += t.coef * get(t.var);
    double tol = kTol * std::max({1.0, std::fabs(lhs), std::fabs(c.rhs)});
    bool ok = true;
    switch (c.rel) {
      case Relation::kLe: ok = lhs <= c.rhs + tol; break;
      case Relation::kGe: ok = lhs >= c.rhs - tol; break;
      case Relation::kEq: ok = std::fabs(lhs - c.rhs) <= tol; break;
    }
    out.push_back({c.name, lhs, c.rhs, c.rel, ok});
  }
  return out;
}

double objective_value(const MilpModel& model,
                       const std::map<std::string, double>& assignment) {
  auto get = [&](int var) {
    auto it = assignment.find(model.variables[static_cast<size_t>(var)].name);
    return it == assignment.end() ? 0.0 : it->second;
  };
  double obj = 0.0;
  for (const LinearTerm& t : model.objective) obj += t.coef * get(t.var);
  return obj;
}

}  // namespace tembed
