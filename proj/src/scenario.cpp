#include "tembed/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>
#include <utility>

#include "tembed/milp.hpp"

namespace tembed {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::kServiceAdd: return "service-add";
    case EventKind::kServiceRemove: return "service-remove";
    case EventKind::kSourceAdd: return "source-add";
    case EventKind::kSourceRemove: return "source-remove";
    case EventKind::kSourceRateChange: return "source-rate-change";
  }
  return "?";
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "service-add") return EventKind::kServiceAdd;
  if (s == "service-remove") return EventKind::kServiceRemove;
  if (s == "source-add") return EventKind::kSourceAdd;
  if (s == "source-remove") return EventKind::kSourceRemove;
  if (s == "source-rate-change") return EventKind::kSourceRateChange;
  throw std::invalid_argument("unknown event kind '" + s + "'");
}

namespace {

// Ids-as-names catalog for exports when the caller has no real one.
Catalog synthetic_catalog(const SubstrateNetwork& net,
                          const std::vector<ServiceRequest>& services) {
  Catalog cat;
  for (const Node& n : net.nodes) cat.nodes.add(std::to_string(n.id));
  for (const ServiceRequest& r : services) {
    cat.services.add(std::to_string(r.tmpl.id));
    NameTable& comps = cat.components[r.tmpl.id];
    for (const Component& c : r.tmpl.components) comps.add(std::to_string(c.id));
  }
  return cat;
}

void check_source(const Template& t, const SubstrateNetwork& net,
                  const Source& s, bool need_rate, const std::string& where) {
  if (s.component < 0 ||
      s.component >= static_cast<ComponentId>(t.components.size()) ||
      !t.components[static_cast<size_t>(s.component)].is_source)
    throw std::runtime_error(where + ": component " +
                             std::to_string(s.component) +
                             " is not a source of the template");
  if (s.node < 0 || s.node >= static_cast<NodeId>(net.nodes.size()))
    throw std::runtime_error(where + ": unknown node " +
                             std::to_string(s.node));
  if (need_rate && s.rate <= 0)
    throw std::runtime_error(where + ": rate must be positive");
}

}  // namespace

std::vector<ScenarioRecord> run_scenario(const SubstrateNetwork& substrate,
                                         const std::vector<Template>& templates,
                                         const std::vector<Event>& events,
                                         const ScenarioOptions& opts,
                                         SystemConfiguration* final_config) {
  if (auto errs = validate_network(substrate); !errs.empty())
    throw std::invalid_argument("substrate: " + errs.front());
  std::map<TemplateId, Template> declared;
  for (const Template& t : templates) {
    if (auto errs = validate_template(t); !errs.empty())
      throw std::invalid_argument("template " + std::to_string(t.id) + ": " +
                                  errs.front());
    if (!declared.emplace(t.id, t).second)
      throw std::invalid_argument("duplicate template id " +
                                  std::to_string(t.id));
  }
  if (opts.algo != "heuristic" && opts.algo != "oracle" &&
      opts.algo != "export-lp")
    throw std::invalid_argument("unknown algo '" + opts.algo + "'");

  SystemConfiguration cfg;
  cfg.substrate = substrate;
  std::map<TemplateId, std::vector<Source>> demand;
  std::vector<ScenarioRecord> records;

  for (size_t i = 0; i < events.size(); ++i) {
    const Event& ev = events[i];
    const std::string where = "event " + std::to_string(i);
    auto fail = [&](const std::string& msg) -> void {
      throw std::runtime_error(where + ": " + msg);
    };

    switch (ev.kind) {
      case EventKind::kServiceAdd: {
        auto dit = declared.find(ev.tmpl);
        if (dit == declared.end())
          fail("template " + std::to_string(ev.tmpl) + " is not declared");
        if (demand.count(ev.tmpl))
          fail("service " + std::to_string(ev.tmpl) + " is already bound");
        std::set<std::pair<ComponentId, NodeId>> seen;
        for (const Source& s : ev.sources) {
          check_source(dit->second, substrate, s, /*need_rate=*/true, where);
          if (!seen.insert({s.component, s.node}).second)
            fail("duplicate source binding");
        }
        demand.emplace(ev.tmpl, ev.sources);
        break;
      }
      case EventKind::kServiceRemove: {
        if (!demand.erase(ev.tmpl))
          fail("service " + std::to_string(ev.tmpl) + " is not bound");
        break;
      }
      case EventKind::kSourceAdd: {
        auto it = demand.find(ev.tmpl);
        if (it == demand.end())
          fail("service " + std::to_string(ev.tmpl) + " is not bound");
        check_source(declared.at(ev.tmpl), substrate, ev.source,
                     /*need_rate=*/true, where);
        for (const Source& s : it->second)
          if (s.component == ev.source.component && s.node == ev.source.node)
            fail("source already bound");
        it->second.push_back(ev.source);
        break;
      }
      case EventKind::kSourceRemove:
      case EventKind::kSourceRateChange: {
        auto it = demand.find(ev.tmpl);
        if (it == demand.end())
          fail("service " + std::to_string(ev.tmpl) + " is not bound");
        auto sit = std::find_if(it->second.begin(), it->second.end(),
                                [&](const Source& s) {
                                  return s.component == ev.source.component &&
                                         s.node == ev.source.node;
                                });
        if (sit == it->second.end()) fail("no such source");
        if (ev.kind == EventKind::kSourceRemove) {
          it->second.erase(sit);
        } else {
          if (ev.source.rate <= 0) fail("rate must be positive");
          sit->rate = ev.source.rate;
        }
        break;
      }
    }

    std::vector<ServiceRequest> reqs;
    for (const auto& [tid, srcs] : demand)
      reqs.push_back({declared.at(tid), srcs});

    ScenarioRecord rec;
    rec.event_index = static_cast<int>(i);
    rec.kind = ev.kind;
    for (const auto& [tid, srcs] : demand)
      for (const Source& s : srcs) rec.demand += s.rate;

    auto t0 = std::chrono::steady_clock::now();
    if (opts.algo == "export-lp") {
      SystemConfiguration base;
      base.substrate = substrate;
      for (const ServiceRequest& r : reqs)
        base.services.emplace(r.tmpl.id, Service{r.tmpl, r.sources, {}});
      Weights w = default_weights(base);
      MilpModel model = build_model(substrate, reqs, nullptr, w);
      std::string stem = opts.lp_dir + "/event_" + std::to_string(i) + ".lp";
      write_text_file(stem, emit_lp(model));
      Catalog synth;
      const Catalog* cat = opts.catalog;
      if (!cat) {
        synth = synthetic_catalog(substrate, reqs);
        cat = &synth;
      }
      ModelInputs mi{substrate, reqs, std::nullopt, w};
      write_json_file(stem + ".meta.json", dump_model_inputs(mi, *cat));
      auto t1 = std::chrono::steady_clock::now();
      rec.runtime_ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
    } else {
      SystemConfiguration next;
      if (opts.algo == "heuristic") {
        next = embed(cfg, reqs, opts.heuristic);
      } else {
        OracleResult r = brute_force_embed(substrate, reqs, opts.oracle);
        next = std::move(r.config);
      }
      auto t1 = std::chrono::steady_clock::now();
      rec.runtime_ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
      ConfigurationScore sc = score(next, &cfg, default_weights(next));
      rec.allocated_cpu = sc.total_cpu;
      rec.total_latency = sc.total_delay;
      rec.churn = sc.churn;
      rec.violations = sc.n_violations;
      for (const auto& [tid, svc] : next.services)
        rec.instances += static_cast<int>(svc.overlay.instances.size());
      cfg = std::move(next);
    }
    records.push_back(rec);
  }
  if (final_config) *final_config = cfg;
  return records;
}

SubstrateNetwork generate_substrate(int n_nodes, double avg_degree,
                                    uint64_t seed) {
  if (n_nodes < 2)
    throw std::invalid_argument("generate_substrate needs at least 2 nodes");
  std::mt19937_64 rng(seed);
  auto pick = [&rng](uint64_t lo, uint64_t hi) {
    return lo + rng() % (hi - lo + 1);
  };

  SubstrateNetwork net;
  for (int v = 0; v < n_nodes; ++v)
    net.nodes.push_back({v, static_cast<double>(pick(50, 200)),
                         static_cast<double>(pick(50, 200))});

  std::set<std::pair<int, int>> used;
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v < n_nodes; ++v) {
    int u = static_cast<int>(pick(0, static_cast<uint64_t>(v) - 1));
    edges.push_back({u, v});
    used.insert({u, v});
  }
  const long target = std::max<long>(
      n_nodes - 1, std::lround(n_nodes * avg_degree / 2.0));
  long attempts = 0;
  const long attempt_cap = 50 * target + 100;
  while (static_cast<long>(edges.size()) < target && attempts++ < attempt_cap) {
    int u = static_cast<int>(pick(0, static_cast<uint64_t>(n_nodes) - 1));
    int v = static_cast<int>(pick(0, static_cast<uint64_t>(n_nodes) - 1));
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (!used.insert({u, v}).second) continue;
    edges.push_back({u, v});
  }

  LinkId next = 0;
  for (const auto& [u, v] : edges) {
    double rate = static_cast<double>(pick(20, 100));
    double delay = static_cast<double>(pick(1, 10));
    net.links.push_back({next++, u, v, rate, delay});
    net.links.push_back({next++, v, u, rate, delay});
  }
  return net;
}

void write_metrics_csv(const std::vector<ScenarioRecord>& records,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "event,kind,demand,allocated_cpu,total_latency,instances,churn,"
         "violations,runtime_ms\n";
  char buf[64];
  auto g17 = [&buf](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  for (const ScenarioRecord& r : records) {
    out << r.event_index << ',' << to_string(r.kind) << ',' << g17(r.demand)
        << ',' << g17(r.allocated_cpu) << ',' << g17(r.total_latency) << ','
        << r.instances << ',' << r.churn << ',' << r.violations << ','
        << g17(r.runtime_ms) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

Template video_cdn_template(TemplateId id) {
  Template t;
  t.id = id;

  Component origin;
  origin.id = 0;
  origin.is_source = true;
  origin.n_outputs = 1;
  origin.cpu_fn = ResourceFunction::zero(0);
  origin.mem_fn = ResourceFunction::zero(0);
  origin.out_fns = {ResourceFunction::zero(0)};

  auto stage = [](ComponentId cid, double pc, double px, double mc, double mx,
                  double out_coef, bool sink) {
    Component c;
    c.id = cid;
    c.n_inputs = 1;
    c.n_outputs = sink ? 0 : 1;
    c.cpu_fn = ResourceFunction::affine(pc, {px});
    c.mem_fn = ResourceFunction::affine(mc, {mx});
    if (!sink) c.out_fns = {ResourceFunction::affine(0.0, {out_coef})};
    return c;
  };

  t.components = {origin,
                  stage(1, 1.0, 0.8, 2.0, 0.1, 1.0, false),   // streamer
                  stage(2, 2.0, 1.2, 1.0, 0.2, 1.0, false),   // dpi
                  stage(3, 3.0, 1.5, 2.0, 0.3, 0.7, false),   // optimizer
                  stage(4, 1.0, 0.4, 4.0, 0.5, 0.0, true)};   // cache
  t.arcs = {{0, 0, 1, 0}, {1, 0, 2, 0}, {2, 0, 3, 0}, {3, 0, 4, 0}};
  return t;
}

Scenario load_scenario(const nlohmann::json& j, Catalog& cat) {
  Scenario sc;
  if (!j.contains("templates") || !j.at("templates").is_array())
    throw std::invalid_argument("scenario: missing 'templates' array");
  for (const nlohmann::json& tj : j.at("templates"))
    sc.templates.push_back(load_template(tj, cat));

  auto parse_source = [&cat](const nlohmann::json& sj, TemplateId tid,
                             bool need_rate) {
    Source s;
    if (!sj.contains("node") || !sj.at("node").is_string())
      throw std::invalid_argument("scenario: source needs a 'node' name");
    s.node = cat.nodes.require(sj.at("node").get<std::string>());
    if (!sj.contains("component") || !sj.at("component").is_string())
      throw std::invalid_argument("scenario: source needs a 'component' name");
    s.component =
        cat.components.at(tid).require(sj.at("component").get<std::string>());
    if (need_rate || sj.contains("rate")) {
      if (!sj.contains("rate") || !sj.at("rate").is_number())
        throw std::invalid_argument("scenario: source needs a numeric 'rate'");
      s.rate = sj.at("rate").get<double>();
    }
    return s;
  };

  for (const nlohmann::json& ej : j.value("events", nlohmann::json::array())) {
    Event ev;
    if (!ej.contains("kind") || !ej.at("kind").is_string())
      throw std::invalid_argument("scenario: event needs a 'kind'");
    ev.kind = event_kind_from_string(ej.at("kind").get<std::string>());
    if (!ej.contains("service") || !ej.at("service").is_string())
      throw std::invalid_argument("scenario: event needs a 'service' name");
    ev.tmpl = cat.services.require(ej.at("service").get<std::string>());
    switch (ev.kind) {
      case EventKind::kServiceAdd:
        for (const nlohmann::json& sj :
             ej.value("sources", nlohmann::json::array()))
          ev.sources.push_back(parse_source(sj, ev.tmpl, /*need_rate=*/true));
        break;
      case EventKind::kServiceRemove:
        break;
      case EventKind::kSourceAdd:
      case EventKind::kSourceRateChange:
        ev.source = parse_source(ej.at("source"), ev.tmpl, /*need_rate=*/true);
        break;
      case EventKind::kSourceRemove:
        ev.source = parse_source(ej.at("source"), ev.tmpl, /*need_rate=*/false);
        break;
    }
    sc.events.push_back(std::move(ev));
  }
  return sc;
}

}  // namespace tembed
