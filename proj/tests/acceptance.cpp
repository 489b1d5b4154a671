// Acceptance harness: one scored criterion per test case, each printing a
// single [PASS]/[FAIL] line with the measured evidence. The binary fails if
// any criterion fails.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "tembed/heuristic.hpp"
#include "tembed/json_io.hpp"
#include "tembed/milp.hpp"
#include "tembed/model.hpp"
#include "tembed/oracle.hpp"
#include "tembed/reduction.hpp"
#include "tembed/scenario.hpp"

using namespace tembed;
using namespace tembed::testutil;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int n, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", n, name,
              detail.c_str());
  std::fflush(stdout);
}

bool close(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

SystemConfiguration embed_fresh(const SubstrateNetwork& net,
                                const std::vector<ServiceRequest>& reqs,
                                const HeuristicParams& params = {}) {
  SystemConfiguration start;
  start.substrate = net;
  return embed(start, reqs, params);
}

}  // namespace

// --------------------------------------------------------------------------
// 1. Reduction equivalence: the oracle finds a violation-free embedding of
//    the generated instance exactly when a cover of size <= k exists.
// --------------------------------------------------------------------------
TEST_CASE("criterion 1: reduction equivalence") {
  std::mt19937_64 rng(101);
  auto t0 = Clock::now();
  int mismatches = 0;
  const int kTrials = 200;
  for (int it = 0; it < kTrials; ++it) {
    SetCoverInstance sc;
    sc.universe = 1 + static_cast<int>(rng() % 6);
    sc.k = 1 + static_cast<int>(rng() % 3);
    int n_sets = 1 + static_cast<int>(rng() % 5);
    sc.sets.resize(static_cast<size_t>(n_sets));
    for (auto& set : sc.sets)
      for (int e = 0; e < sc.universe; ++e)
        if (rng() & 1) set.push_back(e);
    for (int e = 0; e < sc.universe; ++e) {
      bool covered = false;
      for (const auto& set : sc.sets)
        for (int x : set) covered = covered || x == e;
      if (!covered) sc.sets[rng() % sc.sets.size()].push_back(e);
    }

    bool coverable = brute_force_set_cover(sc) <= sc.k;
    EmbeddingInstance inst = to_embedding(sc);
    OracleLimits lim;
    lim.max_nodes = static_cast<int>(inst.network.nodes.size());
    lim.max_components = 3;
    lim.max_total_instances = sc.universe + n_sets + 1;
    OracleResult r =
        brute_force_embed(inst.network, {{inst.tmpl, inst.sources}}, lim);
    if ((r.best.n_violations == 0) != coverable) ++mismatches;
  }
  double secs = seconds_since(t0);
  bool ok = mismatches == 0 && secs < 60.0;
  char detail[128];
  std::snprintf(detail, sizeof detail, "%d instances, %d mismatches, %.1fs",
                kTrials, mismatches, secs);
  report(1, "set-cover reduction equivalence", ok, detail);
  CHECK(ok);
}

// --------------------------------------------------------------------------
// 2. Heuristic vs. oracle on random instances within the oracle's limits.
// --------------------------------------------------------------------------
TEST_CASE("criterion 2: heuristic tracks the oracle") {
  std::mt19937_64 rng(202);
  const int kTrials = 100;
  int equal = 0, undercuts = 0, ratio_breaches = 0;
  double worst_ratio = 0.0;
  for (int it = 0; it < kTrials; ++it) {
    int n = 2 + static_cast<int>(rng() % 4);
    int mode = static_cast<int>(rng() % 10);  // <4 roomy, <8 split, else over
    std::vector<StageSpec> stages;
    double rate;
    double cap_cpu, cap_mem = 50;
    if (mode < 4) {
      int n_stages = 1 + static_cast<int>(rng() % 3);
      rate = 1 + static_cast<double>(rng() % 3);
      double chain_cpu = 0, chain_mem = 0;
      for (int s = 0; s < n_stages; ++s) {
        StageSpec sp;
        sp.pc = 1 + static_cast<double>(rng() % 3);
        sp.pk = 1;
        sp.mc = static_cast<double>(rng() % 3);
        sp.mk = static_cast<double>(rng() % 2);
        sp.oc = 0;
        sp.ok = 1;
        chain_cpu += sp.pc + sp.pk * rate;
        chain_mem += sp.mc + sp.mk * rate;
        stages.push_back(sp);
      }
      cap_cpu = chain_cpu + 2 + static_cast<double>(rng() % 6);
      cap_mem = chain_mem + 2 + static_cast<double>(rng() % 6);
    } else if (mode < 8) {
      rate = 2 + static_cast<double>(rng() % 3);
      stages = {{1, 1, 0, 1, 0, 1}};
      cap_cpu = rate;  // one node short by exactly one unit: forces a split
    } else {
      rate = n + 1 + static_cast<double>(rng() % 2);
      stages = {{1, 1, 0, 0, 0, 1}};
      cap_cpu = 2;  // n units of service across n nodes: overload guaranteed
    }
    SubstrateNetwork net = path_network(n, cap_cpu, cap_mem, 50, 1);
    Template t = chain_template(0, stages);
    NodeId src = static_cast<NodeId>(rng() % static_cast<uint64_t>(n));
    std::vector<ServiceRequest> reqs = {{t, {{src, 0, rate}}}};

    OracleLimits lim;
    lim.max_nodes = n;
    lim.max_components = static_cast<int>(stages.size()) + 1;
    lim.max_total_instances =
        1 + static_cast<int>(stages.size()) * static_cast<int>(rate);
    if (lim.max_total_instances < 1 + n) lim.max_total_instances = 1 + n;
    OracleResult oracle = brute_force_embed(net, reqs, lim);

    SystemConfiguration h = embed_fresh(net, reqs);
    int hv = count_violations(h).n;
    if (hv < oracle.best.n_violations) ++undercuts;
    if (hv == oracle.best.n_violations) {
      ++equal;
      double ho = score(h, nullptr, oracle.weights).objective;
      double ratio = ho / oracle.best.objective;
      worst_ratio = std::max(worst_ratio, ratio);
      if (ratio > 1.5 + 1e-9) ++ratio_breaches;
    }
  }
  bool ok = undercuts == 0 && equal >= 80 && ratio_breaches == 0;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "%d/%d equal violation counts, %d undercuts, worst objective "
                "ratio %.3f",
                equal, kTrials, undercuts, worst_ratio);
  report(2, "heuristic matches oracle violations", ok, detail);
  CHECK(ok);
}

// --------------------------------------------------------------------------
// 3. The constraint system agrees with the scoring validators on random
//    configurations translated into variable assignments.
// --------------------------------------------------------------------------
TEST_CASE("criterion 3: constraint system agrees with the validators") {
  std::mt19937_64 rng(303);
  const int kTrials = 50;
  int bad = 0;
  for (int it = 0; it < kTrials; ++it) {
    int n = 3 + static_cast<int>(rng() % 2);
    double cap = 10 + static_cast<double>(rng() % 30);
    SubstrateNetwork net =
        path_network(n, cap, cap, 5 + static_cast<double>(rng() % 20),
                     1 + static_cast<double>(rng() % 3));
    int n_stages = 1 + static_cast<int>(rng() % 3);
    std::vector<StageSpec> stages;
    for (int s = 0; s < n_stages; ++s)
      stages.push_back({1 + static_cast<double>(rng() % 3),
                        1 + static_cast<double>(rng() % 2),
                        static_cast<double>(rng() % 3),
                        static_cast<double>(rng() % 2), 0, 1});
    Template t = chain_template(0, stages);
    double rate = 1 + static_cast<double>(rng() % 5);
    NodeId src = static_cast<NodeId>(rng() % static_cast<uint64_t>(n));
    std::vector<ServiceRequest> reqs = {{t, {{src, 0, rate}}}};

    std::optional<SystemConfiguration> prev;
    if (it % 2 == 0 && rate > 1)
      prev = embed_fresh(net, {{t, {{src, 0, rate - 1}}}});
    SystemConfiguration cfg =
        prev ? embed(*prev, reqs) : embed_fresh(net, reqs);

    Weights w = default_weights(cfg);
    const SystemConfiguration* pp = prev ? &*prev : nullptr;
    MilpModel model = build_model(net, reqs, pp, w);
    auto asg = assignment_from_configuration(model, cfg);

    bool all_ok = true;
    for (const ConstraintCheck& c : check_constraints(model, asg))
      all_ok = all_ok && c.ok;

    ViolationSummary vs = count_violations(cfg);
    double om_sum = 0, psi_cpu = 0, psi_mem = 0, psi_dr = 0;
    for (const auto& [name, value] : asg) {
      if (name.rfind("om", 0) == 0) om_sum += value;
      if (name == "psi_cpu") psi_cpu = value;
      if (name == "psi_mem") psi_mem = value;
      if (name == "psi_dr") psi_dr = value;
    }
    ConfigurationScore sc = score(cfg, pp, w);
    bool agree = all_ok && close(om_sum, vs.n) && close(psi_cpu, vs.psi_cpu) &&
                 close(psi_mem, vs.psi_mem) && close(psi_dr, vs.psi_dr) &&
                 close(objective_value(model, asg), sc.objective);
    if (!agree) ++bad;
  }
  bool ok = bad == 0;
  char detail[96];
  std::snprintf(detail, sizeof detail, "%d configurations, %d disagreements",
                kTrials, bad);
  report(3, "constraints vs validators", ok, detail);
  CHECK(ok);
}

// --------------------------------------------------------------------------
// 4. Demand tracking: over a 30-event scenario the allocation always equals
//    the analytic load of the embedded instances and stays violation-free
//    while demand fits.
// --------------------------------------------------------------------------
TEST_CASE("criterion 4: allocation follows demand") {
  SubstrateNetwork net = generate_substrate(20, 3.0, 404);
  std::vector<Template> templates = {video_cdn_template(0), security_chain(1)};

  auto add = [](TemplateId t, std::vector<Source> s) {
    Event e;
    e.kind = EventKind::kServiceAdd;
    e.tmpl = t;
    e.sources = std::move(s);
    return e;
  };
  auto src_event = [](EventKind k, TemplateId t, Source s) {
    Event e;
    e.kind = k;
    e.tmpl = t;
    e.source = s;
    return e;
  };
  auto rate = [&](TemplateId t, NodeId v, double r) {
    return src_event(EventKind::kSourceRateChange, t, {v, 0, r});
  };
  auto src_add = [&](TemplateId t, NodeId v, double r) {
    return src_event(EventKind::kSourceAdd, t, {v, 0, r});
  };
  auto src_rem = [&](TemplateId t, NodeId v) {
    return src_event(EventKind::kSourceRemove, t, {v, 0, 0});
  };
  Event rem_t1;
  rem_t1.kind = EventKind::kServiceRemove;
  rem_t1.tmpl = 1;

  std::vector<Event> events = {
      add(0, {{0, 0, 8}}),   rate(0, 0, 12),        src_add(0, 5, 6),
      rate(0, 0, 16),        add(1, {{9, 0, 6}, {13, 0, 4}}),
      rate(1, 9, 10),        rate(0, 5, 10),        src_add(0, 17, 5),
      rate(0, 0, 20),        rate(1, 13, 8),        src_rem(0, 5),
      rate(0, 0, 24),        src_add(1, 2, 5),      rate(0, 17, 9),
      rate(1, 9, 14),        src_rem(1, 13),        rate(0, 0, 18),
      src_add(0, 11, 7),     rate(1, 2, 9),         rem_t1,
      rate(0, 11, 11),       add(1, {{6, 0, 8}}),   rate(0, 0, 26),
      rate(1, 6, 12),        src_add(1, 15, 6),     rate(0, 17, 13),
      src_rem(0, 11),        rate(1, 6, 16),        rate(0, 0, 30),
      rate(1, 15, 10),
  };
  REQUIRE(events.size() == 30);

  // Replay manually so the per-event configuration is inspectable.
  std::map<TemplateId, std::vector<Source>> demand;
  SystemConfiguration cfg;
  cfg.substrate = net;
  int bad_events = 0;
  double worst_gap = 0.0;
  for (const Event& ev : events) {
    switch (ev.kind) {
      case EventKind::kServiceAdd:
        demand[ev.tmpl] = ev.sources;
        break;
      case EventKind::kServiceRemove:
        demand.erase(ev.tmpl);
        break;
      case EventKind::kSourceAdd:
        demand[ev.tmpl].push_back(ev.source);
        break;
      case EventKind::kSourceRemove:
      case EventKind::kSourceRateChange:
        for (auto it = demand[ev.tmpl].begin(); it != demand[ev.tmpl].end();
             ++it)
          if (it->node == ev.source.node &&
              it->component == ev.source.component) {
            if (ev.kind == EventKind::kSourceRemove)
              demand[ev.tmpl].erase(it);
            else
              it->rate = ev.source.rate;
            break;
          }
        break;
    }
    std::vector<ServiceRequest> reqs;
    for (const auto& [tid, srcs] : demand)
      reqs.push_back({templates[static_cast<size_t>(tid)], srcs});
    cfg = embed(cfg, reqs);

    bool event_ok = validate_configuration(cfg).empty() &&
                    count_violations(cfg).n == 0;
    double allocated = 0, analytic = 0;
    for (const auto& [tid, svc] : cfg.services)
      for (const Instance& inst : svc.overlay.instances) {
        allocated += inst.cpu_load;
        analytic += svc.tmpl.component(inst.component).cpu_fn.eval(inst.in_rates);
      }
    worst_gap = std::max(worst_gap, std::abs(allocated - analytic));
    event_ok = event_ok && close(allocated, analytic);
    if (!event_ok) ++bad_events;
  }

  // The scenario driver must report the same story.
  auto records = run_scenario(net, templates, events);
  int record_violations = 0;
  for (const ScenarioRecord& r : records) record_violations += r.violations;

  bool ok = bad_events == 0 && records.size() == 30 && record_violations == 0;
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "30 events, %d off-track, max |alloc - sum p(in)| = %.2g",
                bad_events, worst_gap);
  report(4, "demand tracking without violations", ok, detail);
  CHECK(ok);
}

// --------------------------------------------------------------------------
// 5. Scalability: a full embed on a 1000-node substrate stays under a second.
// --------------------------------------------------------------------------
TEST_CASE("criterion 5: thousand-node embedding under one second") {
  SubstrateNetwork net = generate_substrate(1000, 2.53, 505);
  Template t = video_cdn_template(0);
  std::vector<Source> sources;
  for (int i = 0; i < 10; ++i)
    sources.push_back({static_cast<NodeId>((97 * (i + 1)) % 1000), 0,
                       5.0 + 2.0 * i});
  std::vector<ServiceRequest> reqs = {{t, sources}};

  auto t0 = Clock::now();
  SystemConfiguration cfg = embed_fresh(net, reqs);
  double secs = seconds_since(t0);

  bool valid = validate_configuration(cfg).empty();
  bool ok = secs < 1.0 && valid && net.links.size() >= 2450 &&
            net.links.size() <= 2530;
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "%zu arcs, 10 sources, embed %.0f ms, %s", net.links.size(),
                secs * 1e3, valid ? "valid" : "INVALID");
  report(5, "scalability", ok, detail);
  CHECK(ok);
}

// --------------------------------------------------------------------------
// 6. Invariant suite: structural properties of every heuristic output.
// --------------------------------------------------------------------------
TEST_CASE("criterion 6: heuristic output invariants") {
  std::mt19937_64 rng(606);
  const int kTrials = 1000;
  int failures = 0;
  for (int it = 0; it < kTrials; ++it) {
    int n = 2 + static_cast<int>(rng() % 5);
    double bw = 10 + static_cast<double>(rng() % 40);
    double delay = 1 + static_cast<double>(rng() % 5);
    SubstrateNetwork net = path_network(n, 0, 0, bw, delay);
    for (Node& node : net.nodes) {
      node.cap_cpu = 10 + static_cast<double>(rng() % 40);
      node.cap_mem = 10 + static_cast<double>(rng() % 40);
    }
    if (n >= 4 && (rng() & 1))
      connect(net, 0, static_cast<NodeId>(n - 1), bw, delay);

    int n_stages = 1 + static_cast<int>(rng() % 3);
    std::vector<StageSpec> stages;
    for (int s = 0; s < n_stages; ++s)
      stages.push_back({1 + static_cast<double>(rng() % 3),
                        static_cast<double>(rng() % 2),
                        static_cast<double>(rng() % 3),
                        static_cast<double>(rng() % 2), 0,
                        (rng() & 1) ? 1.0 : 0.5});
    Template t = chain_template(0, stages);

    std::vector<Source> sources;
    NodeId first = static_cast<NodeId>(rng() % static_cast<uint64_t>(n));
    sources.push_back({first, 0, 0.5 * (1 + static_cast<double>(rng() % 8))});
    if (n > 1 && (rng() & 1)) {
      NodeId second = static_cast<NodeId>(
          (first + 1 + static_cast<NodeId>(rng() % static_cast<uint64_t>(n - 1))) % n);
      sources.push_back({second, 0, 0.5 * (1 + static_cast<double>(rng() % 8))});
    }
    std::vector<ServiceRequest> reqs = {{t, sources}};
    HeuristicParams params{static_cast<uint64_t>(it), it % 2 == 0};

    SystemConfiguration cfg = embed_fresh(net, reqs, params);
    bool case_ok = validate_configuration(cfg).empty();

    const Service& svc = cfg.services.at(0);
    // Placement uniqueness.
    std::set<std::pair<ComponentId, NodeId>> seen;
    for (const Instance& inst : svc.overlay.instances)
      case_ok = case_ok && seen.insert({inst.component, inst.node}).second;
    // Source fidelity: every bound source is an instance emitting its rate.
    for (const Source& s : sources) {
      const Instance* inst = svc.overlay.find(s.component, s.node);
      case_ok = case_ok && inst && !inst->out_rates.empty() &&
                close(inst->out_rates[0], s.rate);
    }
    // Rate propagation: recomputing from the functions changes nothing.
    SystemConfiguration re = cfg;
    propagate_rates(re);
    const Service& rs = re.services.at(0);
    for (size_t i = 0; case_ok && i < rs.overlay.instances.size(); ++i) {
      const Instance& a = svc.overlay.instances[i];
      const Instance& b = rs.overlay.instances[i];
      case_ok = case_ok && close(a.cpu_load, b.cpu_load) &&
                close(a.mem_load, b.mem_load);
      for (size_t k = 0; k < a.in_rates.size(); ++k)
        case_ok = case_ok && close(a.in_rates[k], b.in_rates[k]);
      for (size_t k = 0; k < a.out_rates.size(); ++k)
        case_ok = case_ok && close(a.out_rates[k], b.out_rates[k]);
    }
    // Determinism: the same seed reproduces the configuration exactly.
    SystemConfiguration again = embed_fresh(net, reqs, params);
    Catalog cat;
    for (int v = 0; v < n; ++v) cat.nodes.add("n" + std::to_string(v));
    cat.services.add("svc");
    for (const Component& c : t.components)
      cat.components[0].add("c" + std::to_string(c.id));
    case_ok = case_ok &&
              dump_configuration(cfg, cat) == dump_configuration(again, cat);

    if (!case_ok) ++failures;
  }
  bool ok = failures == 0;
  char detail[96];
  std::snprintf(detail, sizeof detail, "%d cases, %d failures", kTrials,
                failures);
  report(6, "embedding invariants", ok, detail);
  CHECK(ok);
}

// --------------------------------------------------------------------------
// 7. LP round-trip with a hand-verified optimal solution.
// --------------------------------------------------------------------------
TEST_CASE("criterion 7: lp round-trip at the known optimum") {
  // Substrate: the source node offers no compute, the near node (1 hop,
  // delay 1) fits the worker, the far node (delay 2) is a decoy.
  SubstrateNetwork net;
  net.nodes = {{0, 0, 0}, {1, 10, 10}, {2, 8, 8}};
  connect(net, 0, 1, 10, 1);
  connect(net, 0, 2, 10, 2);
  Template t = chain_template(0, {{0, 1, 0, 1, 0, 0}});  // W: cpu = mem = x
  std::vector<ServiceRequest> reqs = {{t, {{0, 0, 4}}}};

  SystemConfiguration base;
  base.substrate = net;
  base.services.emplace(0, Service{t, reqs[0].sources, {}});
  Weights w = default_weights(base);
  MilpModel model = build_model(net, reqs, nullptr, w);

  fs::path dir = fs::temp_directory_path() / "tembed_acceptance_lp";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_text_file((dir / "model.lp").string(), emit_lp(model));
  Catalog cat;
  cat.nodes.add("n0");
  cat.nodes.add("n1");
  cat.nodes.add("n2");
  cat.services.add("svc");
  cat.components[0].add("S");
  cat.components[0].add("W");
  write_json_file((dir / "model.lp.meta.json").string(),
                  dump_model_inputs({net, reqs, std::nullopt, w}, cat));

  // The optimum by hand: W on node 1, the whole rate over the delay-1 link.
  // Any placement on node 2 doubles the delay term; any split pays both.
  SystemConfiguration opt;
  opt.substrate = net;
  Service svc;
  svc.tmpl = t;
  svc.sources = reqs[0].sources;
  Instance s;
  s.id = 0;
  s.component = 0;
  s.node = 0;
  s.out_rates = {4};
  Instance worker;
  worker.id = 1;
  worker.component = 1;
  worker.node = 1;
  worker.in_rates = {4};
  worker.cpu_load = 4;
  worker.mem_load = 4;
  OverlayEdge e;
  e.src = 0;
  e.src_output = 0;
  e.dst = 1;
  e.dst_input = 0;
  e.rate = 4;
  e.routing.link_rates[net.find_link(0, 1)] = 4;
  svc.overlay.instances = {s, worker};
  svc.overlay.edges = {e};
  svc.overlay.next_instance_id = 2;
  opt.services.emplace(0, std::move(svc));

  bool ok = validate_configuration(opt).empty();
  ConfigurationScore sc = score(opt, nullptr, w);
  // Hand value: delay 1 at weight m2, plus cpu 4 + mem 4 + routed rate 4.
  ok = ok && close(sc.objective, w.m2 * 1 + 12);

  // The decoy really is worse: same loads, twice the delay.
  SystemConfiguration decoy = opt;
  Service& dsvc = decoy.services.at(0);
  dsvc.overlay.instances[1].node = 2;
  dsvc.overlay.edges[0].routing.link_rates.clear();
  dsvc.overlay.edges[0].routing.link_rates[net.find_link(0, 2)] = 4;
  ok = ok && validate_configuration(decoy).empty() &&
       score(decoy, nullptr, w).objective > sc.objective;

  // Solution file with the claimed objective, then the round trip.
  auto asg = assignment_from_configuration(model, opt);
  double claimed = objective_value(model, asg);
  ok = ok && close(claimed, sc.objective);
  std::string sol = "# hand-verified optimum\n";
  for (const auto& [name, value] : asg) {
    char line[128];
    std::snprintf(line, sizeof line, "%s %.17g\n", name.c_str(), value);
    sol += line;
  }
  char obj_line[64];
  std::snprintf(obj_line, sizeof obj_line, "objective %.17g\n", claimed);
  sol += obj_line;
  write_text_file((dir / "optimum.sol").string(), sol);

  Catalog rcat;
  ModelInputs mi = load_model_inputs(
      read_json_file((dir / "model.lp.meta.json").string()), rcat);
  MilpModel rebuilt = build_model(mi.network, mi.services, nullptr, mi.weights);
  ok = ok && emit_lp(rebuilt) == read_text_file((dir / "model.lp").string());

  SystemConfiguration imported = import_solution(
      rebuilt, read_text_file((dir / "optimum.sol").string()));
  ok = ok && validate_configuration(imported).empty();
  double rescored = score(imported, nullptr, mi.weights).objective;
  ok = ok && std::abs(rescored - claimed) <= 1e-6 * std::abs(claimed);
  const Instance* placed = imported.services.at(0).overlay.find(1, 1);
  ok = ok && placed && close(placed->in_rates[0], 4);
  fs::remove_all(dir);

  char detail[128];
  std::snprintf(detail, sizeof detail,
                "claimed %.6g, re-scored %.6g, relative gap %.2g", claimed,
                rescored, std::abs(rescored - claimed) / claimed);
  report(7, "lp round-trip", ok, detail);
  CHECK(ok);
}
