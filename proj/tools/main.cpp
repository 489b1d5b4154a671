// tembed: template embedding from the command line. Thin glue over the
// library: load JSON inputs, run a solver or exporter, write JSON/LP/CSV
// outputs. Exit codes: 0 success, 1 domain error (invalid inputs, infeasible
// solution imports), 2 usage error (bad flags, missing files).

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tembed/heuristic.hpp"
#include "tembed/json_io.hpp"
#include "tembed/milp.hpp"
#include "tembed/model.hpp"
#include "tembed/oracle.hpp"
#include "tembed/reduction.hpp"
#include "tembed/scenario.hpp"

namespace {

using namespace tembed;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void must_exist(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("no such file: " + path);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// Re-key a configuration loaded with its own catalog onto the active
// catalog's id space (nodes, services, components by name; routing links by
// endpoint pair). Names unknown to the active catalog are added for services
// and components (a previous configuration may carry services that are being
// removed); nodes and links must exist in the active network.
SystemConfiguration remap_configuration(const SystemConfiguration& prev,
                                        const Catalog& pcat, Catalog& cat,
                                        const SubstrateNetwork& net) {
  SystemConfiguration out;
  out.substrate = net;
  std::vector<NodeId> nmap(prev.substrate.nodes.size(), -1);
  for (const Node& n : prev.substrate.nodes) {
    const std::string& name = pcat.nodes.name(n.id);
    if (!cat.nodes.has(name))
      throw std::invalid_argument("previous configuration references node '" +
                                  name + "' absent from the network");
    nmap[static_cast<size_t>(n.id)] = cat.nodes.require(name);
  }
  for (const auto& [old_tid, svc] : prev.services) {
    TemplateId tid = cat.services.add(pcat.services.name(old_tid));
    const NameTable& pcomps = pcat.components.at(old_tid);
    NameTable& comps = cat.components[tid];
    std::vector<ComponentId> cmap(svc.tmpl.components.size(), -1);
    for (const Component& c : svc.tmpl.components)
      cmap[static_cast<size_t>(c.id)] = comps.add(pcomps.name(c.id));

    Service nsvc;
    nsvc.tmpl = svc.tmpl;
    nsvc.tmpl.id = tid;
    nsvc.tmpl.components.resize(svc.tmpl.components.size());
    for (const Component& c : svc.tmpl.components) {
      Component nc = c;
      nc.id = cmap[static_cast<size_t>(c.id)];
      nsvc.tmpl.components[static_cast<size_t>(nc.id)] = std::move(nc);
    }
    for (Arc& a : nsvc.tmpl.arcs) {
      a.src = cmap[static_cast<size_t>(a.src)];
      a.dst = cmap[static_cast<size_t>(a.dst)];
    }
    nsvc.sources = svc.sources;
    for (Source& s : nsvc.sources) {
      s.node = nmap[static_cast<size_t>(s.node)];
      s.component = cmap[static_cast<size_t>(s.component)];
    }
    nsvc.overlay = svc.overlay;
    for (Instance& i : nsvc.overlay.instances) {
      i.component = cmap[static_cast<size_t>(i.component)];
      i.node = nmap[static_cast<size_t>(i.node)];
    }
    for (OverlayEdge& e : nsvc.overlay.edges) {
      FlowRouting routed;
      for (const auto& [l, r] : e.routing.link_rates) {
        const Link& lk = prev.substrate.link(l);
        LinkId nl = net.find_link(nmap[static_cast<size_t>(lk.src)],
                                  nmap[static_cast<size_t>(lk.dst)]);
        if (nl < 0)
          throw std::invalid_argument(
              "previous configuration routes over a link absent from the "
              "network");
        routed.link_rates[nl] += r;
      }
      e.routing = std::move(routed);
    }
    out.services.emplace(tid, std::move(nsvc));
  }
  return out;
}

struct ProblemInputs {
  Catalog cat;
  SubstrateNetwork net;
  std::vector<ServiceRequest> reqs;
  std::optional<SystemConfiguration> prev;
};

ProblemInputs load_problem(const std::string& network_path,
                           const std::vector<std::string>& template_paths,
                           const std::string& sources_path,
                           const std::string& prev_path) {
  must_exist(network_path);
  for (const std::string& p : template_paths) must_exist(p);
  if (!sources_path.empty()) must_exist(sources_path);
  if (!prev_path.empty()) must_exist(prev_path);

  ProblemInputs in;
  in.net = load_network(read_json_file(network_path), in.cat);
  std::vector<Template> tmpls;
  for (const std::string& p : template_paths)
    tmpls.push_back(load_template(read_json_file(p), in.cat));
  std::map<TemplateId, std::vector<Source>> srcs;
  if (!sources_path.empty())
    srcs = load_sources(read_json_file(sources_path), in.cat);
  for (Template& t : tmpls) {
    TemplateId tid = t.id;
    std::vector<Source> s;
    if (auto it = srcs.find(tid); it != srcs.end()) s = it->second;
    in.reqs.push_back({std::move(t), std::move(s)});
  }
  if (!prev_path.empty()) {
    Catalog pcat;
    SystemConfiguration p = load_configuration(read_json_file(prev_path), pcat);
    in.prev = remap_configuration(p, pcat, in.cat, in.net);
  }
  return in;
}

Weights pick_weights(const SystemConfiguration& cfg, bool has_m1, double m1,
                     bool has_m2, double m2) {
  Weights w = default_weights(cfg);
  if (has_m1) w.m1 = m1;
  if (has_m2) w.m2 = m2;
  return w;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"template embedding: joint scaling, placement, and routing of "
               "service templates onto capacitated networks"};
  app.set_version_flag("--version", "tembed 1.0.0");
  app.require_subcommand(1);

  // Shared option storage.
  std::string network_path, sources_path, prev_path, out_path, sol_path;
  std::string model_path, scenario_path, csv_path, lp_dir = ".";
  std::vector<std::string> template_paths;
  std::string algo = "heuristic";
  uint64_t seed = 0;
  bool random_arcs = false;
  double m1 = 0, m2 = 0;
  OracleLimits lim;

  auto add_oracle_flags = [&lim](CLI::App* cmd) {
    cmd->add_option("--max-nodes", lim.max_nodes,
                    "oracle: refuse instances with more nodes");
    cmd->add_option("--max-components", lim.max_components,
                    "oracle: refuse instances with more components");
    cmd->add_option("--max-instances", lim.max_total_instances,
                    "oracle: cap on simultaneous instances");
    cmd->add_option("--granularity", lim.rate_granularity,
                    "oracle: rate split granularity");
    cmd->add_option("--max-states", lim.max_states,
                    "oracle: search state budget");
    cmd->add_option("--paths-per-pair", lim.paths_per_pair,
                    "oracle: delay-shortest path candidates per node pair");
  };

  CLI::App* solve = app.add_subcommand(
      "solve", "embed services onto a network and write the configuration");
  solve->add_option("--network", network_path, "network JSON")->required();
  solve->add_option("--template", template_paths, "template JSON (repeatable)")
      ->required();
  solve->add_option("--sources", sources_path, "sources JSON");
  solve->add_option("--prev", prev_path,
                    "previous configuration JSON (enables churn accounting)");
  solve->add_option("--algo", algo, "heuristic | oracle")
      ->check(CLI::IsMember({"heuristic", "oracle"}));
  solve->add_option("--seed", seed, "random seed (default 0)");
  solve->add_flag("--random-arcs", random_arcs,
                  "heuristic: pick retry arcs randomly instead of round-robin");
  auto* solve_m1 = solve->add_option("--m1", m1, "violation weight override");
  auto* solve_m2 = solve->add_option("--m2", m2, "delay/churn weight override");
  solve->add_option("--out", out_path, "output configuration JSON")->required();
  add_oracle_flags(solve);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "replay a scenario of service/source events");
  simulate->add_option("--network", network_path, "network JSON")->required();
  simulate->add_option("--scenario", scenario_path, "scenario JSON")->required();
  simulate->add_option("--algo", algo, "heuristic | oracle | export-lp")
      ->check(CLI::IsMember({"heuristic", "oracle", "export-lp"}));
  simulate->add_option("--csv", csv_path, "metrics CSV output")->required();
  simulate->add_option("--out", out_path, "final configuration JSON");
  simulate->add_option("--seed", seed, "random seed (default 0)");
  simulate->add_flag("--random-arcs", random_arcs,
                     "heuristic: random retry arcs");
  simulate->add_option("--lp-dir", lp_dir, "export-lp: LP output directory");
  add_oracle_flags(simulate);

  CLI::App* export_lp = app.add_subcommand(
      "export-lp", "write the exact model as an LP file plus meta sidecar");
  export_lp->add_option("--network", network_path, "network JSON")->required();
  export_lp
      ->add_option("--template", template_paths, "template JSON (repeatable)")
      ->required();
  export_lp->add_option("--sources", sources_path, "sources JSON");
  export_lp->add_option("--prev", prev_path, "previous configuration JSON");
  auto* exp_m1 = export_lp->add_option("--m1", m1, "violation weight override");
  auto* exp_m2 =
      export_lp->add_option("--m2", m2, "delay/churn weight override");
  export_lp->add_option("--out", out_path, "output LP path")->required();

  CLI::App* import_sol = app.add_subcommand(
      "import-sol", "turn an external solver's solution into a configuration");
  import_sol
      ->add_option("--model", model_path, "exported LP path (or its sidecar)")
      ->required();
  import_sol->add_option("--sol", sol_path, "solution file (name value lines)")
      ->required();
  import_sol->add_option("--out", out_path, "output configuration JSON");

  CLI::App* gen_red = app.add_subcommand(
      "gen-reduction", "generate an embedding instance from a set cover");
  int universe = 0, cover_k = 1;
  std::vector<std::string> set_specs;
  std::string out_dir;
  gen_red->add_option("--universe", universe, "number of elements (0-based)")
      ->required();
  gen_red
      ->add_option("--sets", set_specs,
                   "comma-separated element list, repeatable: --sets 0,2,3")
      ->required();
  gen_red->add_option("--k", cover_k, "cover size budget")->required();
  gen_red->add_option("--out", out_dir, "output directory")->required();

  CLI::App* validate = app.add_subcommand(
      "validate", "check input files and report every defect");
  validate->add_option("--network", network_path, "network JSON");
  validate->add_option("--template", template_paths,
                       "template JSON (repeatable)");
  validate->add_option("--sources", sources_path,
                       "sources JSON (needs --network and --template)");
  validate->add_option("--config", model_path, "configuration JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (solve->parsed()) {
      ProblemInputs in =
          load_problem(network_path, template_paths, sources_path, prev_path);
      SystemConfiguration cfg;
      if (algo == "heuristic") {
        SystemConfiguration start;
        if (in.prev) {
          start = *in.prev;
        } else {
          start.substrate = in.net;
        }
        cfg = embed(start, in.reqs, {seed, random_arcs});
      } else {
        cfg = brute_force_embed(in.net, in.reqs, lim).config;
      }
      Weights w =
          pick_weights(cfg, static_cast<bool>(solve_m1->count()), m1,
                       static_cast<bool>(solve_m2->count()), m2);
      ConfigurationScore sc =
          score(cfg, in.prev ? &*in.prev : nullptr, w);
      write_json_file(out_path, dump_configuration(cfg, in.cat));
      std::cout << "violations: " << sc.n_violations << "\n"
                << "objective: " << fmt(sc.objective) << "\n";
    } else if (simulate->parsed()) {
      must_exist(network_path);
      must_exist(scenario_path);
      Catalog cat;
      SubstrateNetwork net = load_network(read_json_file(network_path), cat);
      Scenario sc = load_scenario(read_json_file(scenario_path), cat);
      ScenarioOptions opts;
      opts.algo = algo;
      opts.heuristic = {seed, random_arcs};
      opts.oracle = lim;
      opts.lp_dir = lp_dir;
      opts.catalog = &cat;
      SystemConfiguration final_cfg;
      std::vector<ScenarioRecord> records =
          run_scenario(net, sc.templates, sc.events, opts, &final_cfg);
      write_metrics_csv(records, csv_path);
      if (!out_path.empty())
        write_json_file(out_path, dump_configuration(final_cfg, cat));
      std::cout << "events: " << records.size() << "\n";
      if (!records.empty())
        std::cout << "final violations: " << records.back().violations << "\n";
    } else if (export_lp->parsed()) {
      ProblemInputs in =
          load_problem(network_path, template_paths, sources_path, prev_path);
      SystemConfiguration base;
      base.substrate = in.net;
      for (const ServiceRequest& r : in.reqs)
        base.services.emplace(r.tmpl.id, Service{r.tmpl, r.sources, {}});
      Weights w = pick_weights(base, static_cast<bool>(exp_m1->count()), m1,
                               static_cast<bool>(exp_m2->count()), m2);
      MilpModel model =
          build_model(in.net, in.reqs, in.prev ? &*in.prev : nullptr, w);
      write_text_file(out_path, emit_lp(model));
      ModelInputs mi{in.net, in.reqs, in.prev, w};
      write_json_file(out_path + ".meta.json", dump_model_inputs(mi, in.cat));
      std::cout << "variables: " << model.variables.size() << "\n"
                << "constraints: " << model.constraints.size() << "\n";
    } else if (import_sol->parsed()) {
      must_exist(sol_path);
      std::string meta_path = model_path;
      if (meta_path.size() < 10 ||
          meta_path.substr(meta_path.size() - 10) != ".meta.json")
        meta_path += ".meta.json";
      must_exist(meta_path);
      Catalog cat;
      ModelInputs mi = load_model_inputs(read_json_file(meta_path), cat);
      MilpModel model = build_model(mi.network, mi.services,
                                    mi.previous ? &*mi.previous : nullptr,
                                    mi.weights);
      SystemConfiguration cfg =
          import_solution(model, read_text_file(sol_path));
      std::vector<std::string> defects = validate_configuration(cfg);
      if (!defects.empty()) {
        for (const std::string& d : defects) std::cerr << d << "\n";
        return 1;
      }
      ConfigurationScore sc =
          score(cfg, mi.previous ? &*mi.previous : nullptr, mi.weights);
      if (!out_path.empty())
        write_json_file(out_path, dump_configuration(cfg, cat));
      std::cout << "violations: " << sc.n_violations << "\n"
                << "objective: " << fmt(sc.objective) << "\n";
    } else if (gen_red->parsed()) {
      SetCoverInstance sc;
      sc.universe = universe;
      sc.k = cover_k;
      for (const std::string& spec : set_specs) {
        std::vector<int> elems;
        std::string cur;
        for (char ch : spec + ",") {
          if (ch == ',') {
            if (!cur.empty()) elems.push_back(std::stoi(cur));
            cur.clear();
          } else {
            cur += ch;
          }
        }
        sc.sets.push_back(std::move(elems));
      }
      EmbeddingInstance inst = to_embedding(sc);
      fs::create_directories(out_dir);
      Catalog cat;
      for (int i = 0; i < sc.universe; ++i)
        cat.nodes.add("s" + std::to_string(i));
      for (size_t j = 0; j < sc.sets.size(); ++j)
        cat.nodes.add("a" + std::to_string(j));
      cat.nodes.add("b");
      cat.services.add("setcover");
      NameTable& comps = cat.components[inst.tmpl.id];
      comps.add("S");
      comps.add("A");
      comps.add("B");
      write_json_file(out_dir + "/network.json",
                      dump_network(inst.network, cat));
      write_json_file(out_dir + "/template.json",
                      dump_template(inst.tmpl, cat));
      std::map<TemplateId, std::vector<Source>> srcs{{inst.tmpl.id,
                                                      inst.sources}};
      write_json_file(out_dir + "/sources.json", dump_sources(srcs, cat));
      std::cout << "nodes: " << inst.network.nodes.size() << "\n"
                << "links: " << inst.network.links.size() << "\n";
      if (sc.sets.size() <= 20)
        std::cout << "minimum cover: " << brute_force_set_cover(sc) << "\n";
    } else if (validate->parsed()) {
      if (network_path.empty() && template_paths.empty() && model_path.empty())
        throw UsageError(
            "validate needs at least one of --network, --template, --config");
      if (!sources_path.empty() &&
          (network_path.empty() || template_paths.empty()))
        throw UsageError("--sources needs --network and --template");
      std::vector<std::string> defects;
      Catalog cat;
      std::optional<SubstrateNetwork> net;
      if (!network_path.empty()) {
        must_exist(network_path);
        net = load_network(read_json_file(network_path), cat);
      }
      for (const std::string& p : template_paths) {
        must_exist(p);
        load_template(read_json_file(p), cat);
      }
      if (!sources_path.empty()) {
        must_exist(sources_path);
        load_sources(read_json_file(sources_path), cat);
      }
      if (!model_path.empty()) {
        must_exist(model_path);
        Catalog ccat;
        SystemConfiguration cfg =
            load_configuration(read_json_file(model_path), ccat);
        defects = validate_configuration(cfg);
      }
      if (!defects.empty()) {
        for (const std::string& d : defects) std::cerr << d << "\n";
        return 1;
      }
      std::cout << "OK\n";
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
