#include "tembed/json_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tembed {

using nlohmann::json;

int NameTable::add(const std::string& name) {
  auto it = index.find(name);
  if (it != index.end()) return it->second;
  int id = static_cast<int>(names.size());
  names.push_back(name);
  index.emplace(name, id);
  return id;
}

int NameTable::require(const std::string& name) const {
  auto it = index.find(name);
  if (it == index.end())
    throw std::invalid_argument("unknown id '" + name + "'");
  return it->second;
}

namespace {

double num(const json& j, const char* key, std::optional<double> def = {}) {
  if (!j.contains(key)) {
    if (def) return *def;
    throw std::invalid_argument(std::string("missing field '") + key + "'");
  }
  if (!j.at(key).is_number())
    throw std::invalid_argument(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::string str(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw std::invalid_argument(std::string("missing string field '") + key + "'");
  return j.at(key).get<std::string>();
}

ResourceFunction load_fn(const json& j, int n_inputs) {
  ResourceFunction f;
  f.constant = num(j, "constant", 0.0);
  f.coefficients.assign(static_cast<size_t>(n_inputs), 0.0);
  if (j.contains("coefficients")) {
    const json& c = j.at("coefficients");
    if (!c.is_array() || static_cast<int>(c.size()) != n_inputs)
      throw std::invalid_argument("coefficients must list one value per input");
    for (int k = 0; k < n_inputs; ++k)
      f.coefficients[static_cast<size_t>(k)] = c.at(static_cast<size_t>(k)).get<double>();
  }
  if (j.contains("pieces")) {
    const json& p = j.at("pieces");
    if (!p.is_array() || static_cast<int>(p.size()) != n_inputs)
      throw std::invalid_argument("pieces must list one entry per input");
    f.pieces.assign(static_cast<size_t>(n_inputs), {});
    for (int k = 0; k < n_inputs; ++k) {
      const json& pk = p.at(static_cast<size_t>(k));
      if (pk.is_null()) continue;
      for (const json& pt : pk) {
        if (!pt.is_array() || pt.size() != 2)
          throw std::invalid_argument("piece breakpoints must be [x, y] pairs");
        f.pieces[static_cast<size_t>(k)].push_back(
            {pt.at(0).get<double>(), pt.at(1).get<double>()});
      }
    }
  }
  return f;
}

json dump_fn(const ResourceFunction& f) {
  json j;
  j["constant"] = f.constant;
  j["coefficients"] = f.coefficients;
  if (!f.is_affine()) {
    json p = json::array();
    for (const auto& pts : f.pieces) {
      if (pts.empty()) {
        p.push_back(nullptr);
      } else {
        json lst = json::array();
        for (const PwPoint& pt : pts) lst.push_back({pt.x, pt.y});
        p.push_back(lst);
      }
    }
    j["pieces"] = p;
  }
  return j;
}

}  // namespace

SubstrateNetwork load_network(const json& j, Catalog& cat) {
  SubstrateNetwork net;
  if (!j.contains("nodes") || !j.at("nodes").is_array())
    throw std::invalid_argument("network: missing 'nodes' array");
  for (const json& nj : j.at("nodes")) {
    Node n;
    std::string name = str(nj, "id");
    if (cat.nodes.has(name))
      throw std::invalid_argument("network: duplicate node '" + name + "'");
    n.id = cat.nodes.add(name);
    n.cap_cpu = num(nj, "cpu");
    n.cap_mem = num(nj, "mem");
    net.nodes.push_back(n);
  }
  if (j.contains("links")) {
    for (const json& lj : j.at("links")) {
      Link l;
      l.id = static_cast<int>(net.links.size());
      l.src = cat.nodes.require(str(lj, "src"));
      l.dst = cat.nodes.require(str(lj, "dst"));
      l.max_rate = num(lj, "rate");
      l.delay = num(lj, "delay", 0.0);
      net.links.push_back(l);
    }
  }
  std::vector<std::string> defects = validate_network(net);
  if (!defects.empty())
    throw std::invalid_argument("network: " + defects.front());
  return net;
}

json dump_network(const SubstrateNetwork& net, const Catalog& cat) {
  json nodes = json::array();
  for (const Node& n : net.nodes) {
    json nj;
    nj["id"] = cat.nodes.name(n.id);
    nj["cpu"] = n.cap_cpu;
    nj["mem"] = n.cap_mem;
    nodes.push_back(nj);
  }
  json links = json::array();
  for (const Link& l : net.links) {
    json lj;
    lj["src"] = cat.nodes.name(l.src);
    lj["dst"] = cat.nodes.name(l.dst);
    lj["rate"] = l.max_rate;
    lj["delay"] = l.delay;
    links.push_back(lj);
  }
  return json{{"nodes", nodes}, {"links", links}};
}

Template load_template(const json& j, Catalog& cat) {
  Template t;
  std::string name = str(j, "id");
  if (cat.services.has(name))
    throw std::invalid_argument("template: duplicate id '" + name + "'");
  t.id = cat.services.add(name);
  NameTable& comps = cat.components[t.id];
  if (!j.contains("components") || !j.at("components").is_array())
    throw std::invalid_argument("template: missing 'components' array");
  for (const json& cj : j.at("components")) {
    Component c;
    std::string cname = str(cj, "id");
    if (comps.has(cname))
      throw std::invalid_argument("template: duplicate component '" + cname + "'");
    c.id = comps.add(cname);
    c.is_source = cj.value("source", false);
    if (c.is_source) {
      c.n_inputs = 0;
      c.n_outputs = 1;
      c.cpu_fn = ResourceFunction::zero(0);
      c.mem_fn = ResourceFunction::zero(0);
      c.out_fns = {ResourceFunction::zero(0)};
    } else {
      c.n_inputs = static_cast<int>(num(cj, "inputs", 1.0));
      c.n_outputs = static_cast<int>(num(cj, "outputs", 0.0));
      c.cpu_fn = cj.contains("cpu") ? load_fn(cj.at("cpu"), c.n_inputs)
                                    : ResourceFunction::zero(c.n_inputs);
      c.mem_fn = cj.contains("mem") ? load_fn(cj.at("mem"), c.n_inputs)
                                    : ResourceFunction::zero(c.n_inputs);
      if (c.n_outputs > 0) {
        if (!cj.contains("out") || !cj.at("out").is_array() ||
            static_cast<int>(cj.at("out").size()) != c.n_outputs)
          throw std::invalid_argument("template: component '" + cname +
                                      "' needs one 'out' function per output");
        for (const json& fj : cj.at("out"))
          c.out_fns.push_back(load_fn(fj, c.n_inputs));
      }
    }
    t.components.push_back(c);
  }
  if (j.contains("arcs")) {
    for (const json& aj : j.at("arcs")) {
      Arc a;
      a.src = comps.require(str(aj, "from"));
      a.output = static_cast<int>(num(aj, "output", 0.0));
      a.dst = comps.require(str(aj, "to"));
      a.input = static_cast<int>(num(aj, "input", 0.0));
      t.arcs.push_back(a);
    }
  }
  std::vector<std::string> defects = validate_template(t);
  if (!defects.empty())
    throw std::invalid_argument("template '" + name + "': " + defects.front());
  return t;
}

json dump_template(const Template& t, const Catalog& cat) {
  const NameTable& comps = cat.components.at(t.id);
  json cjs = json::array();
  for (const Component& c : t.components) {
    json cj;
    cj["id"] = comps.name(c.id);
    if (c.is_source) {
      cj["source"] = true;
    } else {
      cj["inputs"] = c.n_inputs;
      cj["outputs"] = c.n_outputs;
      cj["cpu"] = dump_fn(c.cpu_fn);
      cj["mem"] = dump_fn(c.mem_fn);
      json outs = json::array();
      for (const ResourceFunction& f : c.out_fns) outs.push_back(dump_fn(f));
      cj["out"] = outs;
    }
    cjs.push_back(cj);
  }
  json ajs = json::array();
  for (const Arc& a : t.arcs) {
    json aj;
    aj["from"] = comps.name(a.src);
    aj["output"] = a.output;
    aj["to"] = comps.name(a.dst);
    aj["input"] = a.input;
    ajs.push_back(aj);
  }
  return json{{"id", cat.services.name(t.id)}, {"components", cjs}, {"arcs", ajs}};
}

std::map<TemplateId, std::vector<Source>> load_sources(const json& j,
                                                       const Catalog& cat) {
  if (!j.is_array())
    throw std::invalid_argument("sources: expected a top-level array");
  std::map<TemplateId, std::vector<Source>> out;
  for (const json& sj : j) {
    TemplateId tid = cat.services.require(str(sj, "service"));
    Source s;
    s.node = cat.nodes.require(str(sj, "node"));
    s.component = cat.components.at(tid).require(str(sj, "component"));
    s.rate = num(sj, "rate");
    if (s.rate <= 0)
      throw std::invalid_argument("sources: rate must be positive");
    for (const Source& prev : out[tid])
      if (prev.node == s.node && prev.component == s.component)
        throw std::invalid_argument("sources: duplicate source for node '" +
                                    str(sj, "node") + "'");
    out[tid].push_back(s);
  }
  return out;
}

json dump_sources(const std::map<TemplateId, std::vector<Source>>& src,
                  const Catalog& cat) {
  json out = json::array();
  for (const auto& [tid, list] : src) {
    for (const Source& s : list) {
      json sj;
      sj["service"] = cat.services.name(tid);
      sj["node"] = cat.nodes.name(s.node);
      sj["component"] = cat.components.at(tid).name(s.component);
      sj["rate"] = s.rate;
      out.push_back(sj);
    }
  }
  return out;
}

SystemConfiguration load_configuration(const json& j, Catalog& cat) {
  SystemConfiguration cfg;
  cat = Catalog{};
  if (!j.contains("network"))
    throw std::invalid_argument("configuration: missing 'network'");
  cfg.substrate = load_network(j.at("network"), cat);
  if (!j.contains("services") || !j.at("services").is_array())
    throw std::invalid_argument("configuration: missing 'services' array");
  for (const json& svj : j.at("services")) {
    Service svc;
    svc.tmpl = load_template(svj.at("template"), cat);
    const NameTable& comps = cat.components.at(svc.tmpl.id);
    if (svj.contains("sources")) {
      for (const json& sj : svj.at("sources")) {
        Source s;
        s.node = cat.nodes.require(str(sj, "node"));
        s.component = comps.require(str(sj, "component"));
        s.rate = num(sj, "rate");
        svc.sources.push_back(s);
      }
    }
    const json& oj = svj.at("overlay");
    Overlay& ol = svc.overlay;
    for (const json& ij : oj.value("instances", json::array())) {
      Instance inst;
      inst.id = static_cast<int>(num(ij, "id"));
      inst.component = comps.require(str(ij, "component"));
      inst.node = cat.nodes.require(str(ij, "node"));
      inst.in_rates = ij.value("in_rates", std::vector<double>{});
      inst.out_rates = ij.value("out_rates", std::vector<double>{});
      inst.cpu_load = num(ij, "cpu", 0.0);
      inst.mem_load = num(ij, "mem", 0.0);
      ol.next_instance_id = std::max(ol.next_instance_id, inst.id + 1);
      ol.instances.push_back(inst);
    }
    for (const json& ej : oj.value("edges", json::array())) {
      OverlayEdge e;
      e.src = static_cast<int>(num(ej, "src"));
      e.src_output = static_cast<int>(num(ej, "src_output", 0.0));
      e.dst = static_cast<int>(num(ej, "dst"));
      e.dst_input = static_cast<int>(num(ej, "dst_input", 0.0));
      e.rate = num(ej, "rate");
      for (const json& rj : ej.value("routing", json::array())) {
        NodeId a = cat.nodes.require(str(rj, "src"));
        NodeId b = cat.nodes.require(str(rj, "dst"));
        LinkId l = cfg.substrate.find_link(a, b);
        if (l < 0)
          throw std::invalid_argument("configuration: routing over missing link");
        e.routing.link_rates[l] += num(rj, "rate");
      }
      ol.edges.push_back(e);
    }
    cfg.services.emplace(svc.tmpl.id, std::move(svc));
  }
  return cfg;
}

json dump_configuration(const SystemConfiguration& cfg, const Catalog& cat) {
  json out;
  out["network"] = dump_network(cfg.substrate, cat);
  json svcs = json::array();
  for (const auto& [tid, svc] : cfg.services) {
    const NameTable& comps = cat.components.at(tid);
    json svj;
    svj["template"] = dump_template(svc.tmpl, cat);
    json srcs = json::array();
    for (const Source& s : svc.sources) {
      json sj;
      sj["node"] = cat.nodes.name(s.node);
      sj["component"] = comps.name(s.component);
      sj["rate"] = s.rate;
      srcs.push_back(sj);
    }
    svj["sources"] = srcs;
    json insts = json::array();
    for (const Instance& i : svc.overlay.instances) {
      json ij;
      ij["id"] = i.id;
      ij["component"] = comps.name(i.component);
      ij["node"] = cat.nodes.name(i.node);
      ij["in_rates"] = i.in_rates;
      ij["out_rates"] = i.out_rates;
      ij["cpu"] = i.cpu_load;
      ij["mem"] = i.mem_load;
      insts.push_back(ij);
    }
    json edges = json::array();
    for (const OverlayEdge& e : svc.overlay.edges) {
      json ej;
      ej["src"] = e.src;
      ej["src_output"] = e.src_output;
      ej["dst"] = e.dst;
      ej["dst_input"] = e.dst_input;
      ej["rate"] = e.rate;
      json routing = json::array();
      for (const auto& [l, r] : e.routing.link_rates) {
        json rj;
        rj["src"] = cat.nodes.name(cfg.substrate.link(l).src);
        rj["dst"] = cat.nodes.name(cfg.substrate.link(l).dst);
        rj["rate"] = r;
        routing.push_back(rj);
      }
      ej["routing"] = routing;
      edges.push_back(ej);
    }
    svj["overlay"] = json{{"instances", insts}, {"edges", edges}};
    svcs.push_back(svj);
  }
  out["services"] = svcs;
  return out;
}

json dump_model_inputs(const ModelInputs& mi, const Catalog& cat) {
  json out;
  out["network"] = dump_network(mi.network, cat);
  json svcs = json::array();
  for (const ServiceRequest& r : mi.services) {
    const NameTable& comps = cat.components.at(r.tmpl.id);
    json sj;
    sj["template"] = dump_template(r.tmpl, cat);
    json srcs = json::array();
    for (const Source& s : r.sources) {
      json src;
      src["node"] = cat.nodes.name(s.node);
      src["component"] = comps.name(s.component);
      src["rate"] = s.rate;
      srcs.push_back(src);
    }
    sj["sources"] = srcs;
    svcs.push_back(sj);
  }
  out["services"] = svcs;
  json prev = json::array();
  if (mi.previous) {
    for (const ServiceRequest& r : mi.services) {
      auto it = mi.previous->services.find(r.tmpl.id);
      if (it == mi.previous->services.end()) continue;
      const NameTable& comps = cat.components.at(r.tmpl.id);
      json pj;
      pj["service"] = cat.services.name(r.tmpl.id);
      json pls = json::array();
      for (const Instance& i : it->second.overlay.instances) {
        json ij;
        ij["component"] = comps.name(i.component);
        ij["node"] = cat.nodes.name(i.node);
        pls.push_back(ij);
      }
      pj["placements"] = pls;
      prev.push_back(pj);
    }
  }
  out["previous"] = mi.previous ? prev : json();
  out["weights"] = json{{"m1", mi.weights.m1}, {"m2", mi.weights.m2}};
  return out;
}

ModelInputs load_model_inputs(const json& j, Catalog& cat) {
  cat = Catalog{};
  ModelInputs mi;
  if (!j.contains("network"))
    throw std::invalid_argument("model inputs: missing 'network'");
  mi.network = load_network(j.at("network"), cat);
  if (!j.contains("services") || !j.at("services").is_array())
    throw std::invalid_argument("model inputs: missing 'services' array");
  for (const json& sj : j.at("services")) {
    ServiceRequest r;
    r.tmpl = load_template(sj.at("template"), cat);
    const NameTable& comps = cat.components.at(r.tmpl.id);
    for (const json& src : sj.value("sources", json::array())) {
      Source s;
      s.node = cat.nodes.require(str(src, "node"));
      s.component = comps.require(str(src, "component"));
      s.rate = num(src, "rate");
      if (s.rate <= 0)
        throw std::invalid_argument("model inputs: source rate must be positive");
      r.sources.push_back(s);
    }
    mi.services.push_back(std::move(r));
  }
  if (j.contains("previous") && !j.at("previous").is_null()) {
    SystemConfiguration prev;
    prev.substrate = mi.network;
    for (const json& pj : j.at("previous")) {
      TemplateId tid = cat.services.require(str(pj, "service"));
      const ServiceRequest* req = nullptr;
      for (const ServiceRequest& r : mi.services)
        if (r.tmpl.id == tid) req = &r;
      if (!req)
        throw std::invalid_argument(
            "model inputs: previous placement for unknown service");
      Service svc;
      svc.tmpl = req->tmpl;
      const NameTable& comps = cat.components.at(tid);
      for (const json& ij : pj.value("placements", json::array())) {
        Instance inst;
        inst.id = svc.overlay.next_instance_id++;
        inst.component = comps.require(str(ij, "component"));
        inst.node = cat.nodes.require(str(ij, "node"));
        const Component& c =
            svc.tmpl.components[static_cast<size_t>(inst.component)];
        inst.in_rates.assign(static_cast<size_t>(c.n_inputs), 0.0);
        inst.out_rates.assign(static_cast<size_t>(c.n_outputs), 0.0);
        svc.overlay.instances.push_back(std::move(inst));
      }
      prev.services.emplace(tid, std::move(svc));
    }
    mi.previous = std::move(prev);
  }
  if (!j.contains("weights"))
    throw std::invalid_argument("model inputs: missing 'weights'");
  mi.weights.m1 = num(j.at("weights"), "m1");
  mi.weights.m2 = num(j.at("weights"), "m2");
  return mi;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

}  // namespace tembed
