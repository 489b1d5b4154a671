#pragma once
// JSON import/export. External files use string ids everywhere; these loaders
// assign dense integer ids in order of first appearance and the dumpers map
// them back. Dumped JSON is deterministic (keys sorted by nlohmann::json), so
// dump -> load -> dump is byte-identical.

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

#include "tembed/model.hpp"

namespace tembed {

// One string<->dense-int mapping.
struct NameTable {
  std::vector<std::string> names;
  std::map<std::string, int> index;

  int add(const std::string& name);           // idempotent
  int require(const std::string& name) const; // throws std::invalid_argument
  const std::string& name(int id) const { return names[static_cast<size_t>(id)]; }
  bool has(const std::string& name) const { return index.count(name) > 0; }
};

// All name tables for one problem: substrate nodes, services (= templates),
// and per-template component names.
struct Catalog {
  NameTable nodes;
  NameTable services;
  std::map<TemplateId, NameTable> components;
};

// --- network.json ---
// {"nodes":[{"id":"n1","cpu":100,"mem":100}],
//  "links":[{"src":"n1","dst":"n2","rate":100,"delay":1}]}
SubstrateNetwork load_network(const nlohmann::json& j, Catalog& cat);
nlohmann::json dump_network(const SubstrateNetwork& net, const Catalog& cat);

// --- template.json ---
// {"id":"svc","components":[{"id":"S","source":true},
//   {"id":"A","inputs":1,"outputs":1,"cpu":FN,"mem":FN,"out":[FN]}],
//  "arcs":[{"from":"S","output":0,"to":"A","input":0}]}
// FN = {"constant":c,"coefficients":[..],"pieces":[null|[[x,y],..],..]}
Template load_template(const nlohmann::json& j, Catalog& cat);
nlohmann::json dump_template(const Template& t, const Catalog& cat);

// --- sources.json ---
// [{"service":"svc","node":"n1","component":"S","rate":5}]
std::map<TemplateId, std::vector<Source>> load_sources(const nlohmann::json& j,
                                                       const Catalog& cat);
nlohmann::json dump_sources(const std::map<TemplateId, std::vector<Source>>& src,
                            const Catalog& cat);

// --- configuration.json ---
// Self-contained: embeds the network and every service's template, sources,
// and overlay. Loading rebuilds the catalog from scratch.
SystemConfiguration load_configuration(const nlohmann::json& j, Catalog& cat);
nlohmann::json dump_configuration(const SystemConfiguration& cfg, const Catalog& cat);

// --- model-input bundles ---
// Everything needed to rebuild an exact-solver model: substrate, service
// requests, the reference placements (what churn is measured against), and
// the objective weights. Written next to exported LP files so a solution can
// be imported later without re-supplying the original inputs.
struct ModelInputs {
  SubstrateNetwork network;
  std::vector<ServiceRequest> services;
  // Reference placements as a minimal configuration (instances only, no
  // rates or edges): that is the only part of the previous state the exact
  // model consumes. Empty optional when there is no reference.
  std::optional<SystemConfiguration> previous;
  Weights weights;
};

// {"network":..., "services":[{"template":..., "sources":[...]}],
//  "previous":[{"service":..., "placements":[{"component":..., "node":...}]}],
//  "weights":{"m1":..., "m2":...}}
// `previous` entries must name services present in `services`; dumping
// silently drops reference services outside that set (they cannot affect the
// model). Loading resets the catalog.
nlohmann::json dump_model_inputs(const ModelInputs& mi, const Catalog& cat);
ModelInputs load_model_inputs(const nlohmann::json& j, Catalog& cat);

// --- file helpers ---
// Throw std::runtime_error with the path in the message.
nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace tembed
