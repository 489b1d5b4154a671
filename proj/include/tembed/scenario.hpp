#pragma once
// Event-driven experiment harness: apply a script of service/demand events to
// a substrate, re-embed after every event, and record how the allocation
// tracks the demand over time.

#include <cstdint>
#include <string>
#include <vector>

#include "tembed/heuristic.hpp"
#include "tembed/json_io.hpp"
#include "tembed/model.hpp"
#include "tembed/oracle.hpp"

namespace tembed {

enum class EventKind {
  kServiceAdd,        // bind a declared template with initial sources
  kServiceRemove,     // drop a bound service and its overlay
  kSourceAdd,         // bind one more source to a bound service
  kSourceRemove,      // unbind an existing source
  kSourceRateChange,  // change an existing source's rate (new rate > 0)
};

// "service-add", "service-remove", "source-add", "source-remove",
// "source-rate-change".
std::string to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

struct Event {
  EventKind kind{EventKind::kServiceAdd};
  TemplateId tmpl{-1};
  std::vector<Source> sources;  // service-add: the initial demand bindings
  Source source;                // source-*: the source acted on (rate unused
                                // by source-remove)
};

struct ScenarioRecord {
  int event_index{0};
  EventKind kind{EventKind::kServiceAdd};
  double demand{0};         // total bound source rate after the event
  double allocated_cpu{0};  // sum of instance cpu loads
  double total_latency{0};  // sum of d(l) over used (edge, link) pairs
  int instances{0};
  int churn{0};             // placement changes vs. the previous configuration
  int violations{0};
  double runtime_ms{0};     // wall-clock solve (or export) time
};

struct ScenarioOptions {
  std::string algo{"heuristic"};  // heuristic | oracle | export-lp
  HeuristicParams heuristic{};
  OracleLimits oracle{};
  // export-lp: one event_<i>.lp (+ .meta.json) per event goes here; nothing
  // is solved, so the carried configuration stays empty and the records show
  // zeros for the solution-derived columns.
  std::string lp_dir{"."};
  // Naming for exported files; nullptr derives names from the integer ids.
  const Catalog* catalog{nullptr};
};

// Applies the events in order against a carried-forward configuration:
// event -> updated demand -> re-embed -> one record (churn and violations
// measured on the new configuration, churn against the previous one).
// Invalid events (unknown templates/services, duplicate or missing sources,
// non-positive rates) throw std::runtime_error naming the event index.
// `final_config`, when given, receives the configuration after the last
// event.
std::vector<ScenarioRecord> run_scenario(
    const SubstrateNetwork& substrate, const std::vector<Template>& templates,
    const std::vector<Event>& events, const ScenarioOptions& opts = {},
    SystemConfiguration* final_config = nullptr);

// Connected random substrate: a random spanning tree plus extra random pairs,
// every undirected edge materialized as two reciprocal directed links that
// share rate and delay. Sizes: ~n_nodes*avg_degree/2 undirected edges (never
// fewer than the n-1 tree edges). Draws: cpu, mem ~ U{50..200},
// rate ~ U{20..100}, delay ~ U{1..10}. Deterministic per seed; identical
// across platforms (modular draws from mt19937_64, no distribution objects).
// Throws std::invalid_argument when n_nodes < 2.
SubstrateNetwork generate_substrate(int n_nodes, double avg_degree,
                                    uint64_t seed);

// CSV: header
//   event,kind,demand,allocated_cpu,total_latency,instances,churn,violations,runtime_ms
// plus one row per record. Doubles are printed with round-trip precision.
// Throws std::runtime_error on I/O failure.
void write_metrics_csv(const std::vector<ScenarioRecord>& records,
                       const std::string& path);

// Reference service for examples and experiments: a video delivery chain
//   origin (source) -> streamer -> dpi -> optimizer -> cache
// with affine loads per unit of input rate:
//   streamer:  cpu 1 + 0.8x, mem 2 + 0.1x, out = x
//   dpi:       cpu 2 + 1.2x, mem 1 + 0.2x, out = x
//   optimizer: cpu 3 + 1.5x, mem 2 + 0.3x, out = 0.7x  (compression)
//   cache:     cpu 1 + 0.4x, mem 4 + 0.5x, sink
Template video_cdn_template(TemplateId id = 0);

// --- scenario.json ---
// {"templates":[<template.json objects>],
//  "events":[{"kind":"service-add","service":"svc","sources":[
//               {"component":"S","node":"n1","rate":4}]},
//            {"kind":"source-rate-change","service":"svc",
//             "source":{"component":"S","node":"n1","rate":6}}, ...]}
// Node names resolve against a catalog already holding the substrate (load
// the network first with the same catalog).
struct Scenario {
  std::vector<Template> templates;
  std::vector<Event> events;
};

Scenario load_scenario(const nlohmann::json& j, Catalog& cat);

}  // namespace tembed
