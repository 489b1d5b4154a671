#include "tembed/reduction.hpp"

#include <bit>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>

namespace tembed {

std::vector<std::string> validate_set_cover(const SetCoverInstance& sc) {
  std::vector<std::string> out;
  if (sc.universe < 1) {
    out.push_back("universe must contain at least one element");
    return out;
  }
  if (sc.k < 1) out.push_back("k must be at least 1");
  std::vector<char> covered(static_cast<size_t>(sc.universe), 0);
  for (size_t j = 0; j < sc.sets.size(); ++j)
    for (int e : sc.sets[j]) {
      if (e < 0 || e >= sc.universe)
        out.push_back("set " + std::to_string(j) + ": element " +
                      std::to_string(e) + " outside the universe");
      else
        covered[static_cast<size_t>(e)] = 1;
    }
  for (int i = 0; i < sc.universe; ++i)
    if (!covered[static_cast<size_t>(i)])
      out.push_back("element " + std::to_string(i) +
                    " is not covered by any set");
  return out;
}

namespace {

void check(const SetCoverInstance& sc) {
  auto errs = validate_set_cover(sc);
  if (!errs.empty())
    throw std::invalid_argument("invalid set cover instance: " + errs.front());
}

}  // namespace

EmbeddingInstance to_embedding(const SetCoverInstance& sc) {
  check(sc);
  const int nu = sc.universe;
  const int nw = static_cast<int>(sc.sets.size());
  const NodeId collector = nu + nw;

  EmbeddingInstance out;
  for (int i = 0; i < nu; ++i) out.network.nodes.push_back({i, 0.0, 0.0});
  for (int j = 0; j < nw; ++j) out.network.nodes.push_back({nu + j, 0.0, 1.0});
  out.network.nodes.push_back({collector, 1.0, 0.0});

  LinkId next = 0;
  for (int j = 0; j < nw; ++j) {
    std::set<int> members(sc.sets[static_cast<size_t>(j)].begin(),
                          sc.sets[static_cast<size_t>(j)].end());
    for (int i : members)
      out.network.links.push_back({next++, i, nu + j, 1.0, 0.0});
  }
  for (int j = 0; j < nw; ++j)
    out.network.links.push_back({next++, nu + j, collector, 1.0, 0.0});

  out.tmpl.id = 0;
  Component src;
  src.id = 0;
  src.is_source = true;
  src.n_outputs = 1;
  src.cpu_fn = ResourceFunction::zero(0);
  src.mem_fn = ResourceFunction::zero(0);
  src.out_fns = {ResourceFunction::zero(0)};

  Component relay;
  relay.id = 1;
  relay.n_inputs = 1;
  relay.n_outputs = 1;
  relay.cpu_fn = ResourceFunction::zero(1);
  relay.mem_fn = ResourceFunction::affine(1.0, {0.0});
  relay.out_fns = {ResourceFunction::affine(1.0, {0.0})};

  Component sink;
  sink.id = 2;
  sink.n_inputs = 1;
  sink.n_outputs = 0;
  ResourceFunction step;
  step.constant = 0.0;
  step.coefficients = {0.0};
  step.pieces = {{{0.0, 1.0},
                  {static_cast<double>(sc.k), 1.0},
                  {static_cast<double>(sc.k), 2.0}}};
  sink.cpu_fn = step;
  sink.mem_fn = ResourceFunction::zero(1);

  out.tmpl.components = {src, relay, sink};
  out.tmpl.arcs = {{0, 0, 1, 0}, {1, 0, 2, 0}};

  for (int i = 0; i < nu; ++i) out.sources.push_back({i, 0, 1.0});
  return out;
}

int brute_force_set_cover(const SetCoverInstance& sc) {
  check(sc);
  const int m = static_cast<int>(sc.sets.size());
  if (m > 20)
    throw std::invalid_argument("brute_force_set_cover handles at most 20 sets, got " +
                                std::to_string(m));
  const int words = (sc.universe + 63) / 64;
  std::vector<std::vector<uint64_t>> mask(
      static_cast<size_t>(m), std::vector<uint64_t>(static_cast<size_t>(words), 0));
  for (int j = 0; j < m; ++j)
    for (int e : sc.sets[static_cast<size_t>(j)])
      mask[static_cast<size_t>(j)][static_cast<size_t>(e / 64)] |=
          uint64_t{1} << (e % 64);
  std::vector<uint64_t> full(static_cast<size_t>(words), 0);
  for (int i = 0; i < sc.universe; ++i)
    full[static_cast<size_t>(i / 64)] |= uint64_t{1} << (i % 64);

  int best = m;  // the whole family covers, by the union invariant
  std::vector<uint64_t> acc(static_cast<size_t>(words));
  for (uint32_t pick = 1; pick < (uint32_t{1} << m); ++pick) {
    int size = std::popcount(pick);
    if (size >= best) continue;
    acc.assign(static_cast<size_t>(words), 0);
    for (int j = 0; j < m; ++j)
      if (pick & (uint32_t{1} << j))
        for (int w = 0; w < words; ++w)
          acc[static_cast<size_t>(w)] |= mask[static_cast<size_t>(j)][static_cast<size_t>(w)];
    if (acc == full) best = size;
  }
  return best;
}

}  // namespace tembed
