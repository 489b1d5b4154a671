#pragma once
// Set Covering <-> Template Embedding reduction.
//
// The construction maps a Set Covering question -- can at most k of the given
// sets cover the universe? -- onto an embedding instance whose optimum has
// zero capacity violations exactly when the answer is yes:
//
//   * one element node s_i per universe element (0 cpu / 0 mem), emitting
//     unit demand through a source component S;
//   * one candidate node a_j per set (0 cpu / 1 mem), the only nodes that can
//     host the relay component A (memory 1, output rate 1 regardless of
//     input) without a memory violation;
//   * a link s_i -> a_j (rate 1, delay 0) exactly when element i belongs to
//     set j, so a relay on a_j can absorb demand only from its set's
//     elements;
//   * a collector node b (1 cpu / 0 mem) fed by a link from every a_j; the
//     sink component B needs cpu 1 when its input rate stays <= k and 2 when
//     it exceeds k, so it fits (only) on b and (only) when at most k relays
//     exist.
//
// Choosing the nodes that host A is choosing a subfamily; covering every
// element and keeping B within b's capacity is exactly a cover of size <= k.
// B's step function is piecewise-linear and A's output is the constant 1, so
// the generated template is heuristic- and oracle-compatible but outside the
// exact solver's affine scope.

#include <string>
#include <vector>

#include "tembed/model.hpp"

namespace tembed {

// Decision form of Set Covering over the universe {0, ..., universe-1}.
struct SetCoverInstance {
  int universe{0};
  std::vector<std::vector<int>> sets;
  int k{1};
};

// Defects: empty universe, k < 1, out-of-range elements, uncovered elements.
// Empty when valid.
std::vector<std::string> validate_set_cover(const SetCoverInstance& sc);

struct EmbeddingInstance {
  SubstrateNetwork network;
  Template tmpl;
  std::vector<Source> sources;

  ServiceRequest request() const { return {tmpl, sources}; }
};

// Builds the instance described above. Node ids: elements first, then one
// node per set, then the collector. Link ids: membership links grouped by set
// (elements ascending), then the set -> collector links.
// Throws std::invalid_argument on an invalid instance.
EmbeddingInstance to_embedding(const SetCoverInstance& sc);

// Exact minimum cover size over all subfamilies (the union invariant
// guarantees one exists). Independent of the embedding machinery on purpose.
// Throws std::invalid_argument on an invalid instance or more than 20 sets.
int brute_force_set_cover(const SetCoverInstance& sc);

}  // namespace tembed
