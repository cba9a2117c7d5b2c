#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ngcl/config.hpp"
#include "ngcl/graph.hpp"

namespace ngcl {

// Text format:
//   ngcl-graphs 1
//   nodes <N>
//   features <F> <name...>
//   graphs <count>
//   graph <label> <n_edges>
//   <src> <dst> <weight>        (n_edges lines; edge src -> dst, i.e. adjacency(dst, src))
//   <N feature rows>
// Doubles are written in shortest round-trip form.
void save_dataset(const std::filesystem::path& path, std::span<const BrainGraph> graphs);
std::vector<BrainGraph> load_dataset(const std::filesystem::path& path);

// Two-class synthetic graphs. Interictal: strong edges into a fixed SOZ subset, sparse
// background. Ictal: dense edges across every ordered pair. Each off-diagonal entry is then
// flipped (present <-> absent) with probability `noise`. SOZ nodes carry elevated spike and
// HFO features. Graphs alternate interictal, ictal.
std::vector<BrainGraph> synth_graph_dataset(const SynthSpec& spec);

// The SOZ node set synth_graph_dataset uses for a given spec, ascending.
std::vector<int> synth_soz_nodes(const SynthSpec& spec);

}  // namespace ngcl
