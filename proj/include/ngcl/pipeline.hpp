#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ngcl/config.hpp"
#include "ngcl/contrastive.hpp"
#include "ngcl/error.hpp"
#include "ngcl/evaluation.hpp"
#include "ngcl/graph.hpp"

namespace ngcl {

// Clip -> window -> label -> multiband DTF graph -> node features, for one recording.
std::vector<BrainGraph> graphs_from_recording(const Recording& rec, const PipelineConfig& cfg);

struct FileFailure {
  std::filesystem::path path;
  std::string message;
  ErrorKind kind = ErrorKind::kData;
};

struct BuildResult {
  std::vector<BrainGraph> graphs;
  std::vector<FileFailure> failures;
};

// Per-file errors are logged and collected; remaining files are still processed.
BuildResult build_graphs(std::span<const std::filesystem::path> recordings, const PipelineConfig& cfg);

// `epoch,batch,l_graph,l_info,l_total`
void write_loss_trace(const std::filesystem::path& path, std::span<const LossRecord> trace);
// `fold,fpr,tpr`
void write_roc(const std::filesystem::path& path, std::span<const FoldReport> folds);
// `fold,graph,label,layer,head,src,dst,weight`, nonzero weights only; src -> dst attends.
void write_attention(const std::filesystem::path& path, std::span<const std::vector<GraphOutput>> per_fold);
// `fold,graph,label,probability,e0,e1,...`
void write_embeddings(const std::filesystem::path& path, std::span<const std::vector<GraphOutput>> per_fold);

}  // namespace ngcl
