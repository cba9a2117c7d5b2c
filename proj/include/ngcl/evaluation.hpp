#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ngcl/contrastive.hpp"
#include "ngcl/gat.hpp"
#include "ngcl/graph.hpp"

namespace ngcl {

struct ConfusionCounts {
  int tp = 0;
  int fp = 0;
  int tn = 0;
  int fn = 0;
  int total() const { return tp + fp + tn + fn; }
};

// nullopt marks a 0/0 ratio.
struct Metrics {
  std::optional<double> acc, sen, spe, ppv, npv;
};

struct ConfusionResult {
  ConfusionCounts counts;
  Metrics metrics;
};

// Predicted positive iff score >= threshold.
ConfusionResult confusion_metrics(std::span<const double> scores, std::span<const int> labels,
                                  double threshold = 0.5);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) .. (1,1)
  double auc = 0.0;
};

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

// Stratified folds: each class shuffled and dealt round-robin, continuing the deal
// position across classes.
std::vector<std::vector<int>> kfold_split(int n_items, std::span<const int> labels, int k, std::uint64_t seed);

struct FoldReport {
  int fold = 0;
  ConfusionCounts counts;
  Metrics metrics;
  std::vector<RocPoint> roc;
  std::optional<double> auc;
};

struct Summary {
  std::optional<double> mean;
  std::optional<double> sd;  // sample SD, needs >= 2 defined values
  int defined = 0;
};

struct Aggregate {
  Summary acc, sen, spe, ppv, npv, auc;
};

Summary summarize(std::span<const std::optional<double>> values);
Aggregate aggregate_folds(std::span<const FoldReport> folds);

struct TrainingSetup {
  PretrainConfig pretrain;
  AugmentationPolicy policy;
  GatConfig gat;
  FinetuneConfig finetune;
  bool use_pretraining = true;
  double threshold = 0.5;
};

struct TrainedModel {
  EncoderParams encoder;
  GatParams gat;
  std::vector<LossRecord> pretrain_trace;
  std::vector<double> finetune_loss;
};

// Pretrains (or randomly initializes) the encoder, then fine-tunes the classifier.
TrainedModel train_model(std::span<const BrainGraph> graphs, const TrainingSetup& setup, std::uint64_t seed);

struct GraphOutput {
  int index = 0;  // position in the evaluated set
  int label = 0;
  double probability = 0.0;
  RowVector graph_embedding;
  AttentionMap attention;
};

struct EvaluationOutput {
  FoldReport report;
  std::vector<GraphOutput> graphs;
};

EvaluationOutput evaluate_model(std::span<const BrainGraph> graphs, const EncoderParams& enc, const GatParams& gat,
                                double threshold = 0.5, bool keep_details = true);

struct CrossValidationResult {
  std::vector<FoldReport> folds;
  Aggregate aggregate;
  std::vector<std::vector<GraphOutput>> outputs;  // per fold; indices refer to the full dataset
};

CrossValidationResult cross_validate(std::span<const BrainGraph> graphs, const TrainingSetup& setup, int k,
                                     std::uint64_t seed, bool keep_details = false);

// Fold report document: `fold,tp,fp,tn,fn,acc,sen,spe,ppv,npv,auc` rows, then `mean` and `sd` rows;
// undefined values written as NA.
void write_fold_report(const std::filesystem::path& path, std::span<const FoldReport> folds, const Aggregate& agg);

struct FoldReportDocument {
  std::vector<FoldReport> folds;
  Aggregate aggregate;
};

FoldReportDocument read_fold_report(const std::filesystem::path& path);

// Human-readable table: one row per fold plus a mean +/- SD row, percentages.
std::string render_report_table(const FoldReportDocument& doc);

}  // namespace ngcl
