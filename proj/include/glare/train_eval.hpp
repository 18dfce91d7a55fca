#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "glare/model.hpp"

namespace glare {

struct TrainConfig {
    int epochs = 200;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    int batch_size = 32;
    std::uint64_t seed = 0;
    int eval_every = 1;
    int early_stop_patience = 0;  // 0 disables early stopping

    void validate() const;
};

/// A dataset after the feature pipeline: normalized landmarks, PCA-reduced
/// appearance, joint features, and the per-sample graph plan.
struct PreparedSample {
    std::string id;
    int label = 0;
    Matrix features;
    GraphPlan plan;
};

struct Prepared {
    std::vector<PreparedSample> samples;  // index-aligned with the dataset
    IndexList train;
    IndexList val;
    IndexList test;
    int n_classes = 0;
    std::vector<std::string> class_names;
    std::optional<PcaModel> pca;
    std::uint64_t kmeans_seed = 0;
};

/// Runs the feature pipeline over every sample. When `pca_preset` is null a
/// PCA model is fitted on the training split; otherwise the preset (e.g.
/// from a checkpoint) is applied.
Prepared prepare_dataset(const Dataset& dataset, const GlareConfig& config,
                         std::uint64_t kmeans_seed, const PcaModel* pca_preset = nullptr);

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_acc = std::numeric_limits<double>::quiet_NaN();  // NaN when not evaluated
};

struct TrainResult {
    ModelParams params;  // weights from the best-validation epoch
    std::vector<EpochStats> history;
    int best_epoch = -1;
    double best_val_acc = 0.0;
    std::optional<PcaModel> pca;
    std::uint64_t kmeans_seed = 0;
};

/// Minimizes mean cross-entropy over the train split with Adam. Deterministic
/// for a fixed seed: shuffle order, initialization, k-means, and all gradient
/// reductions are seeded and ordered.
TrainResult train(const Dataset& dataset, const GlareConfig& gcfg, const TrainConfig& tcfg);

struct Metrics {
    double accuracy = 0.0;
    double mean_loss = 0.0;
    std::vector<double> per_class_accuracy;   // recall; NaN when class absent
    std::vector<double> per_class_precision;  // NaN when never predicted
    Eigen::MatrixXi confusion;                // rows true, cols predicted
    double per_batch_ms = 0.0;                // median over batches
    std::vector<int> per_sample_correct;      // split order
    std::uint64_t seed = 0;
};

Metrics evaluate(const Prepared& prep, const ModelParams& params, const GlareConfig& gcfg,
                 const IndexList& split, int batch_size);

/// Median wall-clock per batch of forward passes over `split`, model stages
/// only (graph construction excluded).
double time_per_batch_ms(const Prepared& prep, const ModelParams& params,
                         const GlareConfig& gcfg, const IndexList& split, int batch_size,
                         int passes = 3);

struct AblationRow {
    std::string setting;
    double mean_acc = 0.0;
    double std_acc = 0.0;
    double mean_time_ms = 0.0;
    long messages_per_sample = -1;  // phi evaluations across both stacks; -1 = not reported
    int runs = 0;
};

struct AblationReport {
    std::vector<AblationRow> rows;
};

/// Region-count sweep: trains per (k, seed), reports mean/std test accuracy
/// and per-batch time per k. Infeasible k values are skipped with a warning.
AblationReport ablate_regions(const Dataset& dataset, const std::vector<int>& k_list,
                              const std::vector<std::uint64_t>& seeds, const GlareConfig& gcfg,
                              const TrainConfig& tcfg);

/// Feature-mode sweep over {joint, position, appearance}.
AblationReport ablate_features(const Dataset& dataset, const std::vector<FeatureMode>& modes,
                               const std::vector<std::uint64_t>& seeds, const GlareConfig& gcfg,
                               const TrainConfig& tcfg);

/// Quotient on/off comparison, including phi-evaluation counts per sample.
AblationReport ablate_quotient(const Dataset& dataset, const std::vector<std::uint64_t>& seeds,
                               const GlareConfig& gcfg, const TrainConfig& tcfg);

struct PairedTTest {
    double t = 0.0;
    double p_two_sided = 1.0;
    int df = 0;
};

/// Paired t-test over per-sample correctness vectors of two runs.
PairedTTest paired_ttest(const std::vector<int>& correct_a, const std::vector<int>& correct_b);

// Report serialization.
void write_history_jsonl(const std::vector<EpochStats>& history, const std::string& path);
std::string metrics_to_json(const Metrics& m, const std::vector<std::string>& class_names);
std::string render_metrics_table(const Metrics& m, const std::vector<std::string>& class_names);
void write_confusion_csv(const Metrics& m, const std::vector<std::string>& class_names,
                         const std::string& path);
std::string ablation_to_jsonl(const AblationReport& report);
std::string render_ablation_table(const AblationReport& report);

}  // namespace glare
