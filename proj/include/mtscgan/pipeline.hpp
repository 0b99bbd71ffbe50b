#pragma once

// Training loop with FID-monitored early stopping, generation/evaluation
// commands, the alpha sweep, the augmentation study, and the noise ramp.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtscgan/cgan.hpp"
#include "mtscgan/checkpoint.hpp"
#include "mtscgan/data.hpp"
#include "mtscgan/evaluation.hpp"

namespace mtscgan::pipe {

enum class Task { Categorical, Series };

Task task_from_string(const std::string& s);
std::string to_string(Task t);

struct TrainConfig {
    cgan::LossConfig loss;
    cgan::GenConfig gen;
    cgan::DiscConfig disc;
    eval::FcnConfig fcn;       // monitoring extractor
    std::size_t fcn_epochs = 10;
    std::size_t epochs = 200;
    std::size_t batch = 32;
    double lr_g = 2e-4;
    double lr_d = 2e-4;
    std::uint64_t seed = 0;
    std::size_t fid_every = 10;
    std::size_t patience = 5;
    Task task = Task::Categorical;
    std::vector<std::size_t> cond_channels;    // Series task only
    std::vector<std::size_t> target_channels;
    data::SplitSpec split;

    void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct EpochLog {
    std::size_t epoch = 0;
    double loss_d = 0.0;
    double loss_g = 0.0;
    double fid = -1.0;  // < 0 when not evaluated this epoch
    double seconds = 0.0;
};

struct TrainResult {
    ckpt::Checkpoint checkpoint;  // best-FID parameters
    std::vector<EpochLog> logs;
    double best_fid = 0.0;
    std::size_t best_epoch = 0;
};

// Splits and normalizes internally; out_dir (unless empty) receives
// checkpoint.bin and epochs.ndjson.
TrainResult train(const data::Dataset& ds, const TrainConfig& cfg,
                  const std::string& out_dir);

// A checkpoint rehydrated into usable parts.
struct LoadedModel {
    TrainConfig cfg;
    cgan::GeneratorParams gen;
    cgan::DiscriminatorParams disc;
    std::vector<double> norm_mean;    // stats the model was trained under
    std::vector<double> norm_stddev;
    std::vector<std::string> class_names;
    std::size_t channels = 0;
    std::size_t timesteps = 0;
};

LoadedModel model_from_checkpoint(const ckpt::Checkpoint& c);

// n denormalized samples of one class (categorical task)
data::Dataset generate_batch(const LoadedModel& m,
                             const std::vector<std::size_t>& class_ids,
                             std::uint64_t seed);
void generate_cmd(const LoadedModel& m, std::size_t class_id, std::size_t n,
                  std::uint64_t seed, const std::string& csv_path,
                  const std::string& sidecar_path);

// Series task: conditions [B, |cond|, T] in raw units; returns the
// denormalized generated target channels [B, |target|, T].
Tensor generate_series(const LoadedModel& m, const Tensor& conditions,
                       std::uint64_t seed);
// writes class_id -1 rows of target channels only
void generate_series_cmd(const LoadedModel& m, const data::Dataset& source,
                         std::size_t n, std::uint64_t seed,
                         const std::string& csv_path,
                         const std::string& sidecar_path);

struct EvalReport {
    std::vector<std::pair<std::string, double>> fid;  // "all" + one per class
    double mean_dtw = -1.0;  // series task only
    nlohmann::json to_json() const;
};

// Per-class and pooled MTS-FID against the test samples; writes report.json,
// pca.csv and hist.csv under out_dir unless it is empty.
EvalReport evaluate_cmd(const LoadedModel& m, const data::Dataset& test_ds,
                        eval::FcnClassifierParams& extractor,
                        std::uint64_t seed, const std::string& out_dir);

struct SweepRow {
    double alpha = 0.0;
    double fid = 0.0;
    double intra_dispersion = 0.0;
    double inter_separation = 0.0;
    std::size_t n_seeds = 0;
};

inline const std::vector<double> kDefaultAlphaGrid{0.1, 0.25, 0.75, 0.9};

std::vector<SweepRow> alpha_sweep(const data::Dataset& ds,
                                  const TrainConfig& base,
                                  const std::vector<double>& alphas,
                                  const std::vector<std::uint64_t>& seeds,
                                  const std::string& out_dir);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct AugmentRun {
    std::uint64_t seed = 0;
    std::vector<std::size_t> counts_before;
    std::vector<std::size_t> counts_after;
    std::vector<ClassMetrics> before;
    std::vector<ClassMetrics> after;
    double accuracy_before = 0.0;
    double accuracy_after = 0.0;
};

struct AugmentReport {
    std::size_t target_class = 0;
    std::vector<AugmentRun> runs;
    double minority_recall_before = 0.0;  // averaged over runs
    double minority_recall_after = 0.0;
    double accuracy_before = 0.0;
    double accuracy_after = 0.0;
    nlohmann::json to_json() const;
};

AugmentReport augment_cmd(const data::Dataset& ds, const LoadedModel& m,
                          std::size_t target_class,
                          const eval::FcnConfig& fcfg,
                          const eval::FcnTrainConfig& ftcfg,
                          const std::vector<std::uint64_t>& seeds,
                          const std::string& out_dir);

// Extractor persistence: weights, frozen batch-norm statistics, and the
// normalization stats of the data it was trained in.
ckpt::Checkpoint fcn_to_checkpoint(eval::FcnClassifierParams& p,
                                   const std::vector<double>& norm_mean,
                                   const std::vector<double>& norm_stddev);
eval::FcnClassifierParams fcn_from_checkpoint(const ckpt::Checkpoint& c,
                                              std::vector<double>* norm_mean,
                                              std::vector<double>* norm_stddev);

// MTS-FID(real, real + N(0, sigma^2)) per sigma; CSV when path non-empty.
std::vector<std::pair<double, double>> fid_ramp(
    const Tensor& real, eval::FcnClassifierParams& extractor,
    const std::vector<double>& sigmas, std::uint64_t seed,
    const std::string& out_csv);

}  // namespace mtscgan::pipe
