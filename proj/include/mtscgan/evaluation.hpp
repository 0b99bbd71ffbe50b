#pragma once

// Evaluation stack: FCN feature extractor, Frechet distance over extracted
// features, DTW, PCA, and per-channel statistical features with histograms.

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mtscgan/data.hpp"
#include "mtscgan/nn.hpp"
#include "mtscgan/rng.hpp"
#include "mtscgan/tensor.hpp"

namespace mtscgan::eval {

struct FcnConfig {
    std::size_t channels = 3;
    std::size_t n_classes = 3;
    std::array<std::size_t, 3> filters{128, 256, 128};
    std::array<std::size_t, 3> kernels{8, 5, 3};
    double bn_eps = 1e-5;
    double bn_momentum = 0.1;

    std::size_t feature_dim() const { return filters[2]; }
    void validate() const;
};

struct BnParams {
    Tensor gamma;  // [C]
    Tensor beta;   // [C]
    std::vector<double> run_mean;
    std::vector<double> run_var;
};

struct ConvBlock {
    nn::Linear conv;  // [in_channels * kernel, out_channels]
    BnParams bn;
    std::size_t kernel = 0;
};

struct FcnClassifierParams {
    FcnConfig cfg;
    std::array<ConvBlock, 3> blocks;
    nn::Linear head;  // feature_dim -> n_classes
};

FcnClassifierParams make_fcn(const FcnConfig& cfg, Rng& rng);
void visit(FcnClassifierParams& p, const std::string& prefix,
           const nn::ParamVisitor& fn);

// training=true uses batch statistics and refreshes the running ones;
// training=false applies the frozen running statistics.
Tensor fcn_features(const Tensor& x, FcnClassifierParams& p, bool training);
Tensor fcn_logits(const Tensor& x, FcnClassifierParams& p, bool training);

Tensor cross_entropy(const Tensor& logits,
                     const std::vector<std::size_t>& labels);

struct FcnTrainConfig {
    std::size_t epochs = 30;
    std::size_t batch = 32;
    double lr = 1e-3;
};

// Adam + cross-entropy; returns the epoch checkpoint with the best
// validation accuracy. Seed-deterministic.
FcnClassifierParams train_fcn(const data::Dataset& train,
                              const data::Dataset& val, const FcnConfig& cfg,
                              const FcnTrainConfig& tcfg, Rng& rng);

double fcn_accuracy(const data::Dataset& ds, FcnClassifierParams& p,
                    std::size_t batch = 64);
std::vector<std::size_t> fcn_predict(const Tensor& x, FcnClassifierParams& p);

// [B, C, T] -> [B, feature_dim] with frozen batch-norm statistics
Tensor extract_features(const Tensor& x, FcnClassifierParams& p);

struct GaussianStats {
    std::vector<double> mu;
    std::vector<double> sigma;  // row-major [d, d]
    std::size_t n = 0;

    std::size_t dim() const { return mu.size(); }
};

GaussianStats gaussian_stats(const Tensor& features);  // [n, d], n >= 2
double frechet_distance(const GaussianStats& s1, const GaussianStats& s2);
double mts_fid(const Tensor& real, const Tensor& generated,
               FcnClassifierParams& extractor);

struct DtwResult {
    double cost = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> path;
};

// Sequences as [n, d] (or [n] for scalars); Euclidean local distance.
// band < 0 means unbounded; otherwise a Sakoe-Chiba half-width on |i - j|.
DtwResult dtw(const Tensor& a, const Tensor& b, std::ptrdiff_t band = -1);

struct PcaModel {
    std::vector<double> mean;        // [d]
    std::vector<double> components;  // row-major [d, d], rows orthonormal
    std::vector<double> ratios;      // descending explained-variance ratios
};

PcaModel pca_fit(const Tensor& x);                      // [n, d], n >= 2
Tensor pca_project(const PcaModel& m, const Tensor& x, std::size_t k);

// per (sample, channel): mean, median, population std -> [B, C, 3]
Tensor stat_features(const Tensor& x);

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> counts;
};

Histogram histogram(std::span<const double> values, std::size_t bins,
                    double lo, double hi);

}  // namespace mtscgan::eval
