#pragma once

// Dataset ingestion (CSV + JSON sidecar), z-score normalization from the
// training split, stratified splits, condition construction for the
// categorical and series tasks, and a synthetic class-conditional generator.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtscgan/rng.hpp"
#include "mtscgan/tensor.hpp"

namespace mtscgan::data {

struct Sample {
    std::vector<double> values;  // channel-major [channels * timesteps]
    std::size_t class_id = 0;
};

// Immutable after construction; safe for concurrent reads.
struct Dataset {
    std::vector<Sample> samples;
    std::vector<std::string> class_names;
    std::size_t channels = 0;
    std::size_t timesteps = 0;
    bool normalized = false;
    std::vector<double> mean;    // per channel, from the normalizing split
    std::vector<double> stddev;

    std::size_t size() const { return samples.size(); }
    std::size_t n_classes() const { return class_names.size(); }
    std::vector<std::size_t> class_counts() const;
    void validate() const;
};

Dataset load_csv(const std::string& csv_path, const std::string& sidecar_path);
void save_csv(const Dataset& ds, const std::string& csv_path,
              const std::string& sidecar_path);

struct SplitSpec {
    double train = 0.7;
    double val = 0.15;
    double test = 0.15;
    std::uint64_t seed = 0;
    bool stratified = true;

    void validate() const;
};

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

Split make_split(const Dataset& ds, const SplitSpec& spec);

// Per-channel z-score with statistics taken from `stats_indices` only
// (population divisor). The result carries the stats for the inverse.
Dataset normalize(const Dataset& ds,
                  const std::vector<std::size_t>& stats_indices);
Dataset denormalize(const Dataset& ds);

// [B, channels, timesteps] for the given sample indices
Tensor batch_tensor(const Dataset& ds, std::span<const std::size_t> indices);

std::vector<double> make_condition_categorical(std::size_t class_id,
                                               std::size_t n_classes);

// Splits one sample into (condition sub-series, target sub-series), each
// channel-major [len(ids), timesteps].
std::pair<Tensor, Tensor> make_condition_series(
    const Dataset& ds, std::size_t sample_index,
    const std::vector<std::size_t>& cond_channels,
    const std::vector<std::size_t>& target_channels);

struct ClassSpec {
    double base_freq = 2.0;            // cycles per window
    std::vector<double> harmonics{1.0};  // amplitude of k-th multiple
    double noise_std = 0.1;
};

struct SyntheticSpec {
    std::vector<ClassSpec> classes;
    std::size_t channels = 3;
    std::size_t timesteps = 150;
    std::size_t per_class = 300;
    std::uint64_t seed = 0;
    double warp_low = 0.9;   // per-sample time-warp factor range
    double warp_high = 1.1;

    void validate() const;
};

SyntheticSpec default_synthetic();
Dataset generate_synthetic(const SyntheticSpec& spec);

// Naive DFT argmax over bins 1..n/2; the oracle separating synthetic classes.
std::size_t dominant_frequency(std::span<const double> x);

}  // namespace mtscgan::data
