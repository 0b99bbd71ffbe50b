#include "mtscgan/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mtscgan::data {

using nlohmann::json;

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(n_classes(), 0);
    for (const auto& s : samples) ++counts[s.class_id];
    return counts;
}

void Dataset::validate() const {
    if (channels == 0 || timesteps == 0)
        throw TensorError("dataset: zero channels or timesteps");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].values.size() != channels * timesteps)
            throw TensorError("dataset: sample " + std::to_string(i) +
                              " has wrong value count");
        if (samples[i].class_id >= n_classes())
            throw TensorError("dataset: sample " + std::to_string(i) +
                              " has out-of-range class id");
    }
}

namespace {

double parse_cell(const std::string& cell, std::size_t row) {
    double out = 0.0;
    const char* b = cell.data();
    const char* e = b + cell.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    auto [p, ec] = std::from_chars(b, e, out);
    while (p < e && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (ec != std::errc() || p != e)
        throw TensorError("csv: non-numeric cell '" + cell + "' in row " +
                          std::to_string(row));
    return out;
}

json read_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TensorError("sidecar: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw TensorError("sidecar: " + path + ": " + e.what());
    }
    for (const char* key : {"channels", "timesteps", "class_names"})
        if (!j.contains(key))
            throw TensorError(std::string("sidecar: missing field '") + key +
                              "' in " + path);
    return j;
}

}  // namespace

Dataset load_csv(const std::string& csv_path, const std::string& sidecar_path) {
    const json meta = read_sidecar(sidecar_path);
    Dataset ds;
    ds.channels = meta.at("channels").get<std::size_t>();
    ds.timesteps = meta.at("timesteps").get<std::size_t>();
    const auto all_names = meta.at("class_names").get<std::vector<std::string>>();

    // optional class filter; ids in the file index all_names, kept samples
    // are remapped onto the keep list's order
    std::vector<std::string> keep = all_names;
    if (meta.contains("keep_classes"))
        keep = meta.at("keep_classes").get<std::vector<std::string>>();
    std::vector<std::ptrdiff_t> remap(all_names.size(), -1);
    for (std::size_t k = 0; k < keep.size(); ++k) {
        auto it = std::find(all_names.begin(), all_names.end(), keep[k]);
        if (it == all_names.end())
            throw TensorError("sidecar: keep_classes entry '" + keep[k] +
                              "' not in class_names");
        remap[static_cast<std::size_t>(it - all_names.begin())] =
            static_cast<std::ptrdiff_t>(k);
    }
    ds.class_names = keep;

    std::ifstream in(csv_path);
    if (!in) throw TensorError("csv: cannot open " + csv_path);
    const std::size_t arity = 1 + ds.channels * ds.timesteps;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cells.size() != arity)
            throw TensorError("csv: row " + std::to_string(row) + " has " +
                              std::to_string(cells.size()) +
                              " fields, expected " + std::to_string(arity));
        const double idv = parse_cell(cells[0], row);
        if (idv < 0 || idv != std::floor(idv) ||
            idv >= static_cast<double>(all_names.size()))
            throw TensorError("csv: row " + std::to_string(row) +
                              " has unknown class id " + cells[0]);
        const auto mapped = remap[static_cast<std::size_t>(idv)];
        if (mapped < 0) continue;  // filtered out
        Sample s;
        s.class_id = static_cast<std::size_t>(mapped);
        s.values.reserve(arity - 1);
        for (std::size_t i = 1; i < arity; ++i)
            s.values.push_back(parse_cell(cells[i], row));
        ds.samples.push_back(std::move(s));
    }
    if (row == 0) throw TensorError("csv: " + csv_path + " is empty");
    if (meta.contains("normalized") && meta.at("normalized").get<bool>()) {
        ds.normalized = true;
        ds.mean = meta.at("mean").get<std::vector<double>>();
        ds.stddev = meta.at("stddev").get<std::vector<double>>();
    }
    ds.validate();
    return ds;
}

void save_csv(const Dataset& ds, const std::string& csv_path,
              const std::string& sidecar_path) {
    ds.validate();
    std::ofstream out(csv_path);
    if (!out) throw TensorError("csv: cannot write " + csv_path);
    char buf[40];
    for (const auto& s : ds.samples) {
        out << s.class_id;
        for (double v : s.values) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
    json meta;
    meta["channels"] = ds.channels;
    meta["timesteps"] = ds.timesteps;
    meta["class_names"] = ds.class_names;
    if (ds.normalized) {
        meta["normalized"] = true;
        meta["mean"] = ds.mean;
        meta["stddev"] = ds.stddev;
    }
    std::ofstream side(sidecar_path);
    if (!side) throw TensorError("sidecar: cannot write " + sidecar_path);
    side << meta.dump(2) << '\n';
}

void SplitSpec::validate() const {
    if (!(train > 0.0 && val > 0.0 && test > 0.0))
        throw TensorError("split: fractions must be positive");
    if (std::abs(train + val + test - 1.0) > 1e-9)
        throw TensorError("split: fractions must sum to 1");
}

namespace {

void split_indices(std::vector<std::size_t>& pool, const SplitSpec& spec,
                   Rng& rng, Split& out) {
    rng.shuffle(pool);
    const std::size_t n = pool.size();
    if (n < 3)
        throw TensorError("split: group of " + std::to_string(n) +
                          " samples cannot cover 3 splits");
    std::size_t n_val = static_cast<std::size_t>(
        std::floor(spec.val * static_cast<double>(n)));
    std::size_t n_test = static_cast<std::size_t>(
        std::floor(spec.test * static_cast<double>(n)));
    n_val = std::max<std::size_t>(n_val, 1);
    n_test = std::max<std::size_t>(n_test, 1);
    const std::size_t n_train = n - n_val - n_test;
    for (std::size_t i = 0; i < n_train; ++i) out.train.push_back(pool[i]);
    for (std::size_t i = 0; i < n_val; ++i)
        out.val.push_back(pool[n_train + i]);
    for (std::size_t i = 0; i < n_test; ++i)
        out.test.push_back(pool[n_train + n_val + i]);
}

}  // namespace

Split make_split(const Dataset& ds, const SplitSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    Split out;
    if (spec.stratified) {
        for (std::size_t c = 0; c < ds.n_classes(); ++c) {
            std::vector<std::size_t> pool;
            for (std::size_t i = 0; i < ds.size(); ++i)
                if (ds.samples[i].class_id == c) pool.push_back(i);
            if (pool.empty()) continue;
            split_indices(pool, spec, rng, out);
        }
    } else {
        std::vector<std::size_t> pool(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) pool[i] = i;
        split_indices(pool, spec, rng, out);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

Dataset normalize(const Dataset& ds,
                  const std::vector<std::size_t>& stats_indices) {
    ds.validate();
    if (ds.normalized)
        throw TensorError("normalize: dataset is already normalized");
    if (stats_indices.empty())
        throw TensorError("normalize: empty statistics split");
    const std::size_t C = ds.channels, T = ds.timesteps;
    std::vector<double> mean(C, 0.0), var(C, 0.0);
    const double n = static_cast<double>(stats_indices.size() * T);
    for (std::size_t i : stats_indices)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t t = 0; t < T; ++t)
                mean[c] += ds.samples.at(i).values[c * T + t];
    for (std::size_t c = 0; c < C; ++c) mean[c] /= n;
    for (std::size_t i : stats_indices)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t t = 0; t < T; ++t) {
                const double d = ds.samples[i].values[c * T + t] - mean[c];
                var[c] += d * d;
            }
    Dataset out = ds;
    out.mean = mean;
    out.stddev.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
        const double sd = std::sqrt(var[c] / n);
        if (sd == 0.0)
            throw TensorError("normalize: channel " + std::to_string(c) +
                              " has zero variance on the statistics split");
        out.stddev[c] = sd;
    }
    for (auto& s : out.samples)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t t = 0; t < T; ++t)
                s.values[c * T + t] =
                    (s.values[c * T + t] - out.mean[c]) / out.stddev[c];
    out.normalized = true;
    return out;
}

Dataset denormalize(const Dataset& ds) {
    if (!ds.normalized)
        throw TensorError("denormalize: dataset is not normalized");
    Dataset out = ds;
    const std::size_t C = ds.channels, T = ds.timesteps;
    for (auto& s : out.samples)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t t = 0; t < T; ++t)
                s.values[c * T + t] =
                    s.values[c * T + t] * ds.stddev[c] + ds.mean[c];
    out.normalized = false;
    out.mean.clear();
    out.stddev.clear();
    return out;
}

Tensor batch_tensor(const Dataset& ds, std::span<const std::size_t> indices) {
    if (indices.empty()) throw TensorError("batch_tensor: empty index list");
    const std::size_t per = ds.channels * ds.timesteps;
    std::vector<double> v(indices.size() * per);
    for (std::size_t b = 0; b < indices.size(); ++b) {
        const auto& s = ds.samples.at(indices[b]);
        std::copy(s.values.begin(), s.values.end(), v.begin() + b * per);
    }
    return Tensor({indices.size(), ds.channels, ds.timesteps}, std::move(v));
}

std::vector<double> make_condition_categorical(std::size_t class_id,
                                               std::size_t n_classes) {
    if (class_id >= n_classes)
        throw TensorError("condition: class id " + std::to_string(class_id) +
                          " out of range for " + std::to_string(n_classes) +
                          " classes");
    std::vector<double> v(n_classes, 0.0);
    v[class_id] = 1.0;
    return v;
}

std::pair<Tensor, Tensor> make_condition_series(
    const Dataset& ds, std::size_t sample_index,
    const std::vector<std::size_t>& cond_channels,
    const std::vector<std::size_t>& target_channels) {
    if (cond_channels.empty() || target_channels.empty())
        throw TensorError("condition: channel id sets must be non-empty");
    for (std::size_t c : cond_channels)
        for (std::size_t t : target_channels)
            if (c == t)
                throw TensorError("condition: channel " + std::to_string(c) +
                                  " appears in both sets");
    const std::size_t T = ds.timesteps;
    const auto& s = ds.samples.at(sample_index);
    auto gather = [&](const std::vector<std::size_t>& ids) {
        std::vector<double> v;
        v.reserve(ids.size() * T);
        for (std::size_t c : ids) {
            if (c >= ds.channels)
                throw TensorError("condition: channel id " +
                                  std::to_string(c) + " out of range for " +
                                  std::to_string(ds.channels) + " channels");
            v.insert(v.end(), s.values.begin() + c * T,
                     s.values.begin() + (c + 1) * T);
        }
        return Tensor({ids.size(), T}, std::move(v));
    };
    return {gather(cond_channels), gather(target_channels)};
}

void SyntheticSpec::validate() const {
    if (classes.empty() || channels == 0 || timesteps == 0 || per_class == 0)
        throw TensorError("synthetic: empty spec field");
    for (const auto& c : classes) {
        if (c.noise_std < 0.0)
            throw TensorError("synthetic: negative noise std");
        if (c.harmonics.empty())
            throw TensorError("synthetic: class without harmonics");
    }
    for (std::size_t i = 0; i < classes.size(); ++i)
        for (std::size_t j = i + 1; j < classes.size(); ++j)
            if (classes[i].base_freq == classes[j].base_freq)
                throw TensorError("synthetic: classes " + std::to_string(i) +
                                  " and " + std::to_string(j) +
                                  " share base frequency");
    if (!(warp_low > 0.0 && warp_low <= warp_high))
        throw TensorError("synthetic: invalid warp range");
}

SyntheticSpec default_synthetic() {
    SyntheticSpec spec;
    spec.classes = {{2.0, {1.0, 0.3}, 0.1},
                    {5.0, {1.0, 0.3}, 0.1},
                    {9.0, {1.0, 0.3}, 0.1}};
    return spec;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    Dataset ds;
    ds.channels = spec.channels;
    ds.timesteps = spec.timesteps;
    for (std::size_t k = 0; k < spec.classes.size(); ++k)
        ds.class_names.push_back("class" + std::to_string(k));
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (std::size_t k = 0; k < spec.classes.size(); ++k) {
        const auto& cs = spec.classes[k];
        for (std::size_t i = 0; i < spec.per_class; ++i) {
            const double phase = rng.uniform(0.0, two_pi);
            const double warp = rng.uniform(spec.warp_low, spec.warp_high);
            Sample s;
            s.class_id = k;
            s.values.resize(spec.channels * spec.timesteps);
            for (std::size_t c = 0; c < spec.channels; ++c) {
                // fixed per-channel phase offset so channels differ
                const double coff =
                    static_cast<double>(c) * two_pi / 8.0;
                for (std::size_t t = 0; t < spec.timesteps; ++t) {
                    const double u = static_cast<double>(t) /
                                     static_cast<double>(spec.timesteps);
                    double v = 0.0;
                    for (std::size_t h = 0; h < cs.harmonics.size(); ++h)
                        v += cs.harmonics[h] *
                             std::sin(two_pi * cs.base_freq *
                                          static_cast<double>(h + 1) * warp *
                                          u +
                                      phase + coff);
                    if (cs.noise_std > 0.0) v += cs.noise_std * rng.normal();
                    s.values[c * spec.timesteps + t] = v;
                }
            }
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

std::size_t dominant_frequency(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 4) throw TensorError("dominant_frequency: series too short");
    const double two_pi = 2.0 * 3.14159265358979323846;
    std::size_t best = 1;
    double best_mag = -1.0;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double a = two_pi * static_cast<double>(k) *
                             static_cast<double>(t) / static_cast<double>(n);
            re += x[t] * std::cos(a);
            im -= x[t] * std::sin(a);
        }
        const double mag = re * re + im * im;
        if (mag > best_mag) {
            best_mag = mag;
            best = k;
        }
    }
    return best;
}

}  // namespace mtscgan::data
