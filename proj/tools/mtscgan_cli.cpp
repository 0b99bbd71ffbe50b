// Command-line surface. Subcommands: train, generate, evaluate, alpha-sweep,
// augment, fid-ramp, fcn-train, synth-data. Each accepts --config (JSON);
// explicit flags override config values. Failures print one JSON error line
// on stderr and exit nonzero.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mtscgan/data.hpp"
#include "mtscgan/evaluation.hpp"
#include "mtscgan/pipeline.hpp"

using nlohmann::json;
using namespace mtscgan;

namespace {

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw TensorError("config: cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw TensorError("config: " + path + ": " + e.what());
    }
}

// foo.csv -> foo.json
std::string default_sidecar(const std::string& csv_path) {
    const auto dot = csv_path.rfind('.');
    const auto slash = csv_path.rfind('/');
    if (dot == std::string::npos ||
        (slash != std::string::npos && dot < slash))
        return csv_path + ".json";
    return csv_path.substr(0, dot) + ".json";
}

data::Dataset load_dataset(const std::string& csv, std::string sidecar) {
    if (sidecar.empty()) sidecar = default_sidecar(csv);
    return data::load_csv(csv, sidecar);
}

data::Dataset take(const data::Dataset& ds,
                   const std::vector<std::size_t>& idx) {
    data::Dataset out = ds;
    out.samples.clear();
    for (std::size_t i : idx) out.samples.push_back(ds.samples.at(i));
    return out;
}

void apply_norm(data::Dataset& ds, const std::vector<double>& mean,
                const std::vector<double>& stddev) {
    for (auto& s : ds.samples)
        for (std::size_t c = 0; c < ds.channels; ++c)
            for (std::size_t t = 0; t < ds.timesteps; ++t)
                s.values[c * ds.timesteps + t] =
                    (s.values[c * ds.timesteps + t] - mean[c]) / stddev[c];
    ds.normalized = true;
    ds.mean = mean;
    ds.stddev = stddev;
}

// [n, |channels|, T] over the given channels only
data::Dataset pick_channels(const data::Dataset& ds,
                            const std::vector<std::size_t>& channels) {
    data::Dataset out = ds;
    out.channels = channels.size();
    out.mean.clear();
    out.stddev.clear();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto& v = out.samples[i].values;
        std::vector<double> nv;
        nv.reserve(channels.size() * ds.timesteps);
        for (std::size_t c : channels)
            nv.insert(nv.end(), v.begin() + c * ds.timesteps,
                      v.begin() + (c + 1) * ds.timesteps);
        v = std::move(nv);
    }
    return out;
}

// Stratified-split the (already normalized) dataset and fit the classifier.
eval::FcnClassifierParams fit_extractor(const data::Dataset& norm_ds,
                                        eval::FcnConfig fcfg,
                                        std::size_t epochs,
                                        std::uint64_t seed) {
    fcfg.channels = norm_ds.channels;
    fcfg.n_classes = norm_ds.n_classes();
    data::SplitSpec sspec;
    sspec.seed = seed;
    const data::Split split = data::make_split(norm_ds, sspec);
    eval::FcnTrainConfig ftc;
    ftc.epochs = epochs;
    Rng rng(seed);
    return eval::train_fcn(take(norm_ds, split.train),
                           take(norm_ds, split.val), fcfg, ftc, rng);
}

std::vector<std::uint64_t> seed_list(std::uint64_t seed, std::size_t n) {
    std::vector<std::uint64_t> seeds(n);
    for (std::size_t i = 0; i < n; ++i) seeds[i] = seed + i;
    return seeds;
}

data::SyntheticSpec synth_spec_from_json(const json& j) {
    data::SyntheticSpec spec = data::default_synthetic();
    if (j.contains("classes")) {
        spec.classes.clear();
        for (const auto& c : j.at("classes")) {
            data::ClassSpec cs;
            cs.base_freq = c.value("base_freq", cs.base_freq);
            cs.harmonics = c.value("harmonics", cs.harmonics);
            cs.noise_std = c.value("noise_std", cs.noise_std);
            spec.classes.push_back(cs);
        }
    }
    spec.channels = j.value("channels", spec.channels);
    spec.timesteps = j.value("timesteps", spec.timesteps);
    spec.per_class = j.value("per_class", spec.per_class);
    spec.warp_low = j.value("warp_low", spec.warp_low);
    spec.warp_high = j.value("warp_high", spec.warp_high);
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transformer conditional GAN for multivariate time series"};
    app.require_subcommand(1);

    std::string config_path, data_path, sidecar_path, out_path, out_dir = ".";
    std::string ckpt_path, extractor_path, src_sidecar, loss_name, task_name;
    std::uint64_t seed = 0;
    std::size_t n = 10, class_id = 0, target_class = 0, n_seeds = 3;
    std::size_t epochs = 0, batch = 0, fid_every = 0, patience = 0;
    std::size_t fcn_epochs = 30, per_class = 300;
    std::size_t channels = 3, timesteps = 150;
    double alpha = -1.0, lr_g = -1.0, lr_d = -1.0;
    std::vector<double> alphas, sigmas{0.0, 0.1, 0.2, 0.4, 0.8};
    std::vector<std::size_t> cond_channels, target_channels;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--seed", seed, "rng seed")->required();
    };

    CLI::App* c_train = app.add_subcommand("train", "train a model");
    add_common(c_train);
    c_train->add_option("--data", data_path, "training CSV")->required();
    c_train->add_option("--sidecar", sidecar_path, "dataset sidecar JSON");
    c_train->add_option("--out", out_dir, "output directory");
    auto* o_epochs = c_train->add_option("--epochs", epochs);
    auto* o_batch = c_train->add_option("--batch", batch);
    auto* o_alpha = c_train->add_option("--alpha", alpha);
    auto* o_loss = c_train->add_option("--loss", loss_name,
                                       "standard | lsgan | wgan-gp");
    auto* o_task = c_train->add_option("--task", task_name,
                                      "categorical | series");
    auto* o_fid_every = c_train->add_option("--fid-every", fid_every);
    auto* o_patience = c_train->add_option("--patience", patience);
    auto* o_lr_g = c_train->add_option("--lr-g", lr_g);
    auto* o_lr_d = c_train->add_option("--lr-d", lr_d);
    auto* o_cond = c_train->add_option("--cond-channels", cond_channels);
    auto* o_target = c_train->add_option("--target-channels", target_channels);

    CLI::App* c_gen = app.add_subcommand("generate", "sample a checkpoint");
    add_common(c_gen);
    c_gen->add_option("--checkpoint", ckpt_path)->required();
    c_gen->add_option("--out", out_path, "output CSV")->required();
    c_gen->add_option("--sidecar", sidecar_path, "output sidecar JSON");
    c_gen->add_option("--n", n, "samples to generate");
    auto* o_class = c_gen->add_option("--class", class_id,
                                      "class id (categorical task)");
    auto* o_src = c_gen->add_option("--data", data_path,
                                    "condition source CSV (series task)");
    c_gen->add_option("--data-sidecar", src_sidecar,
                      "condition source sidecar");

    CLI::App* c_eval = app.add_subcommand("evaluate", "metric report");
    add_common(c_eval);
    c_eval->add_option("--checkpoint", ckpt_path)->required();
    c_eval->add_option("--data", data_path, "held-out CSV")->required();
    c_eval->add_option("--sidecar", sidecar_path);
    c_eval->add_option("--extractor", extractor_path,
                       "feature extractor checkpoint; trained ad hoc if absent");
    c_eval->add_option("--out", out_dir, "report directory");
    c_eval->add_option("--fcn-epochs", fcn_epochs,
                       "ad hoc extractor training epochs");

    CLI::App* c_sweep = app.add_subcommand("alpha-sweep",
                                           "dispersion vs mixing weight");
    add_common(c_sweep);
    c_sweep->add_option("--data", data_path)->required();
    c_sweep->add_option("--sidecar", sidecar_path);
    c_sweep->add_option("--alphas", alphas, "grid, default 0.1 0.25 0.75 0.9");
    c_sweep->add_option("--n-seeds", n_seeds);
    c_sweep->add_option("--out", out_dir);

    CLI::App* c_aug = app.add_subcommand("augment", "class-balancing study");
    add_common(c_aug);
    c_aug->add_option("--data", data_path)->required();
    c_aug->add_option("--sidecar", sidecar_path);
    c_aug->add_option("--checkpoint", ckpt_path)->required();
    c_aug->add_option("--target-class", target_class)->required();
    c_aug->add_option("--n-seeds", n_seeds);
    c_aug->add_option("--fcn-epochs", fcn_epochs);
    c_aug->add_option("--out", out_dir);

    CLI::App* c_ramp = app.add_subcommand("fid-ramp",
                                          "score vs additive noise");
    add_common(c_ramp);
    c_ramp->add_option("--data", data_path)->required();
    c_ramp->add_option("--sidecar", sidecar_path);
    c_ramp->add_option("--extractor", extractor_path,
                       "feature extractor checkpoint; trained ad hoc if absent");
    c_ramp->add_option("--sigmas", sigmas, "noise levels");
    c_ramp->add_option("--out", out_path, "output CSV")->required();
    c_ramp->add_option("--fcn-epochs", fcn_epochs);

    CLI::App* c_fcn = app.add_subcommand("fcn-train",
                                         "train a feature extractor");
    add_common(c_fcn);
    c_fcn->add_option("--data", data_path)->required();
    c_fcn->add_option("--sidecar", sidecar_path);
    c_fcn->add_option("--epochs", fcn_epochs);
    c_fcn->add_option("--out", out_path, "checkpoint path")->required();

    CLI::App* c_synth = app.add_subcommand("synth-data",
                                           "write a synthetic dataset");
    add_common(c_synth);
    c_synth->add_option("--out", out_path, "output CSV")->required();
    c_synth->add_option("--sidecar", sidecar_path);
    auto* o_per_class = c_synth->add_option("--per-class", per_class);
    auto* o_channels = c_synth->add_option("--channels", channels);
    auto* o_timesteps = c_synth->add_option("--timesteps", timesteps);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << json{{"error", e.what()}}.dump() << '\n';
        return 1;
    }

    try {
        const json cfg_json = load_config(config_path);
        if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

        if (c_train->parsed()) {
            pipe::TrainConfig cfg = pipe::train_config_from_json(cfg_json);
            cfg.seed = seed;
            if (*o_epochs) cfg.epochs = epochs;
            if (*o_batch) cfg.batch = batch;
            if (*o_alpha) cfg.gen.alpha = alpha;
            if (*o_loss) cfg.loss.kind = cgan::loss_kind_from_string(loss_name);
            if (*o_task) cfg.task = pipe::task_from_string(task_name);
            if (*o_fid_every) cfg.fid_every = fid_every;
            if (*o_patience) cfg.patience = patience;
            if (*o_lr_g) cfg.lr_g = lr_g;
            if (*o_lr_d) cfg.lr_d = lr_d;
            if (*o_cond) cfg.cond_channels = cond_channels;
            if (*o_target) cfg.target_channels = target_channels;
            data::Dataset ds = load_dataset(data_path, sidecar_path);
            pipe::TrainResult res = pipe::train(ds, cfg, out_dir);
            std::cout << json{{"best_epoch", res.best_epoch},
                              {"best_fid", res.best_fid},
                              {"epochs_run", res.logs.size()},
                              {"checkpoint", out_dir + "/checkpoint.bin"}}
                             .dump()
                      << '\n';
        } else if (c_gen->parsed()) {
            pipe::LoadedModel m =
                pipe::model_from_checkpoint(ckpt::load_checkpoint(ckpt_path));
            if (sidecar_path.empty()) sidecar_path = default_sidecar(out_path);
            if (m.cfg.task == pipe::Task::Categorical) {
                if (!*o_class)
                    throw TensorError("generate: --class is required for a "
                                      "categorical checkpoint");
                pipe::generate_cmd(m, class_id, n, seed, out_path,
                                   sidecar_path);
            } else {
                if (!*o_src)
                    throw TensorError("generate: --data is required for a "
                                      "series checkpoint");
                data::Dataset src = load_dataset(data_path, src_sidecar);
                pipe::generate_series_cmd(m, src, n, seed, out_path,
                                          sidecar_path);
            }
            std::cout << json{{"csv", out_path}, {"sidecar", sidecar_path}}
                             .dump()
                      << '\n';
        } else if (c_eval->parsed()) {
            pipe::LoadedModel m =
                pipe::model_from_checkpoint(ckpt::load_checkpoint(ckpt_path));
            data::Dataset ds = load_dataset(data_path, sidecar_path);
            eval::FcnClassifierParams extractor = [&] {
                if (!extractor_path.empty())
                    return pipe::fcn_from_checkpoint(
                        ckpt::load_checkpoint(extractor_path), nullptr,
                        nullptr);
                // ad hoc extractor, fitted in the model's normalized space
                data::Dataset norm = ds;
                apply_norm(norm, m.norm_mean, m.norm_stddev);
                if (m.cfg.task == pipe::Task::Series)
                    norm = pick_channels(norm, m.cfg.target_channels);
                return fit_extractor(norm, m.cfg.fcn, fcn_epochs, seed);
            }();
            pipe::EvalReport rep =
                pipe::evaluate_cmd(m, ds, extractor, seed, out_dir);
            std::cout << rep.to_json().dump() << '\n';
        } else if (c_sweep->parsed()) {
            pipe::TrainConfig base = pipe::train_config_from_json(cfg_json);
            base.seed = seed;
            data::Dataset ds = load_dataset(data_path, sidecar_path);
            const auto& grid =
                alphas.empty() ? pipe::kDefaultAlphaGrid : alphas;
            auto rows = pipe::alpha_sweep(ds, base, grid,
                                          seed_list(seed, n_seeds), out_dir);
            json out = json::array();
            for (const auto& r : rows)
                out.push_back({{"alpha", r.alpha},
                               {"fid", r.fid},
                               {"intra_dispersion", r.intra_dispersion},
                               {"inter_separation", r.inter_separation},
                               {"n_seeds", r.n_seeds}});
            std::cout << out.dump() << '\n';
        } else if (c_aug->parsed()) {
            pipe::LoadedModel m =
                pipe::model_from_checkpoint(ckpt::load_checkpoint(ckpt_path));
            data::Dataset ds = load_dataset(data_path, sidecar_path);
            eval::FcnConfig fcfg = m.cfg.fcn;
            fcfg.channels = ds.channels;
            fcfg.n_classes = ds.n_classes();
            eval::FcnTrainConfig ftc;
            ftc.epochs = fcn_epochs;
            pipe::AugmentReport rep =
                pipe::augment_cmd(ds, m, target_class, fcfg, ftc,
                                  seed_list(seed, n_seeds), out_dir);
            std::cout << rep.to_json().dump() << '\n';
        } else if (c_ramp->parsed()) {
            data::Dataset ds = load_dataset(data_path, sidecar_path);
            data::Dataset norm = ds;
            eval::FcnClassifierParams extractor = [&] {
                if (!extractor_path.empty()) {
                    std::vector<double> mean, sd;
                    auto p = pipe::fcn_from_checkpoint(
                        ckpt::load_checkpoint(extractor_path), &mean, &sd);
                    apply_norm(norm, mean, sd);
                    return p;
                }
                data::SplitSpec sspec;
                sspec.seed = seed;
                norm = data::normalize(ds, data::make_split(ds, sspec).train);
                return fit_extractor(norm, eval::FcnConfig{}, fcn_epochs,
                                     seed);
            }();
            std::vector<std::size_t> idx(norm.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            auto rows = pipe::fid_ramp(data::batch_tensor(norm, idx),
                                       extractor, sigmas, seed, out_path);
            json out = json::array();
            for (const auto& [s, f] : rows)
                out.push_back({{"sigma", s}, {"fid", f}});
            std::cout << out.dump() << '\n';
        } else if (c_fcn->parsed()) {
            data::Dataset ds = load_dataset(data_path, sidecar_path);
            data::SplitSpec sspec;
            sspec.seed = seed;
            const data::Split split = data::make_split(ds, sspec);
            data::Dataset norm = data::normalize(ds, split.train);
            eval::FcnConfig fcfg;
            if (cfg_json.contains("fcn")) {
                const auto& f = cfg_json.at("fcn");
                fcfg.filters = f.value("filters", fcfg.filters);
                fcfg.kernels = f.value("kernels", fcfg.kernels);
            }
            fcfg.channels = norm.channels;
            fcfg.n_classes = norm.n_classes();
            eval::FcnTrainConfig ftc;
            ftc.epochs = fcn_epochs;
            Rng rng(seed);
            auto p = eval::train_fcn(take(norm, split.train),
                                     take(norm, split.val), fcfg, ftc, rng);
            const double acc = eval::fcn_accuracy(take(norm, split.val), p);
            ckpt::save_checkpoint(
                pipe::fcn_to_checkpoint(p, norm.mean, norm.stddev), out_path);
            std::cout << json{{"val_accuracy", acc}, {"checkpoint", out_path}}
                             .dump()
                      << '\n';
        } else if (c_synth->parsed()) {
            data::SyntheticSpec spec = synth_spec_from_json(cfg_json);
            spec.seed = seed;
            if (*o_per_class) spec.per_class = per_class;
            if (*o_channels) spec.channels = channels;
            if (*o_timesteps) spec.timesteps = timesteps;
            data::Dataset ds = data::generate_synthetic(spec);
            if (sidecar_path.empty()) sidecar_path = default_sidecar(out_path);
            data::save_csv(ds, out_path, sidecar_path);
            std::cout << json{{"samples", ds.size()},
                              {"csv", out_path},
                              {"sidecar", sidecar_path}}
                             .dump()
                      << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}}.dump() << '\n';
        return 1;
    }
    return 0;
}
