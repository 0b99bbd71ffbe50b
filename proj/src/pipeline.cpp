#include "mtscgan/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "mtscgan/adam.hpp"

namespace mtscgan::pipe {

using nlohmann::json;

Task task_from_string(const std::string& s) {
    if (s == "categorical") return Task::Categorical;
    if (s == "series") return Task::Series;
    throw TensorError("unknown task kind: " + s);
}

std::string to_string(Task t) {
    return t == Task::Categorical ? "categorical" : "series";
}

void TrainConfig::validate() const {
    if (epochs == 0 || batch == 0 || fid_every == 0)
        throw TensorError("train config: epochs, batch, fid_every must be >= 1");
    if (patience == 0)
        throw TensorError("train config: patience must be >= 1");
    if (batch < 2)
        throw TensorError("train config: batch must be >= 2");
    loss.validate();
    if (task == Task::Series) {
        if (cond_channels.empty() || target_channels.empty())
            throw TensorError("train config: series task needs cond and target channels");
        for (std::size_t c : cond_channels)
            for (std::size_t t : target_channels)
                if (c == t)
                    throw TensorError("train config: channel " +
                                      std::to_string(c) +
                                      " in both cond and target sets");
    }
}

json to_json(const TrainConfig& c) {
    json j;
    j["loss"] = {{"kind", cgan::to_string(c.loss.kind)},
                 {"lsgan_a", c.loss.lsgan_a},
                 {"lsgan_b", c.loss.lsgan_b},
                 {"lsgan_c", c.loss.lsgan_c},
                 {"gp_lambda", c.loss.gp_lambda},
                 {"critic_steps", c.loss.critic_steps}};
    j["gen"] = {{"latent_dim", c.gen.latent_dim},
                {"alpha", c.gen.alpha},
                {"seq_len", c.gen.seq_len},
                {"embed_channels", c.gen.embed_channels},
                {"out_channels", c.gen.out_channels},
                {"n_layers", c.gen.n_layers},
                {"n_heads", c.gen.n_heads}};
    j["disc"] = {{"patch_len", c.disc.patch_len},
                 {"embed_dim", c.disc.embed_dim},
                 {"n_layers", c.disc.n_layers},
                 {"n_heads", c.disc.n_heads},
                 {"in_channels", c.disc.in_channels},
                 {"cond_dim", c.disc.cond_dim},
                 {"pre_channels", c.disc.pre_channels},
                 {"seq_len", c.disc.seq_len}};
    j["fcn"] = {{"channels", c.fcn.channels},
                {"n_classes", c.fcn.n_classes},
                {"filters", c.fcn.filters},
                {"kernels", c.fcn.kernels}};
    j["fcn_epochs"] = c.fcn_epochs;
    j["epochs"] = c.epochs;
    j["batch"] = c.batch;
    j["lr_g"] = c.lr_g;
    j["lr_d"] = c.lr_d;
    j["seed"] = c.seed;
    j["fid_every"] = c.fid_every;
    j["patience"] = c.patience;
    j["task"] = to_string(c.task);
    j["cond_channels"] = c.cond_channels;
    j["target_channels"] = c.target_channels;
    j["split"] = {{"train", c.split.train},
                  {"val", c.split.val},
                  {"test", c.split.test},
                  {"seed", c.split.seed},
                  {"stratified", c.split.stratified}};
    return j;
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    if (j.contains("loss")) {
        const auto& l = j.at("loss");
        if (l.contains("kind"))
            c.loss.kind = cgan::loss_kind_from_string(l.at("kind"));
        c.loss.lsgan_a = l.value("lsgan_a", c.loss.lsgan_a);
        c.loss.lsgan_b = l.value("lsgan_b", c.loss.lsgan_b);
        c.loss.lsgan_c = l.value("lsgan_c", c.loss.lsgan_c);
        c.loss.gp_lambda = l.value("gp_lambda", c.loss.gp_lambda);
        c.loss.critic_steps = l.value("critic_steps", c.loss.critic_steps);
    }
    if (j.contains("gen")) {
        const auto& g = j.at("gen");
        c.gen.latent_dim = g.value("latent_dim", c.gen.latent_dim);
        c.gen.alpha = g.value("alpha", c.gen.alpha);
        c.gen.seq_len = g.value("seq_len", c.gen.seq_len);
        c.gen.embed_channels = g.value("embed_channels", c.gen.embed_channels);
        c.gen.out_channels = g.value("out_channels", c.gen.out_channels);
        c.gen.n_layers = g.value("n_layers", c.gen.n_layers);
        c.gen.n_heads = g.value("n_heads", c.gen.n_heads);
    }
    if (j.contains("disc")) {
        const auto& d = j.at("disc");
        c.disc.patch_len = d.value("patch_len", c.disc.patch_len);
        c.disc.embed_dim = d.value("embed_dim", c.disc.embed_dim);
        c.disc.n_layers = d.value("n_layers", c.disc.n_layers);
        c.disc.n_heads = d.value("n_heads", c.disc.n_heads);
        c.disc.in_channels = d.value("in_channels", c.disc.in_channels);
        c.disc.cond_dim = d.value("cond_dim", c.disc.cond_dim);
        c.disc.pre_channels = d.value("pre_channels", c.disc.pre_channels);
        c.disc.seq_len = d.value("seq_len", c.disc.seq_len);
    }
    if (j.contains("fcn")) {
        const auto& f = j.at("fcn");
        c.fcn.channels = f.value("channels", c.fcn.channels);
        c.fcn.n_classes = f.value("n_classes", c.fcn.n_classes);
        c.fcn.filters = f.value("filters", c.fcn.filters);
        c.fcn.kernels = f.value("kernels", c.fcn.kernels);
    }
    c.fcn_epochs = j.value("fcn_epochs", c.fcn_epochs);
    c.epochs = j.value("epochs", c.epochs);
    c.batch = j.value("batch", c.batch);
    c.lr_g = j.value("lr_g", c.lr_g);
    c.lr_d = j.value("lr_d", c.lr_d);
    c.seed = j.value("seed", c.seed);
    c.fid_every = j.value("fid_every", c.fid_every);
    c.patience = j.value("patience", c.patience);
    if (j.contains("task")) c.task = task_from_string(j.at("task"));
    c.cond_channels =
        j.value("cond_channels", c.cond_channels);
    c.target_channels =
        j.value("target_channels", c.target_channels);
    if (j.contains("split")) {
        const auto& s = j.at("split");
        c.split.train = s.value("train", c.split.train);
        c.split.val = s.value("val", c.split.val);
        c.split.test = s.value("test", c.split.test);
        c.split.seed = s.value("seed", c.split.seed);
        c.split.stratified = s.value("stratified", c.split.stratified);
    }
    return c;
}

namespace {

// [B, |channels|, T] subset of the given samples
Tensor channel_subset(const data::Dataset& ds,
                      std::span<const std::size_t> indices,
                      const std::vector<std::size_t>& channels) {
    const std::size_t T = ds.timesteps;
    std::vector<double> v(indices.size() * channels.size() * T);
    std::size_t o = 0;
    for (std::size_t i : indices) {
        const auto& s = ds.samples.at(i);
        for (std::size_t c : channels) {
            std::copy(s.values.begin() + c * T, s.values.begin() + (c + 1) * T,
                      v.begin() + o);
            o += T;
        }
    }
    return Tensor({indices.size(), channels.size(), T}, std::move(v));
}

data::Dataset subset_dataset(const data::Dataset& ds,
                             const std::vector<std::size_t>& indices,
                             const std::vector<std::size_t>& channels) {
    data::Dataset out;
    out.class_names = ds.class_names;
    out.channels = channels.size();
    out.timesteps = ds.timesteps;
    out.normalized = ds.normalized;
    const std::size_t T = ds.timesteps;
    for (std::size_t i : indices) {
        const auto& s = ds.samples.at(i);
        data::Sample n;
        n.class_id = s.class_id;
        for (std::size_t c : channels)
            n.values.insert(n.values.end(), s.values.begin() + c * T,
                            s.values.begin() + (c + 1) * T);
        out.samples.push_back(std::move(n));
    }
    return out;
}

std::vector<std::size_t> all_channels(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

// resolve the per-dataset fields the config file leaves implicit
TrainConfig resolve_config(const data::Dataset& ds, const TrainConfig& in) {
    TrainConfig cfg = in;
    cfg.gen.seq_len = ds.timesteps;
    cfg.disc.seq_len = ds.timesteps;
    if (cfg.task == Task::Categorical) {
        cfg.gen.cond = {cgan::ConditionSpec::Kind::Categorical,
                        ds.n_classes(), 0, 0};
        cfg.gen.out_channels = ds.channels;
        cfg.disc.in_channels = ds.channels;
        cfg.fcn.channels = ds.channels;
    } else {
        for (std::size_t c : cfg.cond_channels)
            if (c >= ds.channels)
                throw TensorError("train config: cond channel " +
                                  std::to_string(c) + " out of range");
        for (std::size_t c : cfg.target_channels)
            if (c >= ds.channels)
                throw TensorError("train config: target channel " +
                                  std::to_string(c) + " out of range");
        cfg.gen.cond = {cgan::ConditionSpec::Kind::Series, 0,
                        cfg.cond_channels.size(), ds.timesteps};
        cfg.gen.out_channels = cfg.target_channels.size();
        cfg.disc.in_channels = cfg.target_channels.size();
        cfg.fcn.channels = cfg.target_channels.size();
    }
    cfg.disc.cond = cfg.gen.cond;
    cfg.fcn.n_classes = ds.n_classes();
    cfg.validate();
    cfg.gen.validate();
    cfg.disc.validate();
    return cfg;
}

cgan::ConditionBatch make_conditions(const data::Dataset& norm,
                                     std::span<const std::size_t> indices,
                                     const TrainConfig& cfg) {
    if (cfg.task == Task::Categorical) {
        std::vector<std::size_t> labels;
        labels.reserve(indices.size());
        for (std::size_t i : indices)
            labels.push_back(norm.samples[i].class_id);
        return cgan::categorical_batch(labels, norm.n_classes());
    }
    return cgan::series_batch(channel_subset(norm, indices, cfg.cond_channels));
}

Tensor real_targets(const data::Dataset& norm,
                    std::span<const std::size_t> indices,
                    const TrainConfig& cfg) {
    return channel_subset(norm, indices,
                          cfg.task == Task::Categorical
                              ? all_channels(norm.channels)
                              : cfg.target_channels);
}

Tensor generator_loss(const Tensor& fake_logits, const cgan::LossConfig& l) {
    switch (l.kind) {
        case cgan::LossKind::Standard:
            return mean_all(softplus(neg(fake_logits)));
        case cgan::LossKind::LSGAN:
            return scale(
                mean_all(square(add_scalar(fake_logits, -l.lsgan_c))), 0.5);
        case cgan::LossKind::WGANGP:
            return neg(mean_all(fake_logits));
    }
    throw TensorError("unknown loss kind");
}

template <typename P>
void append_blocks(P& params, const std::string& prefix,
                   std::vector<std::pair<std::string, Tensor>>& out) {
    visit(params, prefix, [&out](const std::string& name, Tensor& t) {
        out.emplace_back(name, t.detach());
    });
}

template <typename P>
void load_blocks(P& params, const std::string& prefix,
                 const ckpt::Checkpoint& c) {
    visit(params, prefix, [&c](const std::string& name, Tensor& t) {
        const Tensor& b = c.block(name);
        if (b.shape() != t.shape())
            throw TensorError("checkpoint: block '" + name + "' has shape " +
                              shape_str(b.shape()) + ", expected " +
                              shape_str(t.shape()));
        t = b.detach().set_requires_grad(true);
    });
}

void step_from(Adam& opt, std::vector<Tensor>& params, const GradMap& grads) {
    std::vector<Tensor> g;
    g.reserve(params.size());
    for (Tensor& t : params) g.push_back(grad_of(grads, t));
    opt.step(params, g);
}

void require_finite(double v, const char* which, std::size_t epoch,
                    std::size_t batch) {
    if (!std::isfinite(v))
        throw TensorError(std::string("train: non-finite ") + which +
                          " at epoch " + std::to_string(epoch) + ", batch " +
                          std::to_string(batch));
}

}  // namespace

TrainResult train(const data::Dataset& ds, const TrainConfig& in_cfg,
                  const std::string& out_dir) {
    ds.validate();
    const TrainConfig cfg = resolve_config(ds, in_cfg);
    data::SplitSpec sspec = cfg.split;
    sspec.seed = cfg.seed;
    const data::Split split = data::make_split(ds, sspec);
    const data::Dataset norm = data::normalize(ds, split.train);

    Rng root(cfg.seed);
    Rng fcn_rng = root.fork();
    Rng init_rng = root.fork();
    Rng train_rng = root.fork();
    Rng fid_rng = root.fork();

    // monitoring extractor, trained once on the (task-shaped) train split
    const auto task_channels = cfg.task == Task::Categorical
                                   ? all_channels(ds.channels)
                                   : cfg.target_channels;
    data::Dataset fcn_train = subset_dataset(norm, split.train, task_channels);
    data::Dataset fcn_val = subset_dataset(norm, split.val, task_channels);
    eval::FcnTrainConfig ftc;
    ftc.epochs = cfg.fcn_epochs;
    eval::FcnClassifierParams extractor =
        eval::train_fcn(fcn_train, fcn_val, cfg.fcn, ftc, fcn_rng);

    auto gen = cgan::make_generator(cfg.gen, init_rng);
    auto disc = cgan::make_discriminator(cfg.disc, init_rng);
    auto gparams = cgan::parameters(gen);
    auto dparams = cgan::parameters(disc);
    Adam opt_g({.lr = cfg.lr_g}, gparams);
    Adam opt_d({.lr = cfg.lr_d}, dparams);

    const Tensor val_real = real_targets(norm, split.val, cfg);
    const cgan::ConditionBatch val_cond =
        make_conditions(norm, split.val, cfg);

    auto eval_fid = [&]() {
        NoGradGuard ng;
        Rng zr = fid_rng.fork();
        Tensor z = cgan::sample_noise(val_real.dim(0), cfg.gen.latent_dim, zr);
        Tensor fake = cgan::generate(z, val_cond, gen, cfg.gen);
        return eval::mts_fid(val_real, fake, extractor);
    };

    TrainResult res;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::string, Tensor>> best_blocks;
    std::size_t best_epoch = 0;
    std::size_t evals_since_best = 0;
    json history = json::array();

    const std::size_t critic_steps =
        cfg.loss.kind == cgan::LossKind::WGANGP ? cfg.loss.critic_steps : 1;
    std::vector<std::size_t> order = split.train;
    bool stop = false;
    for (std::size_t epoch = 1; epoch <= cfg.epochs && !stop; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        train_rng.shuffle(order);
        double sum_d = 0.0, sum_g = 0.0;
        std::size_t n_d = 0, n_g = 0, batch_no = 0;
        for (std::size_t start = 0; start + 1 < order.size();
             start += cfg.batch, ++batch_no) {
            const std::size_t n = std::min(cfg.batch, order.size() - start);
            std::span<const std::size_t> idx(order.data() + start, n);
            Tensor real = real_targets(norm, idx, cfg);
            cgan::ConditionBatch cond = make_conditions(norm, idx, cfg);

            Tensor fake_d;
            {
                NoGradGuard ng;
                Tensor z = cgan::sample_noise(n, cfg.gen.latent_dim, train_rng);
                fake_d = cgan::generate(z, cond, gen, cfg.gen);
            }
            Tensor loss_d;
            if (cfg.loss.kind == cgan::LossKind::WGANGP) {
                loss_d = cgan::loss_wgan_gp(real, fake_d, cond, disc, cfg.disc,
                                            cfg.loss, train_rng)
                             .d;
            } else {
                Tensor dr = cgan::discriminate(real, cond, disc, cfg.disc);
                Tensor df = cgan::discriminate(fake_d, cond, disc, cfg.disc);
                loss_d = cfg.loss.kind == cgan::LossKind::Standard
                             ? cgan::loss_standard(dr, df).d
                             : cgan::loss_lsgan(dr, df, cfg.loss).d;
            }
            require_finite(loss_d.item(), "discriminator loss", epoch,
                           batch_no);
            step_from(opt_d, dparams, backward(loss_d));
            sum_d += loss_d.item();
            ++n_d;

            if (batch_no % critic_steps == critic_steps - 1) {
                Tensor z = cgan::sample_noise(n, cfg.gen.latent_dim, train_rng);
                Tensor fake = cgan::generate(z, cond, gen, cfg.gen);
                Tensor logits = cgan::discriminate(fake, cond, disc, cfg.disc);
                Tensor loss_g = generator_loss(logits, cfg.loss);
                require_finite(loss_g.item(), "generator loss", epoch,
                               batch_no);
                step_from(opt_g, gparams, backward(loss_g));
                sum_g += loss_g.item();
                ++n_g;
            }
        }

        EpochLog log;
        log.epoch = epoch;
        log.loss_d = n_d ? sum_d / static_cast<double>(n_d) : 0.0;
        log.loss_g = n_g ? sum_g / static_cast<double>(n_g) : 0.0;
        if (epoch == 1 || epoch % cfg.fid_every == 0 || epoch == cfg.epochs) {
            const double fid = eval_fid();
            log.fid = fid;
            history.push_back({epoch, fid});
            if (fid < best) {
                best = fid;
                best_epoch = epoch;
                evals_since_best = 0;
                best_blocks.clear();
                append_blocks(gen, "gen.", best_blocks);
                append_blocks(disc, "disc.", best_blocks);
            } else if (++evals_since_best >= cfg.patience) {
                stop = true;
            }
        }
        log.seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        res.logs.push_back(log);
    }

    res.best_fid = best;
    res.best_epoch = best_epoch;
    res.checkpoint.blocks = std::move(best_blocks);
    res.checkpoint.blocks.emplace_back(
        "norm.mean", Tensor({norm.mean.size()}, norm.mean));
    res.checkpoint.blocks.emplace_back(
        "norm.stddev", Tensor({norm.stddev.size()}, norm.stddev));
    res.checkpoint.config = {{"train_config", to_json(cfg)},
                             {"class_names", ds.class_names},
                             {"channels", ds.channels},
                             {"timesteps", ds.timesteps},
                             {"best_epoch", best_epoch},
                             {"best_fid", best},
                             {"fid_history", history},
                             {"rng_digest", train_rng.digest()}};

    if (!out_dir.empty()) {
        ckpt::save_checkpoint(res.checkpoint, out_dir + "/checkpoint.bin");
        std::ofstream nd(out_dir + "/epochs.ndjson");
        if (!nd) throw TensorError("train: cannot write " + out_dir);
        for (const auto& l : res.logs) {
            json j = {{"epoch", l.epoch},
                      {"loss_d", l.loss_d},
                      {"loss_g", l.loss_g},
                      {"seconds", l.seconds}};
            if (l.fid >= 0.0) j["fid"] = l.fid;
            nd << j.dump() << '\n';
        }
    }
    return res;
}

LoadedModel model_from_checkpoint(const ckpt::Checkpoint& c) {
    LoadedModel m;
    try {
        m.cfg = train_config_from_json(c.config.at("train_config"));
        m.class_names =
            c.config.at("class_names").get<std::vector<std::string>>();
        m.channels = c.config.at("channels").get<std::size_t>();
        m.timesteps = c.config.at("timesteps").get<std::size_t>();
    } catch (const json::exception& e) {
        throw TensorError(std::string("checkpoint: bad config: ") + e.what());
    }
    // the condition spec is derived, not serialized
    if (m.cfg.task == Task::Categorical)
        m.cfg.gen.cond = {cgan::ConditionSpec::Kind::Categorical,
                          m.class_names.size(), 0, 0};
    else
        m.cfg.gen.cond = {cgan::ConditionSpec::Kind::Series, 0,
                          m.cfg.cond_channels.size(), m.timesteps};
    m.cfg.disc.cond = m.cfg.gen.cond;
    Rng dummy(0);
    m.gen = cgan::make_generator(m.cfg.gen, dummy);
    m.disc = cgan::make_discriminator(m.cfg.disc, dummy);
    load_blocks(m.gen, "gen.", c);
    load_blocks(m.disc, "disc.", c);
    const Tensor& mean = c.block("norm.mean");
    const Tensor& sd = c.block("norm.stddev");
    m.norm_mean.assign(mean.data().begin(), mean.data().end());
    m.norm_stddev.assign(sd.data().begin(), sd.data().end());
    return m;
}

namespace {

// generated output is in normalized units; map back per channel
void denorm_inplace(std::vector<double>& v, std::size_t T,
                    const std::vector<double>& mean,
                    const std::vector<double>& sd,
                    const std::vector<std::size_t>& channels) {
    std::size_t o = 0;
    for (std::size_t b = 0; b < v.size() / (T * channels.size()); ++b)
        for (std::size_t c : channels)
            for (std::size_t t = 0; t < T; ++t, ++o)
                v[o] = v[o] * sd[c] + mean[c];
}

}  // namespace

data::Dataset generate_batch(const LoadedModel& m,
                             const std::vector<std::size_t>& class_ids,
                             std::uint64_t seed) {
    if (m.cfg.task != Task::Categorical)
        throw TensorError("generate: checkpoint holds a series-task model");
    for (std::size_t c : class_ids)
        if (c >= m.class_names.size())
            throw TensorError("generate: class id " + std::to_string(c) +
                              " out of range for " +
                              std::to_string(m.class_names.size()) +
                              " classes");
    NoGradGuard ng;
    Rng rng(seed);
    Tensor z = cgan::sample_noise(class_ids.size(), m.cfg.gen.latent_dim, rng);
    auto cond = cgan::categorical_batch(class_ids, m.class_names.size());
    Tensor fake = cgan::generate(z, cond, m.gen, m.cfg.gen);
    std::vector<double> v(fake.data().begin(), fake.data().end());
    denorm_inplace(v, m.timesteps, m.norm_mean, m.norm_stddev,
                   all_channels(m.channels));
    data::Dataset out;
    out.channels = m.channels;
    out.timesteps = m.timesteps;
    out.class_names = m.class_names;
    const std::size_t per = m.channels * m.timesteps;
    for (std::size_t i = 0; i < class_ids.size(); ++i)
        out.samples.push_back(
            {{v.begin() + i * per, v.begin() + (i + 1) * per}, class_ids[i]});
    return out;
}

void generate_cmd(const LoadedModel& m, std::size_t class_id, std::size_t n,
                  std::uint64_t seed, const std::string& csv_path,
                  const std::string& sidecar_path) {
    data::Dataset out =
        generate_batch(m, std::vector<std::size_t>(n, class_id), seed);
    data::save_csv(out, csv_path, sidecar_path);
}

Tensor generate_series(const LoadedModel& m, const Tensor& conditions,
                       std::uint64_t seed) {
    if (m.cfg.task != Task::Series)
        throw TensorError("generate: checkpoint holds a categorical model");
    if (conditions.rank() != 3 ||
        conditions.dim(1) != m.cfg.cond_channels.size() ||
        conditions.dim(2) != m.timesteps)
        throw TensorError("generate: conditions " +
                          shape_str(conditions.shape()) + " expected [*, " +
                          std::to_string(m.cfg.cond_channels.size()) + ", " +
                          std::to_string(m.timesteps) + "]");
    NoGradGuard ng;
    const std::size_t B = conditions.dim(0), T = m.timesteps;
    // conditions arrive in raw units; the model works in normalized space
    std::vector<double> cv(conditions.data().begin(), conditions.data().end());
    std::size_t o = 0;
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c : m.cfg.cond_channels)
            for (std::size_t t = 0; t < T; ++t, ++o)
                cv[o] = (cv[o] - m.norm_mean[c]) / m.norm_stddev[c];
    auto cond = cgan::series_batch(
        Tensor({B, m.cfg.cond_channels.size(), T}, std::move(cv)));
    Rng rng(seed);
    Tensor z = cgan::sample_noise(B, m.cfg.gen.latent_dim, rng);
    Tensor fake = cgan::generate(z, cond, m.gen, m.cfg.gen);
    std::vector<double> v(fake.data().begin(), fake.data().end());
    denorm_inplace(v, T, m.norm_mean, m.norm_stddev, m.cfg.target_channels);
    return Tensor(fake.shape(), std::move(v));
}

void generate_series_cmd(const LoadedModel& m, const data::Dataset& source,
                         std::size_t n, std::uint64_t seed,
                         const std::string& csv_path,
                         const std::string& sidecar_path) {
    if (source.channels != m.channels || source.timesteps != m.timesteps)
        throw TensorError("generate: source dataset shape does not match the checkpoint");
    n = std::min(n, source.size());
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Tensor cond = channel_subset(source, idx, m.cfg.cond_channels);
    Tensor out = generate_series(m, cond, seed);
    // class_id -1 marks series-conditioned output
    std::ofstream csv(csv_path);
    if (!csv) throw TensorError("generate: cannot write " + csv_path);
    char buf[40];
    const std::size_t per = out.dim(1) * out.dim(2);
    for (std::size_t i = 0; i < n; ++i) {
        csv << -1;
        for (std::size_t j = 0; j < per; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", out.data()[i * per + j]);
            csv << ',' << buf;
        }
        csv << '\n';
    }
    json meta = {{"channels", out.dim(1)},
                 {"timesteps", out.dim(2)},
                 {"class_names", json::array({"generated"})}};
    std::ofstream side(sidecar_path);
    side << meta.dump(2) << '\n';
}

json EvalReport::to_json() const {
    json j;
    json f = json::object();
    for (const auto& [name, value] : fid) f[name] = value;
    j["mts_fid"] = f;
    if (mean_dtw >= 0.0) j["mean_dtw"] = mean_dtw;
    return j;
}

namespace {

void write_pca_csv(const std::string& path, const Tensor& real_f,
                   const Tensor& fake_f,
                   const std::vector<std::size_t>& labels) {
    const std::size_t nr = real_f.dim(0), nf = fake_f.dim(0);
    Tensor both = concat({real_f, fake_f}, 0);
    auto model = eval::pca_fit(both);
    Tensor proj = eval::pca_project(model, both, 2);
    std::ofstream out(path);
    out << "source,class,pc1,pc2\n";
    for (std::size_t i = 0; i < nr + nf; ++i)
        out << (i < nr ? "real" : "generated") << ','
            << labels[i < nr ? i : i - nr] << ',' << proj.data()[i * 2] << ','
            << proj.data()[i * 2 + 1] << '\n';
}

void write_hist_csv(const std::string& path, const Tensor& real,
                    const Tensor& fake) {
    Tensor sr = eval::stat_features(real);
    Tensor sf = eval::stat_features(fake);
    const char* names[3] = {"mean", "median", "std"};
    std::ofstream out(path);
    out << "stat,bin_lo,bin_hi,real,generated\n";
    for (std::size_t s = 0; s < 3; ++s) {
        std::vector<double> rv, fv;
        for (std::size_t i = s; i < sr.numel(); i += 3)
            rv.push_back(sr.data()[i]);
        for (std::size_t i = s; i < sf.numel(); i += 3)
            fv.push_back(sf.data()[i]);
        double lo = rv[0], hi = rv[0];
        for (const auto* v : {&rv, &fv})
            for (double x : *v) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        if (!(hi > lo)) hi = lo + 1e-12;
        const std::size_t bins = 40;
        auto hr = eval::histogram(rv, bins, lo, hi);
        auto hf = eval::histogram(fv, bins, lo, hi);
        const double w = (hi - lo) / static_cast<double>(bins);
        for (std::size_t b = 0; b < bins; ++b)
            out << names[s] << ',' << lo + w * static_cast<double>(b) << ','
                << lo + w * static_cast<double>(b + 1) << ',' << hr.counts[b]
                << ',' << hf.counts[b] << '\n';
    }
}

}  // namespace

EvalReport evaluate_cmd(const LoadedModel& m, const data::Dataset& test_ds,
                        eval::FcnClassifierParams& extractor,
                        std::uint64_t seed, const std::string& out_dir) {
    test_ds.validate();
    if (test_ds.channels != m.channels || test_ds.timesteps != m.timesteps)
        throw TensorError("evaluate: dataset shape does not match the checkpoint");
    // work in the model's normalized space
    data::Dataset norm = test_ds;
    for (auto& s : norm.samples)
        for (std::size_t c = 0; c < m.channels; ++c)
            for (std::size_t t = 0; t < m.timesteps; ++t)
                s.values[c * m.timesteps + t] =
                    (s.values[c * m.timesteps + t] - m.norm_mean[c]) /
                    m.norm_stddev[c];
    norm.normalized = true;

    EvalReport rep;
    NoGradGuard ng;
    Rng rng(seed);
    if (m.cfg.task == Task::Categorical) {
        std::vector<std::size_t> idx(norm.size()), labels(norm.size());
        for (std::size_t i = 0; i < norm.size(); ++i) {
            idx[i] = i;
            labels[i] = norm.samples[i].class_id;
        }
        Tensor real = data::batch_tensor(norm, idx);
        Tensor z = cgan::sample_noise(norm.size(), m.cfg.gen.latent_dim, rng);
        Tensor fake = cgan::generate(
            z, cgan::categorical_batch(labels, norm.n_classes()), m.gen,
            m.cfg.gen);
        rep.fid.emplace_back("all", eval::mts_fid(real, fake, extractor));
        for (std::size_t c = 0; c < norm.n_classes(); ++c) {
            std::vector<std::size_t> sel;
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (labels[i] == c) sel.push_back(i);
            if (sel.size() < 2) continue;
            Tensor rc = data::batch_tensor(norm, sel);
            std::vector<Tensor> rows;
            for (std::size_t i : sel) rows.push_back(slice(fake, 0, i, 1));
            Tensor fc = rows.size() == 1 ? rows[0] : concat(rows, 0);
            rep.fid.emplace_back(norm.class_names[c],
                                 eval::mts_fid(rc, fc, extractor));
        }
        if (!out_dir.empty()) {
            Tensor rf = eval::extract_features(real, extractor);
            Tensor ff = eval::extract_features(fake, extractor);
            write_pca_csv(out_dir + "/pca.csv", rf, ff, labels);
            write_hist_csv(out_dir + "/hist.csv", real, fake);
        }
    } else {
        std::vector<std::size_t> idx(norm.size());
        for (std::size_t i = 0; i < norm.size(); ++i) idx[i] = i;
        Tensor cond_raw = channel_subset(test_ds, idx, m.cfg.cond_channels);
        Tensor real_raw = channel_subset(test_ds, idx, m.cfg.target_channels);
        Tensor fake_raw = generate_series(m, cond_raw, rng.next_u64());
        // FID over normalized target channels
        auto normalize_t = [&](const Tensor& t) {
            std::vector<double> v(t.data().begin(), t.data().end());
            std::size_t o = 0;
            for (std::size_t b = 0; b < t.dim(0); ++b)
                for (std::size_t c : m.cfg.target_channels)
                    for (std::size_t s = 0; s < m.timesteps; ++s, ++o)
                        v[o] = (v[o] - m.norm_mean[c]) / m.norm_stddev[c];
            return Tensor(t.shape(), std::move(v));
        };
        Tensor real_n = normalize_t(real_raw);
        Tensor fake_n = normalize_t(fake_raw);
        rep.fid.emplace_back("all", eval::mts_fid(real_n, fake_n, extractor));
        double dtw_sum = 0.0;
        const std::size_t C = m.cfg.target_channels.size();
        for (std::size_t i = 0; i < norm.size(); ++i) {
            // compare per sample as [T, C] sequences
            Tensor a = transpose_last2(slice(real_n, 0, i, 1));
            Tensor b = transpose_last2(slice(fake_n, 0, i, 1));
            dtw_sum += eval::dtw(reshape(a, {m.timesteps, C}),
                                 reshape(b, {m.timesteps, C}))
                           .cost;
        }
        rep.mean_dtw = dtw_sum / static_cast<double>(norm.size());
        if (!out_dir.empty()) {
            Tensor rf = eval::extract_features(real_n, extractor);
            Tensor ff = eval::extract_features(fake_n, extractor);
            std::vector<std::size_t> labels(norm.size());
            for (std::size_t i = 0; i < norm.size(); ++i)
                labels[i] = norm.samples[i].class_id;
            write_pca_csv(out_dir + "/pca.csv", rf, ff, labels);
            write_hist_csv(out_dir + "/hist.csv", real_n, fake_n);
        }
    }
    if (!out_dir.empty()) {
        std::ofstream out(out_dir + "/report.json");
        if (!out) throw TensorError("evaluate: cannot write " + out_dir);
        out << rep.to_json().dump(2) << '\n';
    }
    return rep;
}

std::vector<SweepRow> alpha_sweep(const data::Dataset& ds,
                                  const TrainConfig& base,
                                  const std::vector<double>& alphas,
                                  const std::vector<std::uint64_t>& seeds,
                                  const std::string& out_dir) {
    if (alphas.empty() || seeds.empty())
        throw TensorError("alpha_sweep: need at least one alpha and one seed");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0))
            throw TensorError("alpha_sweep: alpha " + std::to_string(a) +
                              " outside (0,1)");
    // one shared extractor keeps feature space comparable across runs
    const TrainConfig rcfg = resolve_config(ds, base);
    data::SplitSpec sspec = rcfg.split;
    sspec.seed = rcfg.seed;
    const data::Split split = data::make_split(ds, sspec);
    const data::Dataset norm = data::normalize(ds, split.train);
    const auto task_channels = rcfg.task == Task::Categorical
                                   ? all_channels(ds.channels)
                                   : rcfg.target_channels;
    data::Dataset ftrain = subset_dataset(norm, split.train, task_channels);
    data::Dataset fval = subset_dataset(norm, split.val, task_channels);
    Rng frng(rcfg.seed ^ 0xa1fa);
    eval::FcnTrainConfig ftc;
    ftc.epochs = rcfg.fcn_epochs;
    eval::FcnClassifierParams extractor =
        eval::train_fcn(ftrain, fval, rcfg.fcn, ftc, frng);

    const std::size_t per_class = 24;
    const std::size_t K = ds.n_classes();
    std::vector<SweepRow> rows;
    for (double alpha : alphas) {
        SweepRow row;
        row.alpha = alpha;
        row.n_seeds = seeds.size();
        for (std::uint64_t seed : seeds) {
            TrainConfig cfg = base;
            cfg.gen.alpha = alpha;
            cfg.seed = seed;
            TrainResult res = train(ds, cfg, "");
            LoadedModel m = model_from_checkpoint(res.checkpoint);
            row.fid += res.best_fid;
            // per-class feature clouds from fresh generations
            NoGradGuard ng;
            std::vector<std::vector<double>> centroids;
            double intra = 0.0;
            for (std::size_t c = 0; c < K; ++c) {
                data::Dataset g = generate_batch(
                    m, std::vector<std::size_t>(per_class, c),
                    seed ^ (0x51eed + c));
                std::vector<std::size_t> idx(g.size());
                for (std::size_t i = 0; i < g.size(); ++i) idx[i] = i;
                // back into the model's normalized space for the extractor
                data::Dataset gm = g;
                for (auto& s : gm.samples)
                    for (std::size_t ch = 0; ch < gm.channels; ++ch)
                        for (std::size_t t = 0; t < gm.timesteps; ++t)
                            s.values[ch * gm.timesteps + t] =
                                (s.values[ch * gm.timesteps + t] -
                                 m.norm_mean[ch]) /
                                m.norm_stddev[ch];
                Tensor feats = eval::extract_features(
                    data::batch_tensor(gm, idx), extractor);
                const std::size_t d = feats.dim(1);
                double pair_sum = 0.0;
                std::size_t pairs = 0;
                std::vector<double> centroid(d, 0.0);
                for (std::size_t i = 0; i < per_class; ++i) {
                    for (std::size_t j = 0; j < d; ++j)
                        centroid[j] += feats.data()[i * d + j];
                    for (std::size_t j2 = i + 1; j2 < per_class; ++j2) {
                        double sq = 0.0;
                        for (std::size_t j = 0; j < d; ++j) {
                            const double dv = feats.data()[i * d + j] -
                                              feats.data()[j2 * d + j];
                            sq += dv * dv;
                        }
                        pair_sum += std::sqrt(sq);
                        ++pairs;
                    }
                }
                for (double& x : centroid) x /= per_class;
                centroids.push_back(std::move(centroid));
                intra += pair_sum / static_cast<double>(pairs);
            }
            row.intra_dispersion += intra / static_cast<double>(K);
            double inter = 0.0;
            std::size_t cpairs = 0;
            for (std::size_t a = 0; a < K; ++a)
                for (std::size_t b = a + 1; b < K; ++b) {
                    double sq = 0.0;
                    for (std::size_t j = 0; j < centroids[a].size(); ++j) {
                        const double dv = centroids[a][j] - centroids[b][j];
                        sq += dv * dv;
                    }
                    inter += std::sqrt(sq);
                    ++cpairs;
                }
            row.inter_separation += inter / static_cast<double>(cpairs);
        }
        const double ns = static_cast<double>(seeds.size());
        row.fid /= ns;
        row.intra_dispersion /= ns;
        row.inter_separation /= ns;
        rows.push_back(row);
    }
    if (!out_dir.empty()) {
        std::ofstream out(out_dir + "/alpha_sweep.csv");
        out << "alpha,fid,intra_dispersion,inter_separation,n_seeds\n";
        for (const auto& r : rows)
            out << r.alpha << ',' << r.fid << ',' << r.intra_dispersion << ','
                << r.inter_separation << ',' << r.n_seeds << '\n';
    }
    return rows;
}

namespace {

struct Confusion {
    std::vector<std::size_t> counts;  // [K, K] true x predicted
    std::size_t k = 0;

    explicit Confusion(std::size_t K) : counts(K * K, 0), k(K) {}
    void add(std::size_t truth, std::size_t pred) {
        ++counts[truth * k + pred];
    }
    ClassMetrics metrics(std::size_t c) const {
        std::size_t tp = counts[c * k + c], fp = 0, fn = 0;
        for (std::size_t o = 0; o < k; ++o) {
            if (o == c) continue;
            fp += counts[o * k + c];
            fn += counts[c * k + o];
        }
        ClassMetrics m;
        m.precision = tp + fp ? static_cast<double>(tp) /
                                    static_cast<double>(tp + fp)
                              : 0.0;
        m.recall = tp + fn ? static_cast<double>(tp) /
                                 static_cast<double>(tp + fn)
                           : 0.0;
        m.f1 = m.precision + m.recall > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
        return m;
    }
    double accuracy() const {
        std::size_t hit = 0, total = 0;
        for (std::size_t t = 0; t < k; ++t)
            for (std::size_t p = 0; p < k; ++p) {
                total += counts[t * k + p];
                if (t == p) hit += counts[t * k + p];
            }
        return total ? static_cast<double>(hit) / static_cast<double>(total)
                     : 0.0;
    }
};

void apply_stats(data::Dataset& ds, const std::vector<double>& mean,
                 const std::vector<double>& sd) {
    for (auto& s : ds.samples)
        for (std::size_t c = 0; c < ds.channels; ++c)
            for (std::size_t t = 0; t < ds.timesteps; ++t)
                s.values[c * ds.timesteps + t] =
                    (s.values[c * ds.timesteps + t] - mean[c]) / sd[c];
    ds.normalized = true;
}

Confusion evaluate_classifier(const data::Dataset& test,
                              eval::FcnClassifierParams& p, std::size_t K) {
    Confusion conf(K);
    const std::size_t batch = 64;
    for (std::size_t start = 0; start < test.size(); start += batch) {
        const std::size_t n = std::min(batch, test.size() - start);
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = start + i;
        auto pred = eval::fcn_predict(data::batch_tensor(test, idx), p);
        for (std::size_t i = 0; i < n; ++i)
            conf.add(test.samples[start + i].class_id, pred[i]);
    }
    return conf;
}

}  // namespace

json AugmentReport::to_json() const {
    json j;
    j["target_class"] = target_class;
    j["minority_recall_before"] = minority_recall_before;
    j["minority_recall_after"] = minority_recall_after;
    j["accuracy_before"] = accuracy_before;
    j["accuracy_after"] = accuracy_after;
    json runs_j = json::array();
    for (const auto& r : runs) {
        json rj = {{"seed", r.seed},
                   {"counts_before", r.counts_before},
                   {"counts_after", r.counts_after},
                   {"accuracy_before", r.accuracy_before},
                   {"accuracy_after", r.accuracy_after}};
        json pb = json::array(), pa = json::array();
        for (const auto& m : r.before)
            pb.push_back({{"precision", m.precision},
                          {"recall", m.recall},
                          {"f1", m.f1}});
        for (const auto& m : r.after)
            pa.push_back({{"precision", m.precision},
                          {"recall", m.recall},
                          {"f1", m.f1}});
        rj["per_class_before"] = pb;
        rj["per_class_after"] = pa;
        runs_j.push_back(rj);
    }
    j["runs"] = runs_j;
    return j;
}

AugmentReport augment_cmd(const data::Dataset& ds, const LoadedModel& m,
                          std::size_t target_class,
                          const eval::FcnConfig& fcfg,
                          const eval::FcnTrainConfig& ftcfg,
                          const std::vector<std::uint64_t>& seeds,
                          const std::string& out_dir) {
    ds.validate();
    if (seeds.empty()) throw TensorError("augment: need at least one seed");
    if (m.class_names.size() != ds.n_classes() || m.channels != ds.channels)
        throw TensorError("augment: checkpoint classes/channels do not match the dataset");
    if (target_class >= ds.n_classes())
        throw TensorError("augment: target class out of range");

    AugmentReport rep;
    rep.target_class = target_class;
    for (std::uint64_t seed : seeds) {
        data::SplitSpec sspec;
        sspec.seed = seed;
        data::Split split = data::make_split(ds, sspec);
        data::Dataset train_raw = subset_dataset(ds, split.train,
                                                 all_channels(ds.channels));
        data::Dataset val_raw =
            subset_dataset(ds, split.val, all_channels(ds.channels));
        data::Dataset test_raw =
            subset_dataset(ds, split.test, all_channels(ds.channels));

        const auto counts = train_raw.class_counts();
        const std::size_t max_count =
            *std::max_element(counts.begin(), counts.end());
        if (counts[target_class] >= max_count)
            throw TensorError("augment: class " +
                              std::to_string(target_class) +
                              " is not under-represented in the train split");

        AugmentRun run;
        run.seed = seed;
        run.counts_before = counts;

        // the test split never receives generated samples
        data::Dataset balanced = train_raw;
        data::Dataset gen = generate_batch(
            m,
            std::vector<std::size_t>(max_count - counts[target_class],
                                     target_class),
            seed ^ 0x9a9a);
        for (auto& s : gen.samples) balanced.samples.push_back(std::move(s));
        run.counts_after = balanced.class_counts();

        auto train_and_score = [&](const data::Dataset& tr, std::uint64_t s) {
            std::vector<std::size_t> stats_idx(tr.size());
            for (std::size_t i = 0; i < tr.size(); ++i) stats_idx[i] = i;
            data::Dataset trn = data::normalize(tr, stats_idx);
            data::Dataset va = val_raw;
            apply_stats(va, trn.mean, trn.stddev);
            data::Dataset te = test_raw;
            apply_stats(te, trn.mean, trn.stddev);
            Rng rng(s);
            eval::FcnConfig fc = fcfg;
            fc.channels = ds.channels;
            fc.n_classes = ds.n_classes();
            auto p = eval::train_fcn(trn, va, fc, ftcfg, rng);
            return evaluate_classifier(te, p, ds.n_classes());
        };
        Confusion before = train_and_score(train_raw, seed ^ 0xb4);
        Confusion after = train_and_score(balanced, seed ^ 0xaf);
        run.accuracy_before = before.accuracy();
        run.accuracy_after = after.accuracy();
        for (std::size_t c = 0; c < ds.n_classes(); ++c) {
            run.before.push_back(before.metrics(c));
            run.after.push_back(after.metrics(c));
        }
        rep.minority_recall_before += run.before[target_class].recall;
        rep.minority_recall_after += run.after[target_class].recall;
        rep.accuracy_before += run.accuracy_before;
        rep.accuracy_after += run.accuracy_after;
        rep.runs.push_back(std::move(run));
    }
    const double ns = static_cast<double>(seeds.size());
    rep.minority_recall_before /= ns;
    rep.minority_recall_after /= ns;
    rep.accuracy_before /= ns;
    rep.accuracy_after /= ns;
    if (!out_dir.empty()) {
        std::ofstream out(out_dir + "/augment.json");
        if (!out) throw TensorError("augment: cannot write " + out_dir);
        out << rep.to_json().dump(2) << '\n';
    }
    return rep;
}

ckpt::Checkpoint fcn_to_checkpoint(eval::FcnClassifierParams& p,
                                   const std::vector<double>& norm_mean,
                                   const std::vector<double>& norm_stddev) {
    ckpt::Checkpoint c;
    c.config = {{"type", "fcn"},
                {"fcn",
                 {{"channels", p.cfg.channels},
                  {"n_classes", p.cfg.n_classes},
                  {"filters", p.cfg.filters},
                  {"kernels", p.cfg.kernels}}}};
    eval::visit(p, "fcn.", [&c](const std::string& name, Tensor& t) {
        c.blocks.emplace_back(name, t.detach());
    });
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& bn = p.blocks[i].bn;
        c.blocks.emplace_back(
            "fcn.block" + std::to_string(i) + ".bn.run_mean",
            Tensor({bn.run_mean.size()}, bn.run_mean));
        c.blocks.emplace_back(
            "fcn.block" + std::to_string(i) + ".bn.run_var",
            Tensor({bn.run_var.size()}, bn.run_var));
    }
    c.blocks.emplace_back("norm.mean",
                          Tensor({norm_mean.size()}, norm_mean));
    c.blocks.emplace_back("norm.stddev",
                          Tensor({norm_stddev.size()}, norm_stddev));
    return c;
}

eval::FcnClassifierParams fcn_from_checkpoint(const ckpt::Checkpoint& c,
                                              std::vector<double>* norm_mean,
                                              std::vector<double>* norm_stddev) {
    if (c.config.value("type", "") != "fcn")
        throw TensorError("checkpoint: not an extractor checkpoint");
    eval::FcnConfig cfg;
    const auto& f = c.config.at("fcn");
    cfg.channels = f.at("channels").get<std::size_t>();
    cfg.n_classes = f.at("n_classes").get<std::size_t>();
    cfg.filters = f.at("filters").get<std::array<std::size_t, 3>>();
    cfg.kernels = f.at("kernels").get<std::array<std::size_t, 3>>();
    Rng dummy(0);
    eval::FcnClassifierParams p = eval::make_fcn(cfg, dummy);
    eval::visit(p, "fcn.", [&c](const std::string& name, Tensor& t) {
        const Tensor& b = c.block(name);
        if (b.shape() != t.shape())
            throw TensorError("checkpoint: block '" + name +
                              "' has shape " + shape_str(b.shape()) +
                              ", expected " + shape_str(t.shape()));
        t = b.detach().set_requires_grad(true);
    });
    for (std::size_t i = 0; i < 3; ++i) {
        auto& bn = p.blocks[i].bn;
        auto rm = c.block("fcn.block" + std::to_string(i) + ".bn.run_mean");
        auto rv = c.block("fcn.block" + std::to_string(i) + ".bn.run_var");
        bn.run_mean.assign(rm.data().begin(), rm.data().end());
        bn.run_var.assign(rv.data().begin(), rv.data().end());
    }
    if (norm_mean) {
        const Tensor& t = c.block("norm.mean");
        norm_mean->assign(t.data().begin(), t.data().end());
    }
    if (norm_stddev) {
        const Tensor& t = c.block("norm.stddev");
        norm_stddev->assign(t.data().begin(), t.data().end());
    }
    return p;
}

std::vector<std::pair<double, double>> fid_ramp(
    const Tensor& real, eval::FcnClassifierParams& extractor,
    const std::vector<double>& sigmas, std::uint64_t seed,
    const std::string& out_csv) {
    if (sigmas.size() < 2)
        throw TensorError("fid_ramp: need at least 2 noise levels");
    Rng rng(seed);
    std::vector<std::pair<double, double>> rows;
    for (double sigma : sigmas) {
        std::vector<double> v(real.data().begin(), real.data().end());
        if (sigma != 0.0)
            for (auto& x : v) x += sigma * rng.normal();
        const double fid =
            eval::mts_fid(real, Tensor(real.shape(), std::move(v)), extractor);
        rows.emplace_back(sigma, fid);
    }
    if (!out_csv.empty()) {
        std::ofstream out(out_csv);
        if (!out) throw TensorError("fid_ramp: cannot write " + out_csv);
        out << "sigma,fid\n";
        for (const auto& [s, f] : rows) out << s << ',' << f << '\n';
    }
    return rows;
}

}  // namespace mtscgan::pipe
