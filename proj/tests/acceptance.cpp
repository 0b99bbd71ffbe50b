// Acceptance suite. Each criterion is a self-contained check that prints one
// [PASS]/[FAIL] line; run with a criterion number (1..10) or with no argument
// for the full list. Tolerances are pinned here, next to each check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "mtscgan/cgan.hpp"
#include "mtscgan/checkpoint.hpp"
#include "mtscgan/data.hpp"
#include "mtscgan/evaluation.hpp"
#include "mtscgan/pipeline.hpp"
#include "mtscgan/rng.hpp"
#include "mtscgan/tensor.hpp"

using namespace mtscgan;

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

Tensor randt(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = rng.uniform(lo, hi);
    return Tensor(std::move(shape), std::move(v));
}

// Small FFT-separable synthetic set; classes differ only by base frequency.
data::Dataset synth(std::uint64_t seed, std::size_t per_class,
                    std::size_t channels, std::size_t timesteps,
                    double noise = 0.1) {
    data::SyntheticSpec spec;
    spec.classes = {{2.0, {1.0}, noise},
                    {5.0, {1.0}, noise},
                    {9.0, {1.0}, noise}};
    spec.channels = channels;
    spec.timesteps = timesteps;
    spec.per_class = per_class;
    spec.seed = seed;
    return data::generate_synthetic(spec);
}

pipe::TrainConfig small_train_config(std::uint64_t seed) {
    pipe::TrainConfig cfg;
    cfg.loss.kind = cgan::LossKind::LSGAN;
    cfg.gen.latent_dim = 16;
    cfg.gen.alpha = 0.9;
    cfg.gen.embed_channels = 16;
    cfg.gen.n_layers = 1;
    cfg.gen.n_heads = 2;
    cfg.disc.patch_len = 8;
    cfg.disc.embed_dim = 32;
    cfg.disc.n_layers = 2;
    cfg.disc.n_heads = 2;
    cfg.disc.cond_dim = 16;
    cfg.disc.pre_channels = 8;
    cfg.fcn.filters = {16, 24, 16};
    cfg.fcn_epochs = 8;
    cfg.batch = 8;
    cfg.lr_g = 2e-3;
    cfg.lr_d = 2e-3;
    cfg.fid_every = 5;
    cfg.patience = 100;  // criteria measure trends, not stopping
    cfg.seed = seed;
    return cfg;
}

struct TempDir {
    std::string path;
    explicit TempDir(const std::string& name) : path("/tmp/" + name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

data::Dataset take(const data::Dataset& ds,
                   const std::vector<std::size_t>& idx) {
    data::Dataset out = ds;
    out.samples.clear();
    for (std::size_t i : idx) out.samples.push_back(ds.samples.at(i));
    return out;
}

// Fit the classifier on its own stratified split of a raw dataset; the
// normalization stats used are returned inside the dataset copy.
eval::FcnClassifierParams fit_oracle(const data::Dataset& ds,
                                     const eval::FcnConfig& base,
                                     std::size_t epochs, std::uint64_t seed,
                                     data::Dataset& norm_out) {
    eval::FcnConfig fcfg = base;
    fcfg.channels = ds.channels;
    fcfg.n_classes = ds.n_classes();
    data::SplitSpec sspec;
    sspec.seed = seed;
    const data::Split split = data::make_split(ds, sspec);
    norm_out = data::normalize(ds, split.train);
    eval::FcnTrainConfig ftc;
    ftc.epochs = epochs;
    Rng rng(seed);
    return eval::train_fcn(take(norm_out, split.train),
                           take(norm_out, split.val), fcfg, ftc, rng);
}

// ---- criterion 1: gradient correctness ----

struct OpCheck {
    std::string name;
    Shape shape;
    double off;  // shift keeps log/sqrt/relu away from kinks
    std::function<Tensor(const Tensor&)> f;
};

std::vector<OpCheck> op_suite(Rng& rng) {
    Tensor c23 = randt(rng, {2, 3});
    Tensor c234 = randt(rng, {2, 3, 4});
    Tensor c34 = randt(rng, {3, 4});
    Tensor c42 = randt(rng, {4, 2});
    Tensor c24 = randt(rng, {2, 4});
    auto sq = [](const Tensor& t) { return mean_all(square(t)); };
    return {
        {"add", {2, 3}, 0.0, [=](const Tensor& x) { return sq(add(x, c23)); }},
        {"sub_lhs", {2, 3}, 0.0,
         [=](const Tensor& x) { return sq(sub(x, c23)); }},
        {"sub_rhs", {2, 3}, 0.0,
         [=](const Tensor& x) { return sq(sub(c23, x)); }},
        {"mul", {2, 3}, 0.0, [=](const Tensor& x) { return sq(mul(x, c23)); }},
        {"div_num", {2, 3}, 0.0,
         [=](const Tensor& x) { return sq(div(x, add_scalar(square(c23), 1.0))); }},
        {"div_den", {2, 3}, 3.0,
         [=](const Tensor& x) { return sq(div(c23, x)); }},
        {"neg", {2, 3}, 0.0, [=](const Tensor& x) { return sq(neg(x)); }},
        {"scale", {2, 3}, 0.0,
         [=](const Tensor& x) { return sq(scale(x, -1.7)); }},
        {"add_scalar", {2, 3}, 0.0,
         [=](const Tensor& x) { return sq(add_scalar(x, 0.3)); }},
        {"matmul_lhs", {3, 4}, 0.0,
         [=](const Tensor& x) { return sq(matmul(x, c42)); }},
        {"matmul_rhs", {4, 2}, 0.0,
         [=](const Tensor& x) { return sq(matmul(c34, x)); }},
        {"bmm", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(bmm(x, transpose_last2(x))); }},
        {"transpose", {3, 4}, 0.0,
         [=](const Tensor& x) { return sq(transpose(x)); }},
        {"transpose_last2", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(transpose_last2(x)); }},
        {"reshape", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(reshape(x, {4, 6})); }},
        {"concat", {2, 3}, 0.0,
         [=](const Tensor& x) { return sq(concat({x, c23, x}, 1)); }},
        {"slice", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(slice(x, 2, 1, 2)); }},
        {"sum_all", {2, 3}, 0.0,
         [=](const Tensor& x) { return square(sum_all(x)); }},
        {"tile_all", {1}, 0.0,
         [=](const Tensor& x) { return sq(mul(tile_all(x, {2, 3}), c23)); }},
        {"row_sum_bcast", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(mul(row_sum_bcast(x), c234)); }},
        {"row_mean_bcast", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(mul(row_mean_bcast(x), c234)); }},
        {"sum_last", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(mul(sum_last(x), c23)); }},
        {"tile_last", {2, 3}, 0.0,
         [=](const Tensor& x) { return sq(mul(tile_last(x, 4), c234)); }},
        {"sum_leading", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(sum_leading(x)); }},
        {"tile_leading", {4}, 0.0,
         [=](const Tensor& x) { return sq(mul(tile_leading(x, {2, 3}), c234)); }},
        {"tile_axis0", {3, 4}, 0.0,
         [=](const Tensor& x) { return sq(mul(tile_axis0(x, 2), c234)); }},
        {"sum_axis0", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(mul(sum_axis0(x), c34)); }},
        {"sum_axis2", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(mul(sum_axis2(x), c23)); }},
        {"tile_axis2", {2, 3}, 0.0,
         [=](const Tensor& x) { return sq(mul(tile_axis2(x, 4), c234)); }},
        {"bn_mean_bcast", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(mul(bn_mean_bcast(x), c234)); }},
        {"log", {2, 3}, 3.0, [=](const Tensor& x) { return sq(log(x)); }},
        {"exp", {2, 3}, 0.0, [=](const Tensor& x) { return sq(exp(x)); }},
        {"sqrt", {2, 3}, 3.0, [=](const Tensor& x) { return sq(sqrt(x)); }},
        {"square", {2, 3}, 0.0, [=](const Tensor& x) { return sq(square(x)); }},
        {"sigmoid", {2, 3}, 0.0,
         [=](const Tensor& x) { return sq(sigmoid(x)); }},
        {"gelu", {2, 3}, 0.0, [=](const Tensor& x) { return sq(gelu(x)); }},
        {"relu", {2, 3}, 3.0, [=](const Tensor& x) { return sq(relu(x)); }},
        {"abs", {2, 3}, 3.0, [=](const Tensor& x) { return sq(abs(x)); }},
        {"softmax_last", {2, 4}, 0.0,
         [=](const Tensor& x) { return sq(mul(softmax_last(x), c24)); }},
        {"unfold1d", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(unfold1d(x, 3, 1, 1)); }},
        {"extract_patches", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(extract_patches(x, 2)); }},
        {"mean_all", {2, 3}, 0.0,
         [=](const Tensor& x) { return square(mean_all(x)); }},
        {"mean_axis2", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(mul(mean_axis2(x), c23)); }},
        {"layernorm_last", {2, 3, 4}, 0.0,
         [=](const Tensor& x) { return sq(mul(layernorm_last(x), c234)); }},
        {"softplus", {2, 3}, 0.0,
         [=](const Tensor& x) { return sq(softplus(x)); }},
        {"l2norm", {2, 3}, 3.0, [=](const Tensor& x) { return l2norm(x); }},
        {"l2norm_rows", {2, 3}, 3.0,
         [=](const Tensor& x) { return sum_all(l2norm_rows(x)); }},
    };
}

// Central difference on a few coordinates of `probe` against the analytic
// gradient of loss_fn(); relative error per the criterion's definition.
double probe_fd(const std::function<Tensor()>& loss_fn, Tensor& probe) {
    Tensor analytic = grad_of(backward(loss_fn()), probe);
    auto vals = probe.mutable_data();
    double max_err = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t j = (i * 13 + 1) % vals.size();
        const double orig = vals[j];
        const double eps = 1e-5;
        vals[j] = orig + eps;
        const double fp = loss_fn().item();
        vals[j] = orig - eps;
        const double fm = loss_fn().item();
        vals[j] = orig;
        const double fd = (fp - fm) / (2 * eps);
        const double a = analytic.data()[j];
        max_err =
            std::max(max_err, std::abs(a - fd) / std::max(1.0, std::abs(a)));
    }
    return max_err;
}

bool criterion_1() {
    const double tol = 1e-4;
    const std::size_t n_seeds = 20;
    double worst = 0.0;
    std::string worst_name;
    for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
        Rng rng(seed);
        for (auto& chk : op_suite(rng)) {
            Tensor x = randt(rng, chk.shape, -1.0 + chk.off, 1.0 + chk.off);
            const double err = grad_check(chk.f, x);
            if (err > worst) {
                worst = err;
                worst_name = chk.name;
            }
        }

        // the three full losses on a tiny model, both D and G terms
        cgan::GenConfig gcfg;
        gcfg.latent_dim = 8;
        gcfg.seq_len = 12;
        gcfg.embed_channels = 8;
        gcfg.out_channels = 2;
        gcfg.n_layers = 1;
        gcfg.n_heads = 2;
        gcfg.cond = {cgan::ConditionSpec::Kind::Categorical, 3, 0, 0};
        cgan::DiscConfig dcfg;
        dcfg.patch_len = 4;
        dcfg.embed_dim = 8;
        dcfg.n_layers = 1;
        dcfg.n_heads = 2;
        dcfg.in_channels = 2;
        dcfg.cond_dim = 4;
        dcfg.pre_channels = 4;
        dcfg.seq_len = 12;
        dcfg.cond = gcfg.cond;
        auto gen = cgan::make_generator(gcfg, rng);
        auto disc = cgan::make_discriminator(dcfg, rng);
        auto cond = cgan::categorical_batch({0, 1}, 3);
        Tensor z = cgan::sample_noise(2, gcfg.latent_dim, rng);
        Tensor real = randt(rng, {2, 2, 12});
        cgan::LossConfig lcfg;
        cgan::LossConfig wcfg;
        wcfg.kind = cgan::LossKind::WGANGP;
        auto losses = [&](bool d_term) {
            std::vector<std::pair<std::string, std::function<Tensor()>>> out;
            auto pick = [d_term](cgan::LossPair p) {
                return d_term ? p.d : p.g;
            };
            out.emplace_back("standard", [&, pick] {
                Tensor fake = cgan::generate(z, cond, gen, gcfg);
                return pick(cgan::loss_standard(
                    cgan::discriminate(real, cond, disc, dcfg),
                    cgan::discriminate(fake, cond, disc, dcfg)));
            });
            out.emplace_back("lsgan", [&, pick] {
                Tensor fake = cgan::generate(z, cond, gen, gcfg);
                return pick(cgan::loss_lsgan(
                    cgan::discriminate(real, cond, disc, dcfg),
                    cgan::discriminate(fake, cond, disc, dcfg), lcfg));
            });
            out.emplace_back("wgan-gp", [&, pick, seed] {
                Tensor fake = cgan::generate(z, cond, gen, gcfg);
                Rng gp(seed * 31 + 7);
                return pick(cgan::loss_wgan_gp(real, fake, cond, disc, dcfg,
                                               wcfg, gp));
            });
            return out;
        };
        for (auto& [name, fn] : losses(true)) {
            const double err = probe_fd(fn, disc.layers[0].mlp1.w);
            if (err > worst) {
                worst = err;
                worst_name = name + ".d";
            }
        }
        for (auto& [name, fn] : losses(false)) {
            const double err = probe_fd(fn, gen.layers[0].mlp1.w);
            if (err > worst) {
                worst = err;
                worst_name = name + ".g";
            }
        }
    }
    std::cout << (worst < tol ? "[PASS]" : "[FAIL]")
              << " criterion 1: gradient correctness, worst relative error "
              << worst << " (" << worst_name << ") over " << n_seeds
              << " seeds, tolerance " << tol << "\n";
    return worst < tol;
}

// ---- criterion 2: FID analytics ----

bool criterion_2() {
    // 1-D closed form: (m1-m2)^2 + v1 + v2 - 2 sqrt(v1 v2)
    auto stats1d = [](double m, double v) {
        eval::GaussianStats s;
        s.mu = {m};
        s.sigma = {v};
        s.n = 2;
        return s;
    };
    double worst = 0.0;
    auto check = [&](double got, double want) {
        worst = std::max(worst, std::abs(got - want));
    };
    check(eval::frechet_distance(stats1d(0.0, 1.0), stats1d(3.0, 1.0)), 9.0);
    check(eval::frechet_distance(stats1d(1.0, 1.0), stats1d(1.0, 4.0)), 1.0);
    check(eval::frechet_distance(stats1d(-2.0, 0.25), stats1d(1.0, 4.0)),
          9.0 + 0.25 + 4.0 - 2.0);
    // diagonal 2-D: sum of the per-dimension closed forms
    eval::GaussianStats a, b;
    a.mu = {0.0, 1.0};
    a.sigma = {1.0, 0.0, 0.0, 4.0};
    a.n = 2;
    b.mu = {2.0, 1.0};
    b.sigma = {9.0, 0.0, 0.0, 1.0};
    b.n = 2;
    check(eval::frechet_distance(a, b),
          (4.0 + 1.0 + 9.0 - 6.0) + (4.0 + 1.0 - 4.0));
    const bool forms_ok = worst < 1e-10;

    Rng rng(5);
    eval::FcnConfig fcfg;
    fcfg.channels = 2;
    fcfg.n_classes = 3;
    fcfg.filters = {8, 12, 8};
    auto p = eval::make_fcn(fcfg, rng);
    Tensor x = randt(rng, {16, 2, 20});
    const double self = eval::mts_fid(x, x, p);
    const bool self_ok = self <= 1e-8;

    const bool ok = forms_ok && self_ok;
    std::cout << (ok ? "[PASS]" : "[FAIL]")
              << " criterion 2: FID analytics, closed-form error " << worst
              << " (tol 1e-10), self-score " << self << " (tol 1e-8)\n";
    return ok;
}

// ---- criterion 3: score ramps with additive noise ----

bool criterion_3() {
    data::Dataset ds = synth(301, 30, 2, 32);
    data::Dataset norm;
    eval::FcnConfig fcfg;
    fcfg.filters = {16, 24, 16};
    auto extractor = fit_oracle(ds, fcfg, 8, 302, norm);
    std::vector<std::size_t> idx(norm.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Tensor real = data::batch_tensor(norm, idx);

    const std::vector<double> sigmas{0.1, 0.2, 0.4, 0.8};
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed : {401u, 402u, 403u}) {
        auto rows = pipe::fid_ramp(real, extractor, sigmas, seed, "");
        detail += " seed " + std::to_string(seed) + ":";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            detail += " " + std::to_string(rows[i].second);
            if (i > 0 && !(rows[i].second > rows[i - 1].second)) ok = false;
        }
    }
    std::cout << (ok ? "[PASS]" : "[FAIL]")
              << " criterion 3: FID strictly increases with noise level;"
              << detail << "\n";
    return ok;
}

// ---- criterion 4: DTW oracle equivalence ----

double dtw_bruteforce(const Tensor& a, const Tensor& b) {
    const std::size_t n = a.dim(0), m = b.dim(0);
    const std::size_t d = a.rank() == 1 ? 1 : a.dim(1);
    auto dist = [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double dv = a.data()[i * d + k] - b.data()[j * d + k];
            s += dv * dv;
        }
        return std::sqrt(s);
    };
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::size_t, double)> go =
        [&](std::size_t i, std::size_t j, double acc) {
            acc += dist(i, j);
            if (acc >= best) return;
            if (i == n - 1 && j == m - 1) {
                best = acc;
                return;
            }
            if (i + 1 < n && j + 1 < m) go(i + 1, j + 1, acc);
            if (i + 1 < n) go(i + 1, j, acc);
            if (j + 1 < m) go(i, j + 1, acc);
        };
    go(0, 0, 0.0);
    return best;
}

bool criterion_4() {
    Rng rng(44);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.index(6), m = 1 + rng.index(6);
        const std::size_t d = 1 + rng.index(3);
        Tensor a = randt(rng, {n, d});
        Tensor b = randt(rng, {m, d});
        worst = std::max(
            worst, std::abs(eval::dtw(a, b).cost - dtw_bruteforce(a, b)));
    }
    // identical DP and enumeration arithmetic; equality is exact
    const bool ok = worst == 0.0;
    std::cout << (ok ? "[PASS]" : "[FAIL]")
              << " criterion 4: DTW equals brute-force path enumeration on "
                 "100 pairs, max deviation "
              << worst << "\n";
    return ok;
}

// ---- criterion 5: conditional learning, categorical ----

bool criterion_5() {
    const std::vector<std::uint64_t> seeds{501, 504, 505};
    double ratio_sum = 0.0;
    std::vector<double> class_acc(3, 0.0);
    for (std::uint64_t seed : seeds) {
        data::Dataset ds = synth(seed, 200, 2, 32);
        pipe::TrainConfig cfg = small_train_config(seed);
        cfg.epochs = 300;
        pipe::TrainResult res = pipe::train(ds, cfg, "");
        ratio_sum += res.best_fid / res.logs[0].fid;

        // independently trained oracle classifier on the raw dataset
        data::Dataset norm;
        eval::FcnConfig fcfg;
        fcfg.filters = {16, 24, 16};
        auto oracle = fit_oracle(ds, fcfg, 12, seed ^ 0x5a5a, norm);

        pipe::LoadedModel m = pipe::model_from_checkpoint(res.checkpoint);
        for (std::size_t c = 0; c < 3; ++c) {
            data::Dataset gen = pipe::generate_batch(
                m, std::vector<std::size_t>(50, c), seed * 977 + c);
            for (auto& s : gen.samples)
                for (std::size_t ch = 0; ch < gen.channels; ++ch)
                    for (std::size_t t = 0; t < gen.timesteps; ++t)
                        s.values[ch * gen.timesteps + t] =
                            (s.values[ch * gen.timesteps + t] -
                             norm.mean[ch]) /
                            norm.stddev[ch];
            std::vector<std::size_t> idx(gen.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            auto pred =
                eval::fcn_predict(data::batch_tensor(gen, idx), oracle);
            double hit = 0.0;
            for (std::size_t p : pred) hit += p == c;
            class_acc[c] += hit / static_cast<double>(pred.size());
        }
    }
    const double ratio = ratio_sum / seeds.size();
    bool ok = ratio <= 0.5;
    std::string acc_s;
    for (auto& a : class_acc) {
        a /= seeds.size();
        if (a < 0.8) ok = false;
        acc_s += " " + std::to_string(a);
    }
    std::cout << (ok ? "[PASS]" : "[FAIL]")
              << " criterion 5: categorical conditioning, mean best/epoch-1 "
                 "FID ratio "
              << ratio << " (need <= 0.5), per-class oracle agreement" << acc_s
              << " (need >= 0.8 each)\n";
    return ok;
}

// ---- criterion 6: conditional learning, series ----

bool criterion_6() {
    const std::vector<std::uint64_t> seeds{601, 602, 604};
    double matched_sum = 0.0, shuffled_sum = 0.0;
    for (std::uint64_t seed : seeds) {
        // channel 2 is channel 0 shifted by a fixed phase plus small noise
        data::Dataset ds = synth(seed, 200, 3, 32);
        pipe::TrainConfig cfg = small_train_config(seed);
        cfg.task = pipe::Task::Series;
        cfg.cond_channels = {0, 1};
        cfg.target_channels = {2};
        cfg.gen.alpha = 0.1;  // series generation leans on the context
        cfg.gen.latent_dim = 32;
        cfg.gen.embed_channels = 32;
        cfg.epochs = 300;
        pipe::TrainResult res = pipe::train(ds, cfg, "");
        pipe::LoadedModel m = pipe::model_from_checkpoint(res.checkpoint);

        // fresh draw from the same process as the held-out test set
        data::Dataset test = synth(seed + 9000, 16, 3, 32);
        const std::size_t B = test.size(), T = test.timesteps;
        std::vector<double> cv(B * 2 * T), tv(B * T);
        for (std::size_t i = 0; i < B; ++i) {
            const auto& v = test.samples[i].values;
            std::copy(v.begin(), v.begin() + 2 * T, cv.begin() + i * 2 * T);
            std::copy(v.begin() + 2 * T, v.begin() + 3 * T,
                      tv.begin() + i * T);
        }
        Tensor cond({B, 2, T}, cv);
        Tensor gen = pipe::generate_series(m, cond, seed * 13);
        std::vector<std::size_t> perm(B);
        for (std::size_t i = 0; i < B; ++i) perm[i] = i;
        Rng prng(seed);
        prng.shuffle(perm);
        std::vector<double> sv(B * 2 * T);
        for (std::size_t i = 0; i < B; ++i)
            std::copy(cv.begin() + perm[i] * 2 * T,
                      cv.begin() + (perm[i] + 1) * 2 * T,
                      sv.begin() + i * 2 * T);
        Tensor gen_shuf =
            pipe::generate_series(m, Tensor({B, 2, T}, sv), seed * 13);
        for (std::size_t i = 0; i < B; ++i) {
            Tensor truth({T}, {tv.begin() + i * T, tv.begin() + (i + 1) * T});
            auto row = [&](const Tensor& g) {
                return Tensor({T}, {g.data().begin() + i * T,
                                    g.data().begin() + (i + 1) * T});
            };
            matched_sum += eval::dtw(row(gen), truth).cost;
            shuffled_sum += eval::dtw(row(gen_shuf), truth).cost;
        }
    }
    const double ratio = matched_sum / shuffled_sum;
    const bool ok = ratio <= 0.6;
    std::cout << (ok ? "[PASS]" : "[FAIL]")
              << " criterion 6: series conditioning, matched/shuffled test "
                 "DTW ratio "
              << ratio << " (need <= 0.6)\n";
    return ok;
}

// ---- criterion 7: alpha dispersion trend ----

bool criterion_7() {
    data::Dataset ds = synth(701, 24, 2, 24);
    pipe::TrainConfig base = small_train_config(702);
    base.epochs = 8;
    base.fcn_epochs = 5;
    auto rows = pipe::alpha_sweep(ds, base, {0.1, 0.9}, {703, 704, 705}, "");
    const double lo = rows[0].intra_dispersion, hi = rows[1].intra_dispersion;
    const bool ok = hi > lo;
    std::cout << (ok ? "[PASS]" : "[FAIL]")
              << " criterion 7: intra-class dispersion at alpha 0.9 (" << hi
              << ") vs 0.1 (" << lo << "), averaged over 3 seeds\n";
    return ok;
}

// ---- criterion 8: augmentation trend ----

bool criterion_8() {
    // noisy enough that the classifier underfits the rare class; minority
    // class 2 kept at 40% of the majority count
    data::Dataset full = synth(801, 100, 2, 32, 1.0);
    data::Dataset ds = full;
    ds.samples.clear();
    std::size_t kept2 = 0;
    for (const auto& s : full.samples) {
        if (s.class_id == 2 && ++kept2 > 40) continue;
        ds.samples.push_back(s);
    }
    pipe::TrainConfig cfg = small_train_config(801);
    cfg.epochs = 300;
    pipe::TrainResult res = pipe::train(ds, cfg, "");
    pipe::LoadedModel m = pipe::model_from_checkpoint(res.checkpoint);

    eval::FcnConfig fcfg;
    fcfg.filters = {16, 24, 16};
    eval::FcnTrainConfig ftc;
    ftc.epochs = 6;
    pipe::AugmentReport rep =
        pipe::augment_cmd(ds, m, 2, fcfg, ftc, {803, 804, 805}, "");
    const bool ok = rep.minority_recall_after > rep.minority_recall_before;
    std::cout << (ok ? "[PASS]" : "[FAIL]")
              << " criterion 8: minority recall "
              << rep.minority_recall_before << " -> "
              << rep.minority_recall_after
              << " after balancing, averaged over 3 seeds\n";
    return ok;
}

// ---- criterion 9: determinism and persistence ----

bool criterion_9() {
    data::Dataset ds = synth(901, 12, 2, 16);
    pipe::TrainConfig cfg = small_train_config(902);
    cfg.gen.latent_dim = 8;
    cfg.gen.embed_channels = 8;
    cfg.disc.patch_len = 4;
    cfg.disc.embed_dim = 8;
    cfg.fcn.filters = {8, 12, 8};
    cfg.fcn_epochs = 2;
    cfg.epochs = 2;
    cfg.batch = 4;
    cfg.fid_every = 1;

    TempDir dir("mtscgan_accept9");
    pipe::TrainResult a = pipe::train(ds, cfg, dir.path);
    pipe::TrainResult b = pipe::train(ds, cfg, "");
    bool traces = a.logs.size() == b.logs.size();
    for (std::size_t i = 0; traces && i < a.logs.size(); ++i)
        traces = a.logs[i].loss_d == b.logs[i].loss_d &&
                 a.logs[i].loss_g == b.logs[i].loss_g &&
                 a.logs[i].fid == b.logs[i].fid;

    pipe::LoadedModel mem = pipe::model_from_checkpoint(a.checkpoint);
    pipe::LoadedModel disk = pipe::model_from_checkpoint(
        ckpt::load_checkpoint(dir.path + "/checkpoint.bin"));
    data::Dataset ga = pipe::generate_batch(mem, {0, 1, 2, 1}, 903);
    data::Dataset gb = pipe::generate_batch(disk, {0, 1, 2, 1}, 903);
    bool roundtrip = true;
    for (std::size_t i = 0; i < ga.size(); ++i)
        roundtrip = roundtrip &&
                    std::memcmp(ga.samples[i].values.data(),
                                gb.samples[i].values.data(),
                                ga.samples[i].values.size() *
                                    sizeof(double)) == 0;

    data::save_csv(ds, dir.path + "/ds.csv", dir.path + "/ds.json");
    data::Dataset re =
        data::load_csv(dir.path + "/ds.csv", dir.path + "/ds.json");
    bool csv = re.size() == ds.size();
    for (std::size_t i = 0; csv && i < ds.size(); ++i)
        csv = re.samples[i].class_id == ds.samples[i].class_id &&
              std::memcmp(re.samples[i].values.data(),
                          ds.samples[i].values.data(),
                          ds.samples[i].values.size() * sizeof(double)) == 0;

    const bool ok = traces && roundtrip && csv;
    std::cout << (ok ? "[PASS]" : "[FAIL]")
              << " criterion 9: determinism and persistence (loss traces "
              << (traces ? "bit-exact" : "DIFFER") << ", checkpoint round "
              << "trip " << (roundtrip ? "bit-exact" : "DIFFERS")
              << ", CSV round trip " << (csv ? "bit-exact" : "DIFFERS")
              << ")\n";
    return ok;
}

// ---- criterion 10: PCA contract ----

bool criterion_10() {
    Rng rng(100);
    Tensor x = randt(rng, {50, 6});
    eval::PcaModel m = eval::pca_fit(x);
    const std::size_t d = 6;
    double ortho = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k)
                dot += m.components[i * d + k] * m.components[j * d + k];
            ortho = std::max(ortho, std::abs(dot - (i == j ? 1.0 : 0.0)));
        }

    // rank-1 data: every sample a multiple of one direction
    std::vector<double> rv(30 * 4);
    for (std::size_t i = 0; i < 30; ++i) {
        const double t = rng.uniform(-2.0, 2.0);
        const double dir[4] = {0.5, -1.0, 2.0, 0.25};
        for (std::size_t k = 0; k < 4; ++k) rv[i * 4 + k] = t * dir[k] + 3.0;
    }
    eval::PcaModel r1 = eval::pca_fit(Tensor({30, 4}, rv));
    const double ratio_err = std::abs(r1.ratios[0] - 1.0);

    // full-rank reconstruction through all components
    Tensor scores = eval::pca_project(m, x, d);
    double recon = 0.0;
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            double v = m.mean[k];
            for (std::size_t j = 0; j < d; ++j)
                v += scores.data()[i * d + j] * m.components[j * d + k];
            recon = std::max(recon, std::abs(v - x.data()[i * d + k]));
        }

    const bool ok = ortho < 1e-8 && ratio_err < 1e-10 && recon < 1e-8;
    std::cout << (ok ? "[PASS]" : "[FAIL]")
              << " criterion 10: PCA orthonormality " << ortho
              << " (tol 1e-8), rank-1 ratio error " << ratio_err
              << " (tol 1e-10), reconstruction error " << recon
              << " (tol 1e-8)\n";
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<bool()>> criteria{
        criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
        criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};
    bool ok = true;
    const double t0 = now_seconds();
    if (argc > 1) {
        const int n = std::atoi(argv[1]);
        if (n < 1 || n > 10) {
            std::cerr << "usage: acceptance [1..10]\n";
            return 2;
        }
        ok = criteria[n - 1]();
    } else {
        for (const auto& c : criteria) ok = c() && ok;
    }
    std::cout << "total " << now_seconds() - t0 << "s\n";
    return ok ? 0 : 1;
}
