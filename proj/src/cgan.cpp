#include "mtscgan/cgan.hpp"

#include <cmath>

namespace mtscgan::cgan {

ConditionBatch categorical_batch(const std::vector<std::size_t>& class_ids,
                                 std::size_t n_classes) {
    std::vector<double> v(class_ids.size() * n_classes, 0.0);
    for (std::size_t i = 0; i < class_ids.size(); ++i) {
        if (class_ids[i] >= n_classes)
            throw TensorError("condition: class id " +
                              std::to_string(class_ids[i]) +
                              " out of range for " +
                              std::to_string(n_classes) + " classes");
        v[i * n_classes + class_ids[i]] = 1.0;
    }
    return {ConditionSpec::Kind::Categorical,
            Tensor({class_ids.size(), n_classes}, std::move(v))};
}

ConditionBatch series_batch(Tensor series) {
    if (series.rank() != 3)
        throw TensorError("condition: series batch must be [batch, channels, timesteps], got " +
                          shape_str(series.shape()));
    return {ConditionSpec::Kind::Series, std::move(series)};
}

void validate(const ConditionBatch& cond, const ConditionSpec& spec) {
    if (cond.kind != spec.kind)
        throw TensorError("condition: kind does not match the model's condition spec");
    if (spec.kind == ConditionSpec::Kind::Categorical) {
        if (cond.values.rank() != 2 || cond.values.dim(1) != spec.n_classes)
            throw TensorError("condition: one-hot batch " +
                              shape_str(cond.values.shape()) + " expected [*, " +
                              std::to_string(spec.n_classes) + "]");
        auto v = cond.values.data();
        for (std::size_t b = 0; b < cond.values.dim(0); ++b) {
            std::size_t ones = 0;
            for (std::size_t j = 0; j < spec.n_classes; ++j) {
                const double x = v[b * spec.n_classes + j];
                if (x == 1.0)
                    ++ones;
                else if (x != 0.0)
                    throw TensorError("condition: row " + std::to_string(b) +
                                      " is not one-hot");
            }
            if (ones != 1)
                throw TensorError("condition: row " + std::to_string(b) +
                                  " is not one-hot");
        }
    } else {
        if (cond.values.rank() != 3 ||
            cond.values.dim(1) != spec.cond_channels ||
            cond.values.dim(2) != spec.timesteps)
            throw TensorError("condition: series batch " +
                              shape_str(cond.values.shape()) + " expected [*, " +
                              std::to_string(spec.cond_channels) + ", " +
                              std::to_string(spec.timesteps) + "]");
        for (double x : cond.values.data())
            if (!std::isfinite(x))
                throw TensorError("condition: non-finite value in series condition");
    }
}

void GenConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw TensorError("gen config: alpha must lie in (0,1), got " +
                          std::to_string(alpha));
    if (latent_dim == 0 || seq_len == 0 || embed_channels == 0 ||
        out_channels == 0 || n_layers == 0)
        throw TensorError("gen config: zero-sized field");
    if (embed_channels % n_heads != 0)
        throw TensorError("gen config: embed_channels " +
                          std::to_string(embed_channels) +
                          " not divisible by n_heads " +
                          std::to_string(n_heads));
}

void DiscConfig::validate() const {
    if (patch_len == 0 || seq_len % patch_len != 0)
        throw TensorError("disc config: seq_len " + std::to_string(seq_len) +
                          " not divisible by patch_len " +
                          std::to_string(patch_len));
    if (seq_len / patch_len < 2)
        throw TensorError("disc config: fewer than 2 patches");
    if (embed_dim % n_heads != 0)
        throw TensorError("disc config: embed_dim " +
                          std::to_string(embed_dim) +
                          " not divisible by n_heads " +
                          std::to_string(n_heads));
}

void LossConfig::validate() const {
    if (gp_lambda < 0.0)
        throw TensorError("loss config: gp_lambda must be >= 0");
    if (lsgan_a == lsgan_b)
        throw TensorError("loss config: lsgan targets a and b must differ");
    if (critic_steps == 0)
        throw TensorError("loss config: critic_steps must be >= 1");
}

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "standard") return LossKind::Standard;
    if (s == "lsgan") return LossKind::LSGAN;
    if (s == "wgan-gp" || s == "wgangp") return LossKind::WGANGP;
    throw TensorError("unknown loss kind: " + s);
}

std::string to_string(LossKind k) {
    switch (k) {
        case LossKind::Standard: return "standard";
        case LossKind::LSGAN: return "lsgan";
        case LossKind::WGANGP: return "wgan-gp";
    }
    return "?";
}

namespace {

std::size_t cond_input_dim(const ConditionSpec& spec) {
    return spec.kind == ConditionSpec::Kind::Categorical
               ? spec.n_classes
               : spec.cond_channels * spec.timesteps;
}

Tensor normal_init(Shape shape, double stddev, Rng& rng) {
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = stddev * rng.normal();
    Tensor t(std::move(shape), std::move(v));
    t.set_requires_grad(true);
    return t;
}

}  // namespace

GeneratorParams make_generator(const GenConfig& cfg, Rng& rng) {
    cfg.validate();
    GeneratorParams p;
    p.cond_enc = nn::make_linear(cond_input_dim(cfg.cond), cfg.latent_dim, rng);
    p.input_proj = nn::make_linear(2 * cfg.latent_dim,
                                   cfg.seq_len * cfg.embed_channels, rng);
    p.pos = normal_init({cfg.seq_len, cfg.embed_channels}, 0.02, rng);
    for (std::size_t i = 0; i < cfg.n_layers; ++i)
        p.layers.push_back(
            nn::make_encoder_layer(cfg.embed_channels, cfg.n_heads, rng));
    p.head = nn::make_linear(cfg.embed_channels, cfg.out_channels, rng);
    if (cfg.cond.kind == ConditionSpec::Kind::Series)
        p.cond_tok = nn::make_linear(cfg.cond.cond_channels,
                                     cfg.embed_channels, rng);
    return p;
}

DiscriminatorParams make_discriminator(const DiscConfig& cfg, Rng& rng) {
    cfg.validate();
    DiscriminatorParams p;
    p.cond_enc = nn::make_linear(cond_input_dim(cfg.cond), cfg.cond_dim, rng);
    const std::size_t raw = cfg.cond.kind == ConditionSpec::Kind::Series
                                ? cfg.cond.cond_channels
                                : 0;
    p.pre = nn::make_linear(cfg.in_channels + raw + cfg.cond_dim,
                            cfg.pre_channels, rng);
    p.patch = nn::make_patch_embed(cfg.pre_channels, cfg.seq_len,
                                   cfg.patch_len, cfg.embed_dim, rng);
    for (std::size_t i = 0; i < cfg.n_layers; ++i)
        p.layers.push_back(
            nn::make_encoder_layer(cfg.embed_dim, cfg.n_heads, rng));
    p.final_ln = nn::make_layernorm(cfg.embed_dim);
    p.head = nn::make_linear(cfg.embed_dim, 1, rng);
    return p;
}

void visit(GeneratorParams& p, const std::string& prefix,
           const nn::ParamVisitor& fn) {
    nn::visit(p.cond_enc, prefix + "cond_enc", fn);
    nn::visit(p.input_proj, prefix + "input_proj", fn);
    fn(prefix + "pos", p.pos);
    for (std::size_t i = 0; i < p.layers.size(); ++i)
        nn::visit(p.layers[i], prefix + "layer" + std::to_string(i), fn);
    nn::visit(p.head, prefix + "head", fn);
    if (p.cond_tok.w.defined()) nn::visit(p.cond_tok, prefix + "cond_tok", fn);
}

void visit(DiscriminatorParams& p, const std::string& prefix,
           const nn::ParamVisitor& fn) {
    nn::visit(p.cond_enc, prefix + "cond_enc", fn);
    nn::visit(p.pre, prefix + "pre", fn);
    nn::visit(p.patch, prefix + "patch", fn);
    for (std::size_t i = 0; i < p.layers.size(); ++i)
        nn::visit(p.layers[i], prefix + "layer" + std::to_string(i), fn);
    nn::visit(p.final_ln, prefix + "final_ln", fn);
    nn::visit(p.head, prefix + "head", fn);
}

Tensor sample_noise(std::size_t batch, std::size_t d_z, Rng& rng) {
    if (batch == 0 || d_z == 0)
        throw TensorError("sample_noise: batch and d_z must be positive");
    std::vector<double> v(batch * d_z);
    for (auto& x : v) x = rng.normal();
    return Tensor({batch, d_z}, std::move(v));
}

Tensor encode_condition(const ConditionBatch& cond, const nn::Linear& enc,
                        const ConditionSpec& spec) {
    validate(cond, spec);
    Tensor flat = cond.values;
    if (spec.kind == ConditionSpec::Kind::Series)
        flat = reshape(flat, {cond.batch(), spec.cond_channels * spec.timesteps});
    return nn::apply(enc, flat);
}

Tensor mix_alpha(const Tensor& z, const Tensor& ctx, double alpha) {
    if (z.rank() != 2 || z.shape() != ctx.shape())
        throw TensorError("mix_alpha: shape mismatch " + shape_str(z.shape()) +
                          " vs " + shape_str(ctx.shape()));
    return concat({scale(z, alpha), scale(ctx, 1.0 - alpha)}, 1);
}

Tensor generate(const Tensor& z, const ConditionBatch& cond,
                const GeneratorParams& p, const GenConfig& cfg) {
    cfg.validate();
    if (z.rank() != 2 || z.dim(1) != cfg.latent_dim)
        throw TensorError("generate: noise " + shape_str(z.shape()) +
                          " expected [*, " + std::to_string(cfg.latent_dim) +
                          "]");
    const std::size_t b = z.dim(0);
    Tensor ctx = encode_condition(cond, p.cond_enc, cfg.cond);
    Tensor mixed = mix_alpha(z, ctx, cfg.alpha);
    Tensor tokens = reshape(nn::apply(p.input_proj, mixed),
                            {b, cfg.seq_len, cfg.embed_channels});
    tokens = add(tokens, tile_axis0(p.pos, b));
    // series conditions are also injected per token, so token t sees the
    // condition at timestep t directly
    if (cfg.cond.kind == ConditionSpec::Kind::Series)
        tokens = add(tokens,
                     nn::apply3(p.cond_tok, transpose_last2(cond.values)));
    for (const auto& layer : p.layers) tokens = nn::encoder_layer(tokens, layer);
    // per-token (1,1)-convolution to the output channel count
    Tensor out = nn::apply3(p.head, tokens);     // [B, seq_len, out_channels]
    return transpose_last2(out);                 // [B, out_channels, seq_len]
}

Tensor discriminate(const Tensor& x, const ConditionBatch& cond,
                    const DiscriminatorParams& p, const DiscConfig& cfg) {
    cfg.validate();
    if (x.rank() != 3 || x.dim(1) != cfg.in_channels ||
        x.dim(2) != cfg.seq_len)
        throw TensorError("discriminate: input " + shape_str(x.shape()) +
                          " expected [*, " + std::to_string(cfg.in_channels) +
                          ", " + std::to_string(cfg.seq_len) + "]");
    Tensor e = encode_condition(cond, p.cond_enc, cfg.cond);  // [B, cond_dim]
    Tensor e3 = tile_axis2(e, cfg.seq_len);                   // [B, cond_dim, T]
    // series conditions also enter raw, so per-timestep alignment between
    // condition and candidate is directly visible
    Tensor mixed = cfg.cond.kind == ConditionSpec::Kind::Series
                       ? concat({x, cond.values, e3}, 1)
                       : concat({x, e3}, 1);
    // per-timestep linear mix of data and condition channels
    Tensor pre = transpose_last2(nn::apply3(p.pre, transpose_last2(mixed)));
    Tensor tokens = nn::patch_embed(pre, p.patch, /*with_cls=*/true);
    for (const auto& layer : p.layers) tokens = nn::encoder_layer(tokens, layer);
    Tensor cls = reshape(slice(tokens, 1, 0, 1), {x.dim(0), cfg.embed_dim});
    return nn::apply(p.head, nn::apply(p.final_ln, cls));
}

LossPair loss_standard(const Tensor& real_logits, const Tensor& fake_logits) {
    // -log sigmoid(x) = softplus(-x); -log(1 - sigmoid(x)) = softplus(x)
    Tensor loss_d = add(mean_all(softplus(neg(real_logits))),
                        mean_all(softplus(fake_logits)));
    Tensor loss_g = mean_all(softplus(neg(fake_logits)));
    return {loss_d, loss_g};
}

LossPair loss_lsgan(const Tensor& real_logits, const Tensor& fake_logits,
                    const LossConfig& cfg) {
    cfg.validate();
    Tensor loss_d =
        scale(add(mean_all(square(add_scalar(real_logits, -cfg.lsgan_b))),
                  mean_all(square(add_scalar(fake_logits, -cfg.lsgan_a)))),
              0.5);
    Tensor loss_g =
        scale(mean_all(square(add_scalar(fake_logits, -cfg.lsgan_c))), 0.5);
    return {loss_d, loss_g};
}

LossPair loss_wgan_gp(const Tensor& real, const Tensor& fake,
                      const ConditionBatch& cond, const CriticFn& critic,
                      const LossConfig& lcfg, Rng& rng) {
    lcfg.validate();
    if (real.shape() != fake.shape())
        throw TensorError("wgan_gp: real " + shape_str(real.shape()) +
                          " vs fake " + shape_str(fake.shape()));
    const std::size_t b = real.dim(0);
    const std::size_t sample = real.numel() / b;

    // per-sample interpolate on detached values
    std::vector<double> xv(real.numel());
    auto rv = real.data();
    auto fv = fake.data();
    for (std::size_t i = 0; i < b; ++i) {
        const double eps = rng.uniform();
        for (std::size_t j = 0; j < sample; ++j)
            xv[i * sample + j] =
                eps * rv[i * sample + j] + (1.0 - eps) * fv[i * sample + j];
    }
    Tensor xhat(real.shape(), std::move(xv));
    xhat.set_requires_grad(true);

    Tensor d_interp = critic(xhat, cond);
    Tensor gx = grad_of(backward(sum_all(d_interp), /*create_graph=*/true), xhat);
    Tensor norms = l2norm_rows(reshape(gx, {b, sample}));
    Tensor penalty = mean_all(square(add_scalar(norms, -1.0)));

    Tensor d_fake_detached = critic(fake.detach(), cond);
    Tensor d_real = critic(real, cond);
    Tensor loss_d = add(sub(mean_all(d_fake_detached), mean_all(d_real)),
                        scale(penalty, lcfg.gp_lambda));

    Tensor d_fake = critic(fake, cond);
    Tensor loss_g = neg(mean_all(d_fake));
    return {loss_d, loss_g};
}

LossPair loss_wgan_gp(const Tensor& real, const Tensor& fake,
                      const ConditionBatch& cond, const DiscriminatorParams& p,
                      const DiscConfig& dcfg, const LossConfig& lcfg,
                      Rng& rng) {
    return loss_wgan_gp(
        real, fake, cond,
        [&p, &dcfg](const Tensor& x, const ConditionBatch& c) {
            return discriminate(x, c, p, dcfg);
        },
        lcfg, rng);
}

}  // namespace mtscgan::cgan
