#include "mtscgan/nn.hpp"

#include <cmath>

namespace mtscgan::nn {

namespace {

Tensor normal_init(Shape shape, double stddev, Rng& rng) {
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = stddev * rng.normal();
    Tensor t(std::move(shape), std::move(v));
    t.set_requires_grad(true);
    return t;
}

}  // namespace

Linear make_linear(std::size_t in, std::size_t out, Rng& rng) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(in + out));
    Linear l;
    l.w = normal_init({in, out}, stddev, rng);
    l.b = Tensor::zeros({out}).set_requires_grad(true);
    return l;
}

Tensor apply(const Linear& l, const Tensor& x) {
    if (x.rank() != 2 || x.dim(1) != l.w.dim(0))
        throw TensorError("linear: input " + shape_str(x.shape()) +
                          " incompatible with weight " + shape_str(l.w.shape()));
    Tensor y = matmul(x, l.w);
    return add(y, tile_leading(l.b, {x.dim(0)}));
}

Tensor apply3(const Linear& l, const Tensor& x) {
    if (x.rank() != 3)
        throw TensorError("linear: expected rank-3 input, got " +
                          shape_str(x.shape()));
    const std::size_t b = x.dim(0), t = x.dim(1);
    Tensor flat = reshape(x, {b * t, x.dim(2)});
    return reshape(apply(l, flat), {b, t, l.w.dim(1)});
}

void visit(Linear& l, const std::string& prefix, const ParamVisitor& fn) {
    fn(prefix + ".w", l.w);
    fn(prefix + ".b", l.b);
}

LayerNormAffine make_layernorm(std::size_t n) {
    LayerNormAffine ln;
    ln.gamma = Tensor::full({n}, 1.0).set_requires_grad(true);
    ln.beta = Tensor::zeros({n}).set_requires_grad(true);
    return ln;
}

Tensor apply(const LayerNormAffine& ln, const Tensor& x) {
    Shape lead(x.shape().begin(), x.shape().end() - 1);
    Tensor normed = layernorm_last(x, ln.eps);
    return add(mul(normed, tile_leading(ln.gamma, lead)),
               tile_leading(ln.beta, lead));
}

void visit(LayerNormAffine& ln, const std::string& prefix,
           const ParamVisitor& fn) {
    fn(prefix + ".gamma", ln.gamma);
    fn(prefix + ".beta", ln.beta);
}

EncoderLayerParams make_encoder_layer(std::size_t embed_dim,
                                      std::size_t n_heads, Rng& rng) {
    if (n_heads == 0 || embed_dim % n_heads != 0)
        throw TensorError("encoder_layer: embed_dim " +
                          std::to_string(embed_dim) + " not divisible by " +
                          std::to_string(n_heads) + " heads");
    EncoderLayerParams p;
    p.embed_dim = embed_dim;
    p.n_heads = n_heads;
    const std::size_t dh = embed_dim / n_heads;
    for (std::size_t h = 0; h < n_heads; ++h) {
        p.q.push_back(make_linear(embed_dim, dh, rng));
        p.k.push_back(make_linear(embed_dim, dh, rng));
        p.v.push_back(make_linear(embed_dim, dh, rng));
    }
    p.out_proj = make_linear(embed_dim, embed_dim, rng);
    p.mlp1 = make_linear(embed_dim, 2 * embed_dim, rng);
    p.mlp2 = make_linear(2 * embed_dim, embed_dim, rng);
    p.ln1 = make_layernorm(embed_dim);
    p.ln2 = make_layernorm(embed_dim);
    return p;
}

void visit(EncoderLayerParams& p, const std::string& prefix,
           const ParamVisitor& fn) {
    for (std::size_t h = 0; h < p.n_heads; ++h) {
        const std::string hs = prefix + ".h" + std::to_string(h);
        visit(p.q[h], hs + ".q", fn);
        visit(p.k[h], hs + ".k", fn);
        visit(p.v[h], hs + ".v", fn);
    }
    visit(p.out_proj, prefix + ".out", fn);
    visit(p.mlp1, prefix + ".mlp1", fn);
    visit(p.mlp2, prefix + ".mlp2", fn);
    visit(p.ln1, prefix + ".ln1", fn);
    visit(p.ln2, prefix + ".ln2", fn);
}

AttentionResult multi_head_attention_full(const Tensor& x,
                                          const EncoderLayerParams& p) {
    if (x.rank() != 3 || x.dim(2) != p.embed_dim)
        throw TensorError("mha: input " + shape_str(x.shape()) +
                          " does not match embed_dim " +
                          std::to_string(p.embed_dim));
    const std::size_t dh = p.embed_dim / p.n_heads;
    const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
    AttentionResult res;
    std::vector<Tensor> heads;
    for (std::size_t h = 0; h < p.n_heads; ++h) {
        Tensor q = apply3(p.q[h], x);
        Tensor k = apply3(p.k[h], x);
        Tensor v = apply3(p.v[h], x);
        Tensor attn = softmax_last(scale(bmm(q, transpose_last2(k)), sc));
        heads.push_back(bmm(attn, v));
        res.attn.push_back(attn);
    }
    res.out = apply3(p.out_proj, concat(heads, 2));
    return res;
}

Tensor multi_head_attention(const Tensor& x, const EncoderLayerParams& p) {
    return multi_head_attention_full(x, p).out;
}

Tensor encoder_layer(const Tensor& x, const EncoderLayerParams& p) {
    Tensor h = add(x, multi_head_attention(apply(p.ln1, x), p));
    Tensor mlp = apply3(p.mlp2, gelu(apply3(p.mlp1, apply(p.ln2, h))));
    return add(h, mlp);
}

PatchEmbedParams make_patch_embed(std::size_t channels, std::size_t timesteps,
                                  std::size_t patch_len, std::size_t embed,
                                  Rng& rng) {
    if (patch_len == 0 || timesteps % patch_len != 0)
        throw TensorError("patch_embed: sequence length " +
                          std::to_string(timesteps) + " not divisible by patch " +
                          std::to_string(patch_len));
    PatchEmbedParams p;
    p.patch_len = patch_len;
    p.proj = make_linear(channels * patch_len, embed, rng);
    p.pos = normal_init({timesteps / patch_len + 1, embed}, 0.02, rng);
    p.cls = normal_init({embed}, 0.02, rng);
    return p;
}

Tensor patch_embed(const Tensor& series, const PatchEmbedParams& p,
                   bool with_cls) {
    if (series.rank() != 3)
        throw TensorError("patch_embed: expected [batch, channels, timesteps], got " +
                          shape_str(series.shape()));
    const std::size_t b = series.dim(0);
    const std::size_t embed = p.proj.w.dim(1);
    Tensor tokens = apply3(p.proj, extract_patches(series, p.patch_len));
    const std::size_t np = tokens.dim(1);
    if (np + 1 != p.pos.dim(0))
        throw TensorError("patch_embed: " + std::to_string(np) +
                          " patches do not match positional table of " +
                          std::to_string(p.pos.dim(0)) + " rows");
    if (with_cls) {
        Tensor cls3 = tile_axis0(reshape(p.cls, {1, embed}), b);
        tokens = concat({cls3, tokens}, 1);
        return add(tokens, tile_axis0(p.pos, b));
    }
    return add(tokens, tile_axis0(slice(p.pos, 0, 1, np), b));
}

void visit(PatchEmbedParams& p, const std::string& prefix,
           const ParamVisitor& fn) {
    visit(p.proj, prefix + ".proj", fn);
    fn(prefix + ".pos", p.pos);
    fn(prefix + ".cls", p.cls);
}

}  // namespace mtscgan::nn
