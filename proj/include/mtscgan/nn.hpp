#pragma once

// Transformer building blocks shared by the generator and discriminator:
// multi-head self-attention, pre-norm encoder layers, patch embedding with
// learned positions and a classification token.

#include <functional>
#include <string>
#include <vector>

#include "mtscgan/rng.hpp"
#include "mtscgan/tensor.hpp"

namespace mtscgan::nn {

// Visits every learnable tensor with a stable name; drives both the
// optimizer parameter list and checkpoint serialization.
using ParamVisitor = std::function<void(const std::string&, Tensor&)>;

struct Linear {
    Tensor w;  // [in, out]
    Tensor b;  // [out]
};

Linear make_linear(std::size_t in, std::size_t out, Rng& rng);
Tensor apply(const Linear& l, const Tensor& x);    // [n,in] -> [n,out]
Tensor apply3(const Linear& l, const Tensor& x);   // [B,T,in] -> [B,T,out]
void visit(Linear& l, const std::string& prefix, const ParamVisitor& fn);

struct LayerNormAffine {
    Tensor gamma;  // [n]
    Tensor beta;   // [n]
    double eps = 1e-5;
};

LayerNormAffine make_layernorm(std::size_t n);
Tensor apply(const LayerNormAffine& ln, const Tensor& x);
void visit(LayerNormAffine& ln, const std::string& prefix,
           const ParamVisitor& fn);

struct EncoderLayerParams {
    std::size_t embed_dim = 0;
    std::size_t n_heads = 0;
    std::vector<Linear> q, k, v;  // per head, embed -> embed/n_heads
    Linear out_proj;              // embed -> embed
    Linear mlp1, mlp2;            // embed -> 2*embed -> embed
    LayerNormAffine ln1, ln2;
};

EncoderLayerParams make_encoder_layer(std::size_t embed_dim,
                                      std::size_t n_heads, Rng& rng);
void visit(EncoderLayerParams& p, const std::string& prefix,
           const ParamVisitor& fn);

struct AttentionResult {
    Tensor out;                 // [B, T, E]
    std::vector<Tensor> attn;   // per head, [B, T, T]
};

AttentionResult multi_head_attention_full(const Tensor& x,
                                          const EncoderLayerParams& p);
Tensor multi_head_attention(const Tensor& x, const EncoderLayerParams& p);

// Pre-norm residual layout: x + MHA(LN(x)), then + MLP(LN(.)) with GELU.
Tensor encoder_layer(const Tensor& x, const EncoderLayerParams& p);

struct PatchEmbedParams {
    std::size_t patch_len = 0;
    Linear proj;  // [channels*patch_len, embed]
    Tensor pos;   // [n_patches + 1, embed]; row 0 is the cls position
    Tensor cls;   // [embed]
};

PatchEmbedParams make_patch_embed(std::size_t channels, std::size_t timesteps,
                                  std::size_t patch_len, std::size_t embed,
                                  Rng& rng);
// series [B, C, T] -> [B, n_patches(+1), embed]
Tensor patch_embed(const Tensor& series, const PatchEmbedParams& p,
                   bool with_cls);
void visit(PatchEmbedParams& p, const std::string& prefix,
           const ParamVisitor& fn);

}  // namespace mtscgan::nn
