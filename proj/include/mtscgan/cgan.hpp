#pragma once

// Conditional generator and discriminator with the alpha noise/context
// mixing rule, plus the three adversarial losses (standard, least-squares,
// Wasserstein with gradient penalty).

#include <cstdint>
#include <string>
#include <vector>

#include "mtscgan/nn.hpp"
#include "mtscgan/rng.hpp"
#include "mtscgan/tensor.hpp"

namespace mtscgan::cgan {

struct ConditionSpec {
    enum class Kind { Categorical, Series };
    Kind kind = Kind::Categorical;
    std::size_t n_classes = 0;      // Categorical
    std::size_t cond_channels = 0;  // Series
    std::size_t timesteps = 0;      // Series: must equal the target length
};

// A batch of conditions: [B, n_classes] one-hot rows, or [B, C, T] series.
struct ConditionBatch {
    ConditionSpec::Kind kind = ConditionSpec::Kind::Categorical;
    Tensor values;

    std::size_t batch() const { return values.dim(0); }
};

ConditionBatch categorical_batch(const std::vector<std::size_t>& class_ids,
                                 std::size_t n_classes);
ConditionBatch series_batch(Tensor series);  // [B, C, T]
void validate(const ConditionBatch& cond, const ConditionSpec& spec);

struct GenConfig {
    std::size_t latent_dim = 64;
    double alpha = 0.9;
    std::size_t seq_len = 150;
    std::size_t embed_channels = 32;  // c: channels inside the encoder stack
    std::size_t out_channels = 3;
    std::size_t n_layers = 3;
    std::size_t n_heads = 4;
    ConditionSpec cond;

    void validate() const;
};

struct DiscConfig {
    std::size_t patch_len = 15;
    std::size_t embed_dim = 64;
    std::size_t n_layers = 3;
    std::size_t n_heads = 4;
    std::size_t in_channels = 3;
    std::size_t cond_dim = 16;    // width of the encoded condition
    std::size_t pre_channels = 8; // channels after the initial linear mix
    std::size_t seq_len = 150;
    ConditionSpec cond;

    void validate() const;
};

enum class LossKind { Standard, LSGAN, WGANGP };

struct LossConfig {
    LossKind kind = LossKind::LSGAN;
    double lsgan_a = 0.0;  // fake label
    double lsgan_b = 1.0;  // real label
    double lsgan_c = 1.0;  // generator target
    double gp_lambda = 10.0;
    std::size_t critic_steps = 5;  // WGAN-GP critic updates per generator step

    void validate() const;
};

LossKind loss_kind_from_string(const std::string& s);
std::string to_string(LossKind k);

struct GeneratorParams {
    nn::Linear cond_enc;    // condition -> latent_dim
    nn::Linear input_proj;  // 2*latent_dim -> seq_len*embed_channels
    Tensor pos;             // [seq_len, embed_channels]
    std::vector<nn::EncoderLayerParams> layers;
    nn::Linear head;        // per-token embed_channels -> out_channels
    nn::Linear cond_tok;    // series only: per-token condition injection
};

struct DiscriminatorParams {
    nn::Linear cond_enc;  // condition -> cond_dim
    nn::Linear pre;   // in_channels (+ raw series channels) + cond_dim -> pre
    nn::PatchEmbedParams patch;
    std::vector<nn::EncoderLayerParams> layers;
    nn::LayerNormAffine final_ln;
    nn::Linear head;      // embed_dim -> 1
};

GeneratorParams make_generator(const GenConfig& cfg, Rng& rng);
DiscriminatorParams make_discriminator(const DiscConfig& cfg, Rng& rng);
void visit(GeneratorParams& p, const std::string& prefix,
           const nn::ParamVisitor& fn);
void visit(DiscriminatorParams& p, const std::string& prefix,
           const nn::ParamVisitor& fn);
template <typename P>
std::vector<Tensor> parameters(P& p) {
    std::vector<Tensor> out;
    visit(p, "", [&out](const std::string&, Tensor& t) { out.push_back(t); });
    return out;
}

// i.i.d. standard normal [batch, d_z]
Tensor sample_noise(std::size_t batch, std::size_t d_z, Rng& rng);

// condition batch -> [B, out_dim] through the learned linear map
Tensor encode_condition(const ConditionBatch& cond, const nn::Linear& enc,
                        const ConditionSpec& spec);

// concat(alpha*z, (1-alpha)*ctx) along features; alpha in (0,1) except tests
Tensor mix_alpha(const Tensor& z, const Tensor& ctx, double alpha);

// z [B, d_z] + condition -> [B, out_channels, seq_len]
Tensor generate(const Tensor& z, const ConditionBatch& cond,
                const GeneratorParams& p, const GenConfig& cfg);

// series [B, C, T] + condition -> raw logits [B, 1]
Tensor discriminate(const Tensor& x, const ConditionBatch& cond,
                    const DiscriminatorParams& p, const DiscConfig& cfg);

struct LossPair {
    Tensor d;
    Tensor g;
};

LossPair loss_standard(const Tensor& real_logits, const Tensor& fake_logits);
LossPair loss_lsgan(const Tensor& real_logits, const Tensor& fake_logits,
                    const LossConfig& cfg);
// Gradient penalty at per-sample uniform interpolates between real and fake;
// the D term uses detached fake values, the G term the given (graph) fake.
using CriticFn =
    std::function<Tensor(const Tensor& x, const ConditionBatch& cond)>;
LossPair loss_wgan_gp(const Tensor& real, const Tensor& fake,
                      const ConditionBatch& cond, const CriticFn& critic,
                      const LossConfig& lcfg, Rng& rng);
LossPair loss_wgan_gp(const Tensor& real, const Tensor& fake,
                      const ConditionBatch& cond, const DiscriminatorParams& p,
                      const DiscConfig& dcfg, const LossConfig& lcfg, Rng& rng);

}  // namespace mtscgan::cgan
