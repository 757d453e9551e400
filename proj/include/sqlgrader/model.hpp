#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sqlgrader/layers.hpp"
#include "sqlgrader/lexer.hpp"

namespace sqlgrader {

struct ModelConfig {
    std::size_t vocab_size = 0;
    std::size_t seq_len = 172;
    std::size_t embed_dim = 64;
    std::size_t conv_filters = 100;
    std::size_t conv_kernel = 3;
    double dropout_rate = 0.25;
    std::size_t bottleneck_dim = 2;
    std::size_t remark_classes = 4;
    bool attention_scaled = false;
    std::uint64_t seed = 0;
};

struct Head {
    BatchNormParams bn;   // over the bottleneck activations
    DenseParams dense;    // logits; activation applied per mode
};

// Shared trunk plus the three parameter-sharing output models C, R, G.
struct GraderNet {
    ModelConfig config;
    EmbeddingParams embedding;
    ConvEncoderParams conv_q, conv_v;
    BatchNormParams trunk_bn;  // over the pooled 2*conv_filters vector
    DenseParams bottleneck;    // tanh, -> bottleneck_dim
    Head head_c, head_r, head_g;
};

GraderNet build(const ModelConfig& config, SeededRng& rng);

// Every stored value: weights, biases, gamma/beta and running statistics.
std::size_t parameter_count(const GraderNet& net);

struct Prediction {
    double p_correct = 0.0;
    std::array<double, 4> remark_probs{};
    double grade_hat = 0.0;
    std::array<double, 2> bottleneck_xy{};
};

// -------------------------------------------------------------- forward pass

struct ExampleCache {
    const std::vector<int>* ids = nullptr;
    Tensor embedded;
    ConvCache conv_q, conv_v;
    Tensor q_out, v_out;
    AttentionCache attn;
};

struct TrunkCache {
    std::vector<ExampleCache> examples;
    Tensor pooled;        // [B, 2*filters] pre-dropout
    Tensor dropout_mask;  // empty at inference
    BatchNormCache bn;
    DenseCache bottleneck;
};

// embed -> conv_q / conv_v on the same embedding -> attention(q, v) ->
// GAP(q) ++ GAP(attention) -> dropout -> batchnorm -> tanh bottleneck.
Tensor forward_trunk(GraderNet& net, const std::vector<EncodedStatement>& batch,
                     bool training, SeededRng& rng, TrunkCache* cache);

struct HeadCache {
    BatchNormCache bn;
    DenseCache dense;      // linear logits
    Tensor activated;      // post-activation output for the mode in use
};

struct JointCache {
    TrunkCache trunk;
    HeadCache head_c, head_r, head_g;
    Tensor out6;  // joint sigmoid outputs
};

// [B, 6] = sigmoid([C | R logits (4) | G]); joint-mode output.
Tensor forward_joint(GraderNet& net, const std::vector<EncodedStatement>& batch,
                     bool training, SeededRng& rng, JointCache* cache);

// Trunk plus a single head with its per-head activation: C sigmoid,
// R softmax, G sigmoid. Used by iterative training.
Tensor forward_head(GraderNet& net, const std::vector<EncodedStatement>& batch, char head,
                    bool training, SeededRng& rng, JointCache* cache);

// Inference on a single statement; head R reported through softmax.
Prediction predict(const GraderNet& net, const EncodedStatement& statement);

// ------------------------------------------------------------------ backward

// Gradients for every trainable tensor, laid out to mirror GraderNet.
struct Gradients {
    Tensor embedding;
    ConvGrads conv_q, conv_v;
    BatchNormGrads trunk_bn;
    DenseGrads bottleneck;
    BatchNormGrads head_c_bn, head_r_bn, head_g_bn;
    DenseGrads head_c_dense, head_r_dense, head_g_dense;
};

Gradients zero_gradients(const GraderNet& net);

// Aligned views over the trainable tensors; same order in both lists.
std::vector<Tensor*> trainable_params(GraderNet& net);
std::vector<Tensor*> gradient_slots(Gradients& grads);

// Which heads participate in a backward pass.
struct HeadSelection {
    bool c = true, r = true, g = true;
};

// Backward from per-head output gradients (w.r.t. each head's post-activation
// output as produced by forward_joint / per-head forward). Gradients
// accumulate into `grads`. Head activations are supplied by the caller since
// joint and per-head training attach different ones.
void backward_joint(const GraderNet& net, const JointCache& cache, const Tensor& d_out6,
                    Gradients& grads);

// Per-head backward used by iterative training: d_head is the gradient
// w.r.t. the selected head's post-activation output.
void backward_head(const GraderNet& net, const JointCache& cache, char head,
                   const Tensor& d_head, Gradients& grads);

// ---------------------------------------------------------------- checkpoint

// JSON manifest with format_version, config, vocabulary, tensors and a CRC-32
// of the canonical little-endian tensor payload. Extension: .grader.json.
void save_checkpoint(const GraderNet& net, const Vocabulary& vocab, const std::string& path);

struct Checkpoint {
    GraderNet net;
    Vocabulary vocab;
};

Checkpoint load_checkpoint(const std::string& path);

// CRC-32 (IEEE 802.3 polynomial) used for the checkpoint integrity check.
std::uint32_t crc32(const unsigned char* data, std::size_t len);

// CRC-32 of the canonical little-endian payload of every stored tensor.
std::uint32_t parameter_checksum(const GraderNet& net);

}  // namespace sqlgrader
