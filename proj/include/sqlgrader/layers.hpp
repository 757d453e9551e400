#pragma once

#include <vector>

#include "sqlgrader/lexer.hpp"
#include "sqlgrader/tensor.hpp"

namespace sqlgrader {

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct EmbeddingParams {
    Tensor table;  // [vocab, embed_dim]
};

struct ConvEncoderParams {
    Tensor kernels;  // [kernel_size, in_channels, out_channels]
    Tensor bias;     // [out_channels]
};

struct BatchNormParams {
    Tensor gamma, beta;               // trainable, [d]
    Tensor running_mean, running_var; // [d]
    double momentum = 0.99;
    double epsilon = 1e-3;
};

enum class Activation { Tanh, Sigmoid, Softmax, Linear };

struct DenseParams {
    Tensor weights;  // [in_dim, out_dim]
    Tensor bias;     // [out_dim]
    Activation activation = Activation::Linear;
};

// ---------------------------------------------------------------------------
// Embedding
// ---------------------------------------------------------------------------

// Output row t is table[ids[t]].
Tensor embedding_forward(const std::vector<int>& ids, const EmbeddingParams& p);

// Accumulates upstream rows into table_grad by id (repeated ids sum).
void embedding_backward(const std::vector<int>& ids, const Tensor& upstream,
                        Tensor& table_grad);

// ---------------------------------------------------------------------------
// 1-D convolutional encoder: kernel size k, stride 1, same zero padding, ReLU.
// ---------------------------------------------------------------------------

struct ConvCache {
    Tensor cols;  // im2col matrix [T, k*C_in]
    Tensor pre;   // pre-ReLU activations [T, C_out]
};

Tensor conv_encoder_forward(const Tensor& x, const ConvEncoderParams& p, ConvCache* cache);

struct ConvGrads {
    Tensor kernels;
    Tensor bias;
};

// Returns the input gradient; parameter gradients accumulate into grads.
Tensor conv_encoder_backward(const Tensor& upstream, const ConvEncoderParams& p,
                             const ConvCache& cache, std::size_t in_channels,
                             ConvGrads& grads);

// ---------------------------------------------------------------------------
// Dot-product self-attention: weights = softmax_rows(q v^T [/ sqrt(d)]),
// output = weights v. Scaling is off by default.
// ---------------------------------------------------------------------------

struct AttentionCache {
    Tensor q, v;
    Tensor weights;  // [T, T]
};

Tensor attention_forward(const Tensor& q, const Tensor& v, bool scaled,
                         AttentionCache* cache);

struct AttentionGrads {
    Tensor q, v;
};

AttentionGrads attention_backward(const Tensor& upstream, const AttentionCache& cache,
                                  bool scaled);

// ---------------------------------------------------------------------------
// Global average pooling over the time axis.
// ---------------------------------------------------------------------------

Tensor global_avg_pool(const Tensor& x);

// Each time step receives upstream / T.
Tensor global_avg_pool_backward(const Tensor& upstream, std::size_t time_steps);

// ---------------------------------------------------------------------------
// Inverted dropout.
// ---------------------------------------------------------------------------

// Training mode fills `mask` with 0 or 1/(1-rate) per element; inference is
// the identity and leaves the mask empty.
Tensor dropout_forward(const Tensor& x, double rate, SeededRng& rng, bool training,
                       Tensor* mask);

Tensor dropout_backward(const Tensor& upstream, const Tensor& mask);

// ---------------------------------------------------------------------------
// Batch normalization over [B, d] rows.
// ---------------------------------------------------------------------------

struct BatchNormCache {
    Tensor xhat;     // normalized input [B, d]
    Tensor inv_std;  // [d]
};

// Training mode normalizes by the biased batch statistics and updates the
// running statistics in p; inference normalizes by the running statistics.
Tensor batchnorm_forward(const Tensor& batch, BatchNormParams& p, bool training,
                         BatchNormCache* cache);

struct BatchNormGrads {
    Tensor gamma, beta;
};

// Differentiates through the batch statistics.
Tensor batchnorm_backward(const Tensor& upstream, const BatchNormParams& p,
                          const BatchNormCache& cache, BatchNormGrads& grads);

// ---------------------------------------------------------------------------
// Dense layer: activation(x W + b).
// ---------------------------------------------------------------------------

struct DenseCache {
    Tensor input;   // [B, in]
    Tensor output;  // post-activation [B, out]
};

Tensor dense_forward(const Tensor& x, const DenseParams& p, DenseCache* cache);

struct DenseGrads {
    Tensor weights, bias;
};

Tensor dense_backward(const Tensor& upstream, const DenseParams& p, const DenseCache& cache,
                      DenseGrads& grads);

// Gradient of the activation alone: maps d(output) to d(pre-activation) given
// the post-activation values. Used by the losses that attach to logits.
Tensor activation_backward(Activation act, const Tensor& output, const Tensor& upstream);

}  // namespace sqlgrader
