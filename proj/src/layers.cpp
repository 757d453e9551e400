#include "sqlgrader/layers.hpp"

#include <cmath>

namespace sqlgrader {

// ----------------------------------------------------------------- embedding

Tensor embedding_forward(const std::vector<int>& ids, const EmbeddingParams& p) {
    const std::size_t vocab = p.table.shape[0], dim = p.table.shape[1];
    Tensor out({ids.size(), dim});
    for (std::size_t t = 0; t < ids.size(); ++t) {
        const int id = ids[t];
        if (id < 0 || static_cast<std::size_t>(id) >= vocab)
            throw ShapeError("token id " + std::to_string(id) + " out of range for vocab " +
                             std::to_string(vocab));
        const double* src = &p.table.data[static_cast<std::size_t>(id) * dim];
        double* dst = &out.data[t * dim];
        for (std::size_t j = 0; j < dim; ++j) dst[j] = src[j];
    }
    return out;
}

void embedding_backward(const std::vector<int>& ids, const Tensor& upstream,
                        Tensor& table_grad) {
    const std::size_t dim = table_grad.shape[1];
    if (upstream.shape[0] != ids.size() || upstream.shape[1] != dim)
        throw ShapeError("embedding_backward upstream shape " + shape_str(upstream.shape));
    for (std::size_t t = 0; t < ids.size(); ++t) {
        double* dst = &table_grad.data[static_cast<std::size_t>(ids[t]) * dim];
        const double* src = &upstream.data[t * dim];
        for (std::size_t j = 0; j < dim; ++j) dst[j] += src[j];
    }
}

// -------------------------------------------------------------- conv encoder

namespace {

// im2col for kernel size k, stride 1, same zero padding: row t holds the
// input window [t - k/2, t + k/2] flattened tap-major.
Tensor im2col(const Tensor& x, std::size_t k) {
    const std::size_t T = x.shape[0], c = x.shape[1];
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
    Tensor cols({T, k * c});
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t tap = 0; tap < k; ++tap) {
            const std::ptrdiff_t src =
                static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(tap) - half;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
            const double* from = &x.data[static_cast<std::size_t>(src) * c];
            double* to = &cols.data[t * k * c + tap * c];
            for (std::size_t j = 0; j < c; ++j) to[j] = from[j];
        }
    }
    return cols;
}

}  // namespace

Tensor conv_encoder_forward(const Tensor& x, const ConvEncoderParams& p, ConvCache* cache) {
    const std::size_t k = p.kernels.shape[0], cin = p.kernels.shape[1],
                      cout = p.kernels.shape[2];
    if (x.rank() != 2 || x.shape[1] != cin)
        throw ShapeError("conv input shape " + shape_str(x.shape) + " does not match kernel " +
                         shape_str(p.kernels.shape));
    Tensor cols = im2col(x, k);
    Tensor kmat({k * cin, cout}, p.kernels.data);  // same row-major layout
    Tensor pre = matmul(cols, kmat);
    const std::size_t T = x.shape[0];
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t o = 0; o < cout; ++o) pre.data[t * cout + o] += p.bias.data[o];
    Tensor out({T, cout});
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data[i] = pre.data[i] > 0.0 ? pre.data[i] : 0.0;
    if (cache) {
        cache->cols = std::move(cols);
        cache->pre = std::move(pre);
    }
    return out;
}

Tensor conv_encoder_backward(const Tensor& upstream, const ConvEncoderParams& p,
                             const ConvCache& cache, std::size_t in_channels,
                             ConvGrads& grads) {
    const std::size_t k = p.kernels.shape[0], cout = p.kernels.shape[2];
    const std::size_t T = upstream.shape[0];
    Tensor dpre({T, cout});
    for (std::size_t i = 0; i < dpre.size(); ++i)
        dpre.data[i] = cache.pre.data[i] > 0.0 ? upstream.data[i] : 0.0;

    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t o = 0; o < cout; ++o) grads.bias.data[o] += dpre.data[t * cout + o];

    Tensor dk = matmul_tn(cache.cols, dpre);  // [k*cin, cout]
    for (std::size_t i = 0; i < dk.size(); ++i) grads.kernels.data[i] += dk.data[i];

    Tensor kmat({k * in_channels, cout}, p.kernels.data);
    Tensor dcols = matmul_nt(dpre, kmat);  // [T, k*cin]

    // col2im: scatter each window column back onto the time axis.
    Tensor dx({T, in_channels});
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t tap = 0; tap < k; ++tap) {
            const std::ptrdiff_t src =
                static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(tap) - half;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
            double* to = &dx.data[static_cast<std::size_t>(src) * in_channels];
            const double* from = &dcols.data[t * k * in_channels + tap * in_channels];
            for (std::size_t j = 0; j < in_channels; ++j) to[j] += from[j];
        }
    }
    return dx;
}

// ----------------------------------------------------------------- attention

Tensor attention_forward(const Tensor& q, const Tensor& v, bool scaled,
                         AttentionCache* cache) {
    if (!q.same_shape(v) || q.rank() != 2)
        throw ShapeError("attention shapes differ: " + shape_str(q.shape) + " vs " +
                         shape_str(v.shape));
    Tensor scores = matmul_nt(q, v);  // [T, T]
    if (scaled) {
        const double s = 1.0 / std::sqrt(static_cast<double>(q.shape[1]));
        for (double& x : scores.data) x *= s;
    }
    Tensor weights = softmax_rows(scores);
    Tensor out = matmul(weights, v);
    if (cache) {
        cache->q = q;
        cache->v = v;
        cache->weights = std::move(weights);
    }
    return out;
}

AttentionGrads attention_backward(const Tensor& upstream, const AttentionCache& cache,
                                  bool scaled) {
    const Tensor& w = cache.weights;
    const std::size_t T = w.shape[0];

    Tensor dw = matmul_nt(upstream, cache.v);   // [T, T]
    Tensor dv = matmul_tn(w, upstream);          // from out = w v

    // Softmax backward per row: ds = w * (dw - rowdot(dw, w)).
    Tensor dscores({T, T});
    for (std::size_t i = 0; i < T; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < T; ++j) dot += dw.data[i * T + j] * w.data[i * T + j];
        for (std::size_t j = 0; j < T; ++j)
            dscores.data[i * T + j] = w.data[i * T + j] * (dw.data[i * T + j] - dot);
    }
    if (scaled) {
        const double s = 1.0 / std::sqrt(static_cast<double>(cache.q.shape[1]));
        for (double& x : dscores.data) x *= s;
    }

    AttentionGrads grads;
    grads.q = matmul(dscores, cache.v);
    Tensor dv_scores = matmul_tn(dscores, cache.q);
    for (std::size_t i = 0; i < dv.size(); ++i) dv.data[i] += dv_scores.data[i];
    grads.v = std::move(dv);
    return grads;
}

// ------------------------------------------------------------------- pooling

Tensor global_avg_pool(const Tensor& x) { return mean_axis0(x); }

Tensor global_avg_pool_backward(const Tensor& upstream, std::size_t time_steps) {
    const std::size_t d = upstream.shape[0];
    Tensor dx({time_steps, d});
    const double inv = 1.0 / static_cast<double>(time_steps);
    for (std::size_t t = 0; t < time_steps; ++t)
        for (std::size_t j = 0; j < d; ++j) dx.data[t * d + j] = upstream.data[j] * inv;
    return dx;
}

// ------------------------------------------------------------------- dropout

Tensor dropout_forward(const Tensor& x, double rate, SeededRng& rng, bool training,
                       Tensor* mask) {
    if (rate < 0.0 || rate >= 1.0)
        throw ParameterError("dropout rate must be in [0,1), got " + std::to_string(rate));
    if (!training || rate == 0.0) {
        if (mask) *mask = Tensor();
        return x;
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    Tensor m(x.shape);
    Tensor out(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = rng.next_double() >= rate ? keep_scale : 0.0;
        m.data[i] = keep;
        out.data[i] = x.data[i] * keep;
    }
    if (mask) *mask = std::move(m);
    return out;
}

Tensor dropout_backward(const Tensor& upstream, const Tensor& mask) {
    if (mask.data.empty()) return upstream;  // inference / rate 0
    Tensor dx(upstream.shape);
    for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] = upstream.data[i] * mask.data[i];
    return dx;
}

// ----------------------------------------------------------------- batchnorm

Tensor batchnorm_forward(const Tensor& batch, BatchNormParams& p, bool training,
                         BatchNormCache* cache) {
    const std::size_t B = batch.shape[0], d = batch.shape[1];
    if (d != p.gamma.shape[0])
        throw ShapeError("batchnorm feature width " + std::to_string(d) + " vs params " +
                         std::to_string(p.gamma.shape[0]));
    Tensor out({B, d});
    if (training) {
        if (B < 2) throw ParameterError("batchnorm needs batch size >= 2 in training mode");
        Tensor mean({d}), var({d});
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t j = 0; j < d; ++j) mean.data[j] += batch.data[i * d + j];
        for (std::size_t j = 0; j < d; ++j) mean.data[j] /= static_cast<double>(B);
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const double c = batch.data[i * d + j] - mean.data[j];
                var.data[j] += c * c;
            }
        for (std::size_t j = 0; j < d; ++j) var.data[j] /= static_cast<double>(B);

        Tensor xhat({B, d}), inv_std({d});
        for (std::size_t j = 0; j < d; ++j)
            inv_std.data[j] = 1.0 / std::sqrt(var.data[j] + p.epsilon);
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const double xh = (batch.data[i * d + j] - mean.data[j]) * inv_std.data[j];
                xhat.data[i * d + j] = xh;
                out.data[i * d + j] = p.gamma.data[j] * xh + p.beta.data[j];
            }
        for (std::size_t j = 0; j < d; ++j) {
            p.running_mean.data[j] =
                p.momentum * p.running_mean.data[j] + (1.0 - p.momentum) * mean.data[j];
            p.running_var.data[j] =
                p.momentum * p.running_var.data[j] + (1.0 - p.momentum) * var.data[j];
        }
        if (cache) {
            cache->xhat = std::move(xhat);
            cache->inv_std = std::move(inv_std);
        }
    } else {
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const double xh = (batch.data[i * d + j] - p.running_mean.data[j]) /
                                  std::sqrt(p.running_var.data[j] + p.epsilon);
                out.data[i * d + j] = p.gamma.data[j] * xh + p.beta.data[j];
            }
        if (cache) *cache = BatchNormCache{};
    }
    return out;
}

Tensor batchnorm_backward(const Tensor& upstream, const BatchNormParams& p,
                          const BatchNormCache& cache, BatchNormGrads& grads) {
    const std::size_t B = upstream.shape[0], d = upstream.shape[1];
    // Standard batch-statistics backward:
    // dx = gamma * inv_std / B * (B*dy - sum(dy) - xhat * sum(dy*xhat))
    Tensor sum_dy({d}), sum_dy_xhat({d});
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double dy = upstream.data[i * d + j];
            sum_dy.data[j] += dy;
            sum_dy_xhat.data[j] += dy * cache.xhat.data[i * d + j];
        }
    for (std::size_t j = 0; j < d; ++j) {
        grads.beta.data[j] += sum_dy.data[j];
        grads.gamma.data[j] += sum_dy_xhat.data[j];
    }
    Tensor dx({B, d});
    const double invB = 1.0 / static_cast<double>(B);
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double dy = upstream.data[i * d + j];
            dx.data[i * d + j] =
                p.gamma.data[j] * cache.inv_std.data[j] * invB *
                (static_cast<double>(B) * dy - sum_dy.data[j] -
                 cache.xhat.data[i * d + j] * sum_dy_xhat.data[j]);
        }
    return dx;
}

// --------------------------------------------------------------------- dense

Tensor dense_forward(const Tensor& x, const DenseParams& p, DenseCache* cache) {
    if (x.rank() != 2 || x.shape[1] != p.weights.shape[0])
        throw ShapeError("dense input " + shape_str(x.shape) + " vs weights " +
                         shape_str(p.weights.shape));
    Tensor z = matmul(x, p.weights);
    const std::size_t B = z.shape[0], out_dim = z.shape[1];
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t j = 0; j < out_dim; ++j) z.data[i * out_dim + j] += p.bias.data[j];

    Tensor y;
    switch (p.activation) {
        case Activation::Linear:
            y = z;
            break;
        case Activation::Tanh:
            y = Tensor(z.shape);
            for (std::size_t i = 0; i < z.size(); ++i) y.data[i] = std::tanh(z.data[i]);
            break;
        case Activation::Sigmoid:
            y = Tensor(z.shape);
            for (std::size_t i = 0; i < z.size(); ++i)
                y.data[i] = 1.0 / (1.0 + std::exp(-z.data[i]));
            break;
        case Activation::Softmax:
            y = softmax_rows(z);
            break;
    }
    if (cache) {
        cache->input = x;
        cache->output = y;
    }
    return y;
}

Tensor activation_backward(Activation act, const Tensor& output, const Tensor& upstream) {
    Tensor dz(upstream.shape);
    const std::size_t n = upstream.size();
    switch (act) {
        case Activation::Linear:
            dz = upstream;
            break;
        case Activation::Tanh:
            for (std::size_t i = 0; i < n; ++i)
                dz.data[i] = upstream.data[i] * (1.0 - output.data[i] * output.data[i]);
            break;
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < n; ++i)
                dz.data[i] = upstream.data[i] * output.data[i] * (1.0 - output.data[i]);
            break;
        case Activation::Softmax: {
            const std::size_t B = output.shape[0], m = output.shape[1];
            for (std::size_t i = 0; i < B; ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < m; ++j)
                    dot += upstream.data[i * m + j] * output.data[i * m + j];
                for (std::size_t j = 0; j < m; ++j)
                    dz.data[i * m + j] =
                        output.data[i * m + j] * (upstream.data[i * m + j] - dot);
            }
            break;
        }
    }
    return dz;
}

Tensor dense_backward(const Tensor& upstream, const DenseParams& p, const DenseCache& cache,
                      DenseGrads& grads) {
    Tensor dz = activation_backward(p.activation, cache.output, upstream);
    Tensor dw = matmul_tn(cache.input, dz);
    for (std::size_t i = 0; i < dw.size(); ++i) grads.weights.data[i] += dw.data[i];
    const std::size_t B = dz.shape[0], out_dim = dz.shape[1];
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t j = 0; j < out_dim; ++j) grads.bias.data[j] += dz.data[i * out_dim + j];
    return matmul_nt(dz, p.weights);
}

}  // namespace sqlgrader
