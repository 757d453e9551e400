#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "sqlgrader/layers.hpp"

using namespace sqlgrader;
using gradcheck::max_rel_error;
using gradcheck::numeric_gradient;
using gradcheck::random_tensor;
using gradcheck::weighted_sum;

namespace {
constexpr double kTol = 1e-4;
}

// ------------------------------------------------------------------ embedding

TEST_CASE("embedding lookup") {
    EmbeddingParams p;
    p.table = Tensor({3, 2}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    Tensor out = embedding_forward({0, 0, 0}, p);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(out(t, 0) == 0.1);
        CHECK(out(t, 1) == 0.2);
    }
    Tensor one = embedding_forward({2}, p);
    CHECK(one(0, 0) == 0.5);
    CHECK(one(0, 1) == 0.6);

    CHECK_THROWS_AS(embedding_forward({3}, p), ShapeError);
}

TEST_CASE("embedding gradient accumulates over repeated ids") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SeededRng rng(seed);
        EmbeddingParams p;
        p.table = random_tensor({4, 3}, rng);
        const std::vector<int> ids = {1, 2, 1};  // repeated id 1
        Tensor w = random_tensor({3, 3}, rng);

        Tensor analytic = Tensor::zeros(p.table.shape);
        embedding_backward(ids, w, analytic);

        Tensor numeric = numeric_gradient(
            p.table, [&] { return weighted_sum(embedding_forward(ids, p), w); });
        CHECK(max_rel_error(analytic, numeric) < kTol);
    }
}

// --------------------------------------------------------------- conv encoder

TEST_CASE("conv identity kernel and bias-only input") {
    // Middle tap 1 on the matching channel: output equals the (nonnegative)
    // input channel.
    ConvEncoderParams p;
    p.kernels = Tensor::zeros({3, 1, 1});
    p.kernels(1, 0, 0) = 1.0;
    p.bias = Tensor::zeros({1});
    Tensor x({4, 1}, {0.5, 1.0, 2.0, 0.25});
    Tensor out = conv_encoder_forward(x, p, nullptr);
    for (std::size_t t = 0; t < 4; ++t) CHECK(out(t, 0) == doctest::Approx(x(t, 0)));

    p.bias(0) = -0.5;
    Tensor zero = Tensor::zeros({4, 1});
    Tensor bias_only = conv_encoder_forward(zero, p, nullptr);
    for (std::size_t t = 0; t < 4; ++t) CHECK(bias_only(t, 0) == 0.0);  // ReLU(-0.5)
    p.bias(0) = 0.75;
    bias_only = conv_encoder_forward(zero, p, nullptr);
    for (std::size_t t = 0; t < 4; ++t) CHECK(bias_only(t, 0) == doctest::Approx(0.75));
}

namespace {

// Brute-force sliding-window correlation oracle with zero padding and ReLU.
Tensor conv_oracle(const Tensor& x, const ConvEncoderParams& p) {
    const std::size_t T = x.shape[0], cin = x.shape[1];
    const std::size_t k = p.kernels.shape[0], cout = p.kernels.shape[2];
    Tensor out({T, cout});
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t o = 0; o < cout; ++o) {
            double acc = p.bias(o);
            for (std::size_t tap = 0; tap < k; ++tap)
                for (std::size_t c = 0; c < cin; ++c) {
                    const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + tap) -
                                               static_cast<std::ptrdiff_t>(k / 2);
                    if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
                    acc += x(static_cast<std::size_t>(src), c) * p.kernels(tap, c, o);
                }
            out(t, o) = acc > 0.0 ? acc : 0.0;
        }
    return out;
}

}  // namespace

TEST_CASE("conv matches the sliding-window oracle") {
    SeededRng rng(17);
    ConvEncoderParams p;
    p.kernels = random_tensor({3, 2, 1}, rng);
    p.bias = random_tensor({1}, rng);
    Tensor x = random_tensor({5, 2}, rng);
    Tensor got = conv_encoder_forward(x, p, nullptr);
    Tensor want = conv_oracle(x, p);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));

    CHECK_THROWS_AS(conv_encoder_forward(Tensor({5, 3}), p, nullptr), ShapeError);
}

TEST_CASE("conv gradients vs finite differences") {
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        SeededRng rng(seed);
        ConvEncoderParams p;
        p.kernels = random_tensor({3, 2, 4}, rng);
        p.bias = random_tensor({4}, rng);
        Tensor x = random_tensor({6, 2}, rng);
        Tensor w = random_tensor({6, 4}, rng);

        ConvCache cache;
        conv_encoder_forward(x, p, &cache);
        ConvGrads grads{Tensor::zeros(p.kernels.shape), Tensor::zeros(p.bias.shape)};
        Tensor dx = conv_encoder_backward(w, p, cache, 2, grads);

        auto objective = [&] { return weighted_sum(conv_encoder_forward(x, p, nullptr), w); };
        CHECK(max_rel_error(dx, numeric_gradient(x, objective)) < kTol);
        CHECK(max_rel_error(grads.kernels, numeric_gradient(p.kernels, objective)) < kTol);
        CHECK(max_rel_error(grads.bias, numeric_gradient(p.bias, objective)) < kTol);
    }
}

// ------------------------------------------------------------------ attention

TEST_CASE("attention degenerate cases") {
    // Zero q: uniform weights, every output row is the column mean of v.
    SeededRng rng(5);
    Tensor q = Tensor::zeros({4, 3});
    Tensor v = random_tensor({4, 3}, rng);
    Tensor out = attention_forward(q, v, false, nullptr);
    Tensor mean = mean_axis0(v);
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(out(t, j) == doctest::Approx(mean(j)).epsilon(1e-12));

    // Constant v rows: output is that constant row for any q.
    Tensor qc = random_tensor({4, 3}, rng);
    Tensor vc({4, 3});
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t j = 0; j < 3; ++j) vc(t, j) = 0.25 * static_cast<double>(j + 1);
    Tensor out2 = attention_forward(qc, vc, false, nullptr);
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(out2(t, j) == doctest::Approx(vc(0, j)).epsilon(1e-12));
}

TEST_CASE("attention matches the direct oracle on a 3-position toy") {
    Tensor q({3, 2}, {0.2, -0.1, 0.5, 0.3, -0.4, 0.6});
    Tensor v({3, 2}, {1.0, 0.0, 0.0, 1.0, 0.5, 0.5});
    // Direct three-line oracle: scores, row softmax, mix.
    Tensor scores = matmul_nt(q, v);
    Tensor weights = softmax_rows(scores);
    Tensor want = matmul(weights, v);
    Tensor got = attention_forward(q, v, false, nullptr);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
}

TEST_CASE("attention weight rows sum to 1") {
    SeededRng rng(21);
    Tensor q = random_tensor({6, 4}, rng, -3, 3);
    Tensor v = random_tensor({6, 4}, rng, -3, 3);
    AttentionCache cache;
    attention_forward(q, v, false, &cache);
    for (std::size_t i = 0; i < 6; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 6; ++j) sum += cache.weights(i, j);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("attention gradients vs finite differences") {
    for (std::uint64_t seed = 200; seed < 210; ++seed) {
        for (bool scaled : {false, true}) {
            SeededRng rng(seed);
            Tensor q = random_tensor({5, 3}, rng);
            Tensor v = random_tensor({5, 3}, rng);
            Tensor w = random_tensor({5, 3}, rng);

            AttentionCache cache;
            attention_forward(q, v, scaled, &cache);
            AttentionGrads grads = attention_backward(w, cache, scaled);

            auto objective = [&] {
                return weighted_sum(attention_forward(q, v, scaled, nullptr), w);
            };
            CHECK(max_rel_error(grads.q, numeric_gradient(q, objective)) < kTol);
            CHECK(max_rel_error(grads.v, numeric_gradient(v, objective)) < kTol);
        }
    }
}

// -------------------------------------------------------------------- pooling

TEST_CASE("global average pooling forward and backward") {
    Tensor onehot = Tensor::zeros({4, 2});
    onehot(2, 0) = 1.0;
    onehot(2, 1) = 3.0;
    Tensor pooled = global_avg_pool(onehot);
    CHECK(pooled(0) == doctest::Approx(0.25));
    CHECK(pooled(1) == doctest::Approx(0.75));

    Tensor g({2}, {4.0, 8.0});
    Tensor dx = global_avg_pool_backward(g, 4);
    for (std::size_t t = 0; t < 4; ++t) {
        CHECK(dx(t, 0) == doctest::Approx(1.0));
        CHECK(dx(t, 1) == doctest::Approx(2.0));
    }
}

// -------------------------------------------------------------------- dropout

TEST_CASE("dropout identity paths") {
    SeededRng rng(1);
    Tensor x = gradcheck::random_tensor({10, 10}, rng);
    Tensor mask;
    Tensor inference = dropout_forward(x, 0.25, rng, false, &mask);
    CHECK(inference.data == x.data);
    Tensor zero_rate = dropout_forward(x, 0.0, rng, true, &mask);
    CHECK(zero_rate.data == x.data);
    CHECK_THROWS_AS(dropout_forward(x, 1.0, rng, true, &mask), ParameterError);
}

TEST_CASE("dropout preserves expectation and reproduces masks") {
    SeededRng rng(77);
    Tensor ones = Tensor::full({1000, 100}, 1.0);
    Tensor mask;
    Tensor dropped = dropout_forward(ones, 0.25, rng, true, &mask);
    double mean = 0.0;
    for (double v : dropped.data) mean += v;
    mean /= static_cast<double>(dropped.size());
    CHECK(mean > 0.98);
    CHECK(mean < 1.02);

    SeededRng r1(5), r2(5);
    Tensor m1, m2;
    dropout_forward(ones, 0.25, r1, true, &m1);
    dropout_forward(ones, 0.25, r2, true, &m2);
    CHECK(m1.data == m2.data);
}

TEST_CASE("dropout backward applies the stored mask") {
    for (std::uint64_t seed = 300; seed < 305; ++seed) {
        SeededRng rng(seed);
        Tensor x = random_tensor({4, 4}, rng);
        Tensor w = random_tensor({4, 4}, rng);
        Tensor mask;
        SeededRng drop_rng(seed + 1000);
        dropout_forward(x, 0.25, drop_rng, true, &mask);
        Tensor analytic = dropout_backward(w, mask);
        Tensor numeric = numeric_gradient(x, [&] {
            SeededRng fresh(seed + 1000);  // same mask every evaluation
            return weighted_sum(dropout_forward(x, 0.25, fresh, true, nullptr), w);
        });
        CHECK(max_rel_error(analytic, numeric) < kTol);
    }
}

// ------------------------------------------------------------------ batchnorm

namespace {

BatchNormParams fresh_bn(std::size_t d) {
    BatchNormParams p;
    p.gamma = Tensor::full({d}, 1.0);
    p.beta = Tensor::zeros({d});
    p.running_mean = Tensor::zeros({d});
    p.running_var = Tensor::full({d}, 1.0);
    return p;
}

}  // namespace

TEST_CASE("batchnorm normalizes and applies affine") {
    SeededRng rng(31);
    Tensor x = random_tensor({16, 3}, rng, -2, 5);
    BatchNormParams p = fresh_bn(3);
    Tensor out = batchnorm_forward(x, p, true, nullptr);
    for (std::size_t j = 0; j < 3; ++j) {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < 16; ++i) mean += out(i, j) / 16.0;
        for (std::size_t i = 0; i < 16; ++i) var += (out(i, j) - mean) * (out(i, j) - mean) / 16.0;
        CHECK(std::abs(mean) < 1e-9);
        CHECK(var == doctest::Approx(1.0).epsilon(2e-3));  // epsilon = 1e-3 shrinks it
    }

    BatchNormParams affine = fresh_bn(3);
    affine.gamma.fill(2.0);
    affine.beta.fill(3.0);
    Tensor out2 = batchnorm_forward(x, affine, true, nullptr);
    for (std::size_t i = 0; i < out.size(); ++i)
        CHECK(out2.data[i] == doctest::Approx(3.0 + 2.0 * out.data[i]).epsilon(1e-12));

    CHECK_THROWS_AS(batchnorm_forward(Tensor({1, 3}), p, true, nullptr), ParameterError);
}

TEST_CASE("batchnorm inference uses running statistics") {
    SeededRng rng(32);
    Tensor x = random_tensor({4, 2}, rng);
    BatchNormParams p = fresh_bn(2);  // running mean 0, var 1
    Tensor out = batchnorm_forward(x, p, false, nullptr);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(out.data[i] == doctest::Approx(x.data[i] / std::sqrt(1.0 + 1e-3)).epsilon(1e-12));
}

TEST_CASE("batchnorm running statistics converge on a stationary stream") {
    SeededRng rng(33);
    BatchNormParams p = fresh_bn(2);
    // Stream with true mean ~2.0 and variance ~1/3 (uniform on [1,3]).
    for (int step = 0; step < 1000; ++step) {
        Tensor batch = random_tensor({64, 2}, rng, 1.0, 3.0);
        batchnorm_forward(batch, p, true, nullptr);
    }
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(p.running_mean(j) == doctest::Approx(2.0).epsilon(0.01));
        CHECK(p.running_var(j) == doctest::Approx(1.0 / 3.0).epsilon(0.05));
    }
}

TEST_CASE("batchnorm gradients vs finite differences") {
    for (std::uint64_t seed = 400; seed < 410; ++seed) {
        SeededRng rng(seed);
        Tensor x = random_tensor({5, 3}, rng);
        Tensor w = random_tensor({5, 3}, rng);
        BatchNormParams p = fresh_bn(3);
        p.gamma = random_tensor({3}, rng, 0.5, 1.5);
        p.beta = random_tensor({3}, rng);

        BatchNormParams run = p;
        BatchNormCache cache;
        batchnorm_forward(x, run, true, &cache);
        BatchNormGrads grads{Tensor::zeros({3}), Tensor::zeros({3})};
        Tensor dx = batchnorm_backward(w, p, cache, grads);

        auto objective = [&] {
            BatchNormParams copy = p;  // keep running stats untouched across evals
            return weighted_sum(batchnorm_forward(x, copy, true, nullptr), w);
        };
        CHECK(max_rel_error(dx, numeric_gradient(x, objective)) < kTol);
        CHECK(max_rel_error(grads.gamma, numeric_gradient(p.gamma, objective)) < kTol);
        CHECK(max_rel_error(grads.beta, numeric_gradient(p.beta, objective)) < kTol);
    }
}

// ---------------------------------------------------------------------- dense

TEST_CASE("dense forward basics") {
    DenseParams p;
    p.weights = Tensor::zeros({2, 2});
    p.bias = Tensor({2}, {0.3, -0.7});
    p.activation = Activation::Tanh;
    Tensor x({3, 2}, {1, 2, 3, 4, 5, 6});
    Tensor out = dense_forward(x, p, nullptr);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(out(i, 0) == doctest::Approx(std::tanh(0.3)).epsilon(1e-15));
        CHECK(out(i, 1) == doctest::Approx(std::tanh(-0.7)).epsilon(1e-15));
    }

    DenseParams id;
    id.weights = Tensor({2, 2}, {1, 0, 0, 1});
    id.bias = Tensor::zeros({2});
    id.activation = Activation::Linear;
    Tensor same = dense_forward(x, id, nullptr);
    CHECK(same.data == x.data);

    DenseParams sig;
    sig.weights = Tensor({2, 1}, {0.5, -0.25});
    sig.bias = Tensor({1}, {0.125});
    sig.activation = Activation::Sigmoid;
    Tensor one({1, 2}, {2.0, 4.0});
    const double z = 2.0 * 0.5 + 4.0 * -0.25 + 0.125;
    CHECK(dense_forward(one, sig, nullptr)(0, 0) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-15));

    CHECK_THROWS_AS(dense_forward(Tensor({1, 3}), sig, nullptr), ShapeError);
}

TEST_CASE("dense gradients vs finite differences for every activation") {
    for (Activation act : {Activation::Linear, Activation::Tanh, Activation::Sigmoid,
                           Activation::Softmax}) {
        for (std::uint64_t seed = 500; seed < 510; ++seed) {
            SeededRng rng(seed);
            DenseParams p;
            p.weights = random_tensor({3, 4}, rng);
            p.bias = random_tensor({4}, rng);
            p.activation = act;
            Tensor x = random_tensor({5, 3}, rng);
            Tensor w = random_tensor({5, 4}, rng);

            DenseCache cache;
            dense_forward(x, p, &cache);
            DenseGrads grads{Tensor::zeros(p.weights.shape), Tensor::zeros(p.bias.shape)};
            Tensor dx = dense_backward(w, p, cache, grads);

            auto objective = [&] { return weighted_sum(dense_forward(x, p, nullptr), w); };
            CHECK(max_rel_error(dx, numeric_gradient(x, objective)) < kTol);
            CHECK(max_rel_error(grads.weights, numeric_gradient(p.weights, objective)) < kTol);
            CHECK(max_rel_error(grads.bias, numeric_gradient(p.bias, objective)) < kTol);
        }
    }
}

TEST_CASE("zero upstream gives zero gradients") {
    SeededRng rng(9);
    DenseParams p;
    p.weights = random_tensor({3, 2}, rng);
    p.bias = random_tensor({2}, rng);
    p.activation = Activation::Tanh;
    Tensor x = random_tensor({4, 3}, rng);
    DenseCache cache;
    dense_forward(x, p, &cache);
    DenseGrads grads{Tensor::zeros(p.weights.shape), Tensor::zeros(p.bias.shape)};
    Tensor dx = dense_backward(Tensor::zeros({4, 2}), p, cache, grads);
    for (double v : dx.data) CHECK(v == 0.0);
    for (double v : grads.weights.data) CHECK(v == 0.0);
    for (double v : grads.bias.data) CHECK(v == 0.0);
}
