#include "sqlgrader/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace sqlgrader {

namespace {

BatchNormParams make_bn(std::size_t d) {
    BatchNormParams p;
    p.gamma = Tensor::full({d}, 1.0);
    p.beta = Tensor::zeros({d});
    p.running_mean = Tensor::zeros({d});
    p.running_var = Tensor::full({d}, 1.0);
    return p;
}

Head make_head(std::size_t in_dim, std::size_t out_dim, SeededRng& rng) {
    Head h;
    h.bn = make_bn(in_dim);
    h.dense.weights = glorot_init({in_dim, out_dim}, rng);
    h.dense.bias = Tensor::zeros({out_dim});
    h.dense.activation = Activation::Linear;  // activation chosen per mode
    return h;
}

}  // namespace

GraderNet build(const ModelConfig& config, SeededRng& rng) {
    if (config.vocab_size < 2) throw ParameterError("vocab_size must be >= 2");
    if (config.seq_len == 0 || config.embed_dim == 0 || config.conv_filters == 0 ||
        config.bottleneck_dim == 0 || config.remark_classes == 0 || config.conv_kernel == 0)
        throw ParameterError("model config dimensions must be positive");

    GraderNet net;
    net.config = config;
    net.embedding.table = glorot_init({config.vocab_size, config.embed_dim}, rng);
    for (ConvEncoderParams* conv : {&net.conv_q, &net.conv_v}) {
        conv->kernels =
            glorot_init({config.conv_kernel, config.embed_dim, config.conv_filters}, rng);
        conv->bias = Tensor::zeros({config.conv_filters});
    }
    const std::size_t pooled_dim = 2 * config.conv_filters;
    net.trunk_bn = make_bn(pooled_dim);
    net.bottleneck.weights = glorot_init({pooled_dim, config.bottleneck_dim}, rng);
    net.bottleneck.bias = Tensor::zeros({config.bottleneck_dim});
    net.bottleneck.activation = Activation::Tanh;
    net.head_c = make_head(config.bottleneck_dim, 1, rng);
    net.head_r = make_head(config.bottleneck_dim, config.remark_classes, rng);
    net.head_g = make_head(config.bottleneck_dim, 1, rng);
    return net;
}

namespace {

// Every stored tensor in a fixed order; the checkpoint payload and the
// parameter count both follow this enumeration.
std::vector<std::pair<std::string, Tensor*>> all_tensors(GraderNet& net) {
    std::vector<std::pair<std::string, Tensor*>> out;
    out.emplace_back("embedding.table", &net.embedding.table);
    auto add_conv = [&](const std::string& name, ConvEncoderParams& c) {
        out.emplace_back(name + ".kernels", &c.kernels);
        out.emplace_back(name + ".bias", &c.bias);
    };
    auto add_bn = [&](const std::string& name, BatchNormParams& b) {
        out.emplace_back(name + ".gamma", &b.gamma);
        out.emplace_back(name + ".beta", &b.beta);
        out.emplace_back(name + ".running_mean", &b.running_mean);
        out.emplace_back(name + ".running_var", &b.running_var);
    };
    auto add_dense = [&](const std::string& name, DenseParams& d) {
        out.emplace_back(name + ".weights", &d.weights);
        out.emplace_back(name + ".bias", &d.bias);
    };
    add_conv("conv_q", net.conv_q);
    add_conv("conv_v", net.conv_v);
    add_bn("trunk_bn", net.trunk_bn);
    add_dense("bottleneck", net.bottleneck);
    for (auto& [name, head] :
         {std::pair<const char*, Head*>{"head_c", &net.head_c},
          {"head_r", &net.head_r},
          {"head_g", &net.head_g}}) {
        add_bn(std::string(name) + ".bn", head->bn);
        add_dense(std::string(name) + ".dense", head->dense);
    }
    return out;
}

}  // namespace

std::size_t parameter_count(const GraderNet& net) {
    std::size_t n = 0;
    for (auto& [name, t] : all_tensors(const_cast<GraderNet&>(net))) n += t->size();
    return n;
}

Tensor forward_trunk(GraderNet& net, const std::vector<EncodedStatement>& batch,
                     bool training, SeededRng& rng, TrunkCache* cache) {
    if (batch.empty()) throw ParameterError("forward_trunk: empty batch");
    if (training && batch.size() < 2)
        throw ParameterError("forward_trunk: training needs batch size >= 2 (batchnorm)");
    const std::size_t B = batch.size();
    const std::size_t filters = net.config.conv_filters;
    const std::size_t T = net.config.seq_len;

    Tensor pooled({B, 2 * filters});
    std::vector<ExampleCache> ex_caches(cache ? B : 0);
    for (std::size_t i = 0; i < B; ++i) {
        const std::vector<int>& ids = batch[i].ids;
        if (ids.size() != T)
            throw ShapeError("statement length " + std::to_string(ids.size()) +
                             " does not match seq_len " + std::to_string(T));
        ExampleCache local;
        ExampleCache& ex = cache ? ex_caches[i] : local;
        ex.ids = &ids;
        ex.embedded = embedding_forward(ids, net.embedding);
        ex.q_out = conv_encoder_forward(ex.embedded, net.conv_q, cache ? &ex.conv_q : nullptr);
        ex.v_out = conv_encoder_forward(ex.embedded, net.conv_v, cache ? &ex.conv_v : nullptr);
        Tensor attn_out = attention_forward(ex.q_out, ex.v_out, net.config.attention_scaled,
                                            cache ? &ex.attn : nullptr);
        Tensor pq = global_avg_pool(ex.q_out);
        Tensor pa = global_avg_pool(attn_out);
        for (std::size_t j = 0; j < filters; ++j) {
            pooled(i, j) = pq(j);
            pooled(i, filters + j) = pa(j);
        }
    }

    Tensor mask;
    Tensor dropped = dropout_forward(pooled, net.config.dropout_rate, rng, training, &mask);
    BatchNormCache bn_cache;
    Tensor normed =
        batchnorm_forward(dropped, net.trunk_bn, training, cache ? &bn_cache : nullptr);
    DenseCache dense_cache;
    Tensor z = dense_forward(normed, net.bottleneck, cache ? &dense_cache : nullptr);

    if (cache) {
        cache->examples = std::move(ex_caches);
        cache->pooled = std::move(pooled);
        cache->dropout_mask = std::move(mask);
        cache->bn = std::move(bn_cache);
        cache->bottleneck = std::move(dense_cache);
    }
    return z;
}

namespace {

Tensor sigmoid(const Tensor& z) {
    Tensor y(z.shape);
    for (std::size_t i = 0; i < z.size(); ++i) y.data[i] = 1.0 / (1.0 + std::exp(-z.data[i]));
    return y;
}

Tensor head_logits(GraderNet& net, Head& head, const Tensor& z, bool training,
                   HeadCache* cache) {
    (void)net;
    BatchNormCache bn_cache;
    Tensor normed = batchnorm_forward(z, head.bn, training, cache ? &bn_cache : nullptr);
    DenseCache dense_cache;
    Tensor logits = dense_forward(normed, head.dense, cache ? &dense_cache : nullptr);
    if (cache) {
        cache->bn = std::move(bn_cache);
        cache->dense = std::move(dense_cache);
    }
    return logits;
}

}  // namespace

Tensor forward_joint(GraderNet& net, const std::vector<EncodedStatement>& batch,
                     bool training, SeededRng& rng, JointCache* cache) {
    TrunkCache trunk_cache;
    Tensor z = forward_trunk(net, batch, training, rng, cache ? &trunk_cache : nullptr);
    const std::size_t B = z.shape[0];
    const std::size_t R = net.config.remark_classes;

    HeadCache cc, cr, cg;
    Tensor lc = head_logits(net, net.head_c, z, training, cache ? &cc : nullptr);
    Tensor lr = head_logits(net, net.head_r, z, training, cache ? &cr : nullptr);
    Tensor lg = head_logits(net, net.head_g, z, training, cache ? &cg : nullptr);

    Tensor out({B, R + 2});
    for (std::size_t i = 0; i < B; ++i) {
        out(i, 0) = 1.0 / (1.0 + std::exp(-lc(i, 0)));
        for (std::size_t j = 0; j < R; ++j) out(i, 1 + j) = 1.0 / (1.0 + std::exp(-lr(i, j)));
        out(i, R + 1) = 1.0 / (1.0 + std::exp(-lg(i, 0)));
    }
    if (cache) {
        cache->trunk = std::move(trunk_cache);
        cache->head_c = std::move(cc);
        cache->head_r = std::move(cr);
        cache->head_g = std::move(cg);
        cache->out6 = out;
    }
    return out;
}

Tensor forward_head(GraderNet& net, const std::vector<EncodedStatement>& batch, char head,
                    bool training, SeededRng& rng, JointCache* cache) {
    TrunkCache trunk_cache;
    Tensor z = forward_trunk(net, batch, training, rng, cache ? &trunk_cache : nullptr);
    if (cache) cache->trunk = std::move(trunk_cache);

    HeadCache hc;
    Tensor activated;
    switch (head) {
        case 'c':
            activated = sigmoid(head_logits(net, net.head_c, z, training, cache ? &hc : nullptr));
            break;
        case 'r':
            activated =
                softmax_rows(head_logits(net, net.head_r, z, training, cache ? &hc : nullptr));
            break;
        case 'g':
            activated = sigmoid(head_logits(net, net.head_g, z, training, cache ? &hc : nullptr));
            break;
        default:
            throw ParameterError("forward_head: head must be 'c', 'r' or 'g'");
    }
    if (cache) {
        hc.activated = activated;
        (head == 'c' ? cache->head_c : head == 'r' ? cache->head_r : cache->head_g) =
            std::move(hc);
    }
    return activated;
}

Prediction predict(const GraderNet& net, const EncodedStatement& statement) {
    GraderNet& mutable_net = const_cast<GraderNet&>(net);  // inference does not mutate
    SeededRng rng(0);
    TrunkCache* no_cache = nullptr;
    Tensor z = forward_trunk(mutable_net, {statement}, false, rng, no_cache);

    Tensor lc = head_logits(mutable_net, mutable_net.head_c, z, false, nullptr);
    Tensor lr = head_logits(mutable_net, mutable_net.head_r, z, false, nullptr);
    Tensor lg = head_logits(mutable_net, mutable_net.head_g, z, false, nullptr);

    Prediction p;
    p.p_correct = 1.0 / (1.0 + std::exp(-lc(0, 0)));
    Tensor rp = softmax_rows(lr);
    for (std::size_t j = 0; j < 4 && j < rp.shape[1]; ++j) p.remark_probs[j] = rp(0, j);
    p.grade_hat = 1.0 / (1.0 + std::exp(-lg(0, 0)));
    for (std::size_t j = 0; j < 2 && j < z.shape[1]; ++j) p.bottleneck_xy[j] = z(0, j);
    return p;
}

// ----------------------------------------------------------------- gradients

Gradients zero_gradients(const GraderNet& net) {
    Gradients g;
    g.embedding = Tensor::zeros(net.embedding.table.shape);
    for (auto& [src, dst] : {std::pair<const ConvEncoderParams*, ConvGrads*>{&net.conv_q, &g.conv_q},
                             {&net.conv_v, &g.conv_v}}) {
        dst->kernels = Tensor::zeros(src->kernels.shape);
        dst->bias = Tensor::zeros(src->bias.shape);
    }
    auto zero_bn = [](const BatchNormParams& p, BatchNormGrads& out) {
        out.gamma = Tensor::zeros(p.gamma.shape);
        out.beta = Tensor::zeros(p.beta.shape);
    };
    auto zero_dense = [](const DenseParams& p, DenseGrads& out) {
        out.weights = Tensor::zeros(p.weights.shape);
        out.bias = Tensor::zeros(p.bias.shape);
    };
    zero_bn(net.trunk_bn, g.trunk_bn);
    zero_dense(net.bottleneck, g.bottleneck);
    zero_bn(net.head_c.bn, g.head_c_bn);
    zero_bn(net.head_r.bn, g.head_r_bn);
    zero_bn(net.head_g.bn, g.head_g_bn);
    zero_dense(net.head_c.dense, g.head_c_dense);
    zero_dense(net.head_r.dense, g.head_r_dense);
    zero_dense(net.head_g.dense, g.head_g_dense);
    return g;
}

std::vector<Tensor*> trainable_params(GraderNet& net) {
    return {&net.embedding.table,
            &net.conv_q.kernels,    &net.conv_q.bias,
            &net.conv_v.kernels,    &net.conv_v.bias,
            &net.trunk_bn.gamma,    &net.trunk_bn.beta,
            &net.bottleneck.weights, &net.bottleneck.bias,
            &net.head_c.bn.gamma,   &net.head_c.bn.beta,
            &net.head_c.dense.weights, &net.head_c.dense.bias,
            &net.head_r.bn.gamma,   &net.head_r.bn.beta,
            &net.head_r.dense.weights, &net.head_r.dense.bias,
            &net.head_g.bn.gamma,   &net.head_g.bn.beta,
            &net.head_g.dense.weights, &net.head_g.dense.bias};
}

std::vector<Tensor*> gradient_slots(Gradients& g) {
    return {&g.embedding,
            &g.conv_q.kernels,      &g.conv_q.bias,
            &g.conv_v.kernels,      &g.conv_v.bias,
            &g.trunk_bn.gamma,      &g.trunk_bn.beta,
            &g.bottleneck.weights,  &g.bottleneck.bias,
            &g.head_c_bn.gamma,     &g.head_c_bn.beta,
            &g.head_c_dense.weights, &g.head_c_dense.bias,
            &g.head_r_bn.gamma,     &g.head_r_bn.beta,
            &g.head_r_dense.weights, &g.head_r_dense.bias,
            &g.head_g_bn.gamma,     &g.head_g_bn.beta,
            &g.head_g_dense.weights, &g.head_g_dense.bias};
}

namespace {

// Backward through one head given the gradient w.r.t. its linear logits.
// Returns the gradient w.r.t. the bottleneck activations.
Tensor head_backward(const GraderNet& net, const Head& head, const HeadCache& cache,
                     const Tensor& d_logits, BatchNormGrads& bn_grads,
                     DenseGrads& dense_grads) {
    (void)net;
    Tensor d_normed = dense_backward(d_logits, head.dense, cache.dense, dense_grads);
    return batchnorm_backward(d_normed, head.bn, cache.bn, bn_grads);
}

// Backward through the shared trunk given the gradient w.r.t. the bottleneck
// output z.
void trunk_backward(const GraderNet& net, const TrunkCache& cache, const Tensor& dz,
                    Gradients& grads) {
    Tensor d_normed = dense_backward(dz, net.bottleneck, cache.bottleneck, grads.bottleneck);
    Tensor d_dropped = batchnorm_backward(d_normed, net.trunk_bn, cache.bn, grads.trunk_bn);
    Tensor d_pooled = dropout_backward(d_dropped, cache.dropout_mask);

    const std::size_t filters = net.config.conv_filters;
    const std::size_t T = net.config.seq_len;
    const std::size_t B = cache.examples.size();
    for (std::size_t i = 0; i < B; ++i) {
        const ExampleCache& ex = cache.examples[i];
        Tensor d_pq({filters}), d_pa({filters});
        for (std::size_t j = 0; j < filters; ++j) {
            d_pq(j) = d_pooled(i, j);
            d_pa(j) = d_pooled(i, filters + j);
        }
        Tensor d_attn_out = global_avg_pool_backward(d_pa, T);
        AttentionGrads attn =
            attention_backward(d_attn_out, ex.attn, net.config.attention_scaled);
        Tensor d_q = global_avg_pool_backward(d_pq, T);
        for (std::size_t n = 0; n < d_q.size(); ++n) d_q.data[n] += attn.q.data[n];

        Tensor d_emb_q = conv_encoder_backward(d_q, net.conv_q, ex.conv_q,
                                               net.config.embed_dim, grads.conv_q);
        Tensor d_emb_v = conv_encoder_backward(attn.v, net.conv_v, ex.conv_v,
                                               net.config.embed_dim, grads.conv_v);
        for (std::size_t n = 0; n < d_emb_q.size(); ++n) d_emb_q.data[n] += d_emb_v.data[n];
        embedding_backward(*ex.ids, d_emb_q, grads.embedding);
    }
}

Tensor sigmoid_backward_from_output(const Tensor& output, const Tensor& upstream) {
    Tensor dz(upstream.shape);
    for (std::size_t i = 0; i < dz.size(); ++i)
        dz.data[i] = upstream.data[i] * output.data[i] * (1.0 - output.data[i]);
    return dz;
}

}  // namespace

void backward_joint(const GraderNet& net, const JointCache& cache, const Tensor& d_out6,
                    Gradients& grads) {
    const std::size_t B = d_out6.shape[0];
    const std::size_t R = net.config.remark_classes;
    Tensor d_sig = sigmoid_backward_from_output(cache.out6, d_out6);  // d logits, all 6

    Tensor dlc({B, 1}), dlr({B, R}), dlg({B, 1});
    for (std::size_t i = 0; i < B; ++i) {
        dlc(i, 0) = d_sig(i, 0);
        for (std::size_t j = 0; j < R; ++j) dlr(i, j) = d_sig(i, 1 + j);
        dlg(i, 0) = d_sig(i, R + 1);
    }

    Tensor dz = head_backward(net, net.head_c, cache.head_c, dlc, grads.head_c_bn,
                              grads.head_c_dense);
    Tensor dz_r = head_backward(net, net.head_r, cache.head_r, dlr, grads.head_r_bn,
                                grads.head_r_dense);
    Tensor dz_g = head_backward(net, net.head_g, cache.head_g, dlg, grads.head_g_bn,
                                grads.head_g_dense);
    for (std::size_t i = 0; i < dz.size(); ++i) dz.data[i] += dz_r.data[i] + dz_g.data[i];
    trunk_backward(net, cache.trunk, dz, grads);
}

void backward_head(const GraderNet& net, const JointCache& cache, char head,
                   const Tensor& d_head, Gradients& grads) {
    const HeadCache* hc;
    const Head* params;
    BatchNormGrads* bn_grads;
    DenseGrads* dense_grads;
    Activation act;
    switch (head) {
        case 'c':
            hc = &cache.head_c; params = &net.head_c;
            bn_grads = &grads.head_c_bn; dense_grads = &grads.head_c_dense;
            act = Activation::Sigmoid;
            break;
        case 'r':
            hc = &cache.head_r; params = &net.head_r;
            bn_grads = &grads.head_r_bn; dense_grads = &grads.head_r_dense;
            act = Activation::Softmax;
            break;
        case 'g':
            hc = &cache.head_g; params = &net.head_g;
            bn_grads = &grads.head_g_bn; dense_grads = &grads.head_g_dense;
            act = Activation::Sigmoid;
            break;
        default:
            throw ParameterError("backward_head: head must be 'c', 'r' or 'g'");
    }
    Tensor d_logits = activation_backward(act, hc->activated, d_head);
    Tensor dz = head_backward(net, *params, *hc, d_logits, *bn_grads, *dense_grads);
    trunk_backward(net, cache.trunk, dz, grads);
}

// ---------------------------------------------------------------- checkpoint

std::uint32_t crc32(const unsigned char* data, std::size_t len) {
    static std::uint32_t table[256];
    static bool built = false;
    if (!built) {
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            table[i] = c;
        }
        built = true;
    }
    std::uint32_t c = 0xffffffffu;
    for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xffu] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

namespace {

constexpr int kCheckpointVersion = 1;

// Canonical payload: every tensor's doubles as little-endian bytes, in
// enumeration order.
std::uint32_t payload_crc(GraderNet& net) {
    std::vector<unsigned char> bytes;
    for (auto& [name, t] : all_tensors(net)) {
        const std::size_t off = bytes.size();
        bytes.resize(off + t->data.size() * sizeof(double));
        std::memcpy(bytes.data() + off, t->data.data(), t->data.size() * sizeof(double));
    }
    return crc32(bytes.data(), bytes.size());
}

nlohmann::json config_to_json(const ModelConfig& c) {
    return {{"vocab_size", c.vocab_size},
            {"seq_len", c.seq_len},
            {"embed_dim", c.embed_dim},
            {"conv_filters", c.conv_filters},
            {"conv_kernel", c.conv_kernel},
            {"dropout_rate", c.dropout_rate},
            {"bottleneck_dim", c.bottleneck_dim},
            {"remark_classes", c.remark_classes},
            {"attention_scaled", c.attention_scaled},
            {"seed", c.seed}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.seq_len = j.at("seq_len").get<std::size_t>();
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.conv_filters = j.at("conv_filters").get<std::size_t>();
    c.conv_kernel = j.at("conv_kernel").get<std::size_t>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    c.bottleneck_dim = j.at("bottleneck_dim").get<std::size_t>();
    c.remark_classes = j.at("remark_classes").get<std::size_t>();
    c.attention_scaled = j.at("attention_scaled").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

std::uint32_t parameter_checksum(const GraderNet& net) {
    return payload_crc(const_cast<GraderNet&>(net));
}

void save_checkpoint(const GraderNet& net, const Vocabulary& vocab, const std::string& path) {
    GraderNet& n = const_cast<GraderNet&>(net);
    nlohmann::json doc;
    doc["format_version"] = kCheckpointVersion;
    doc["config"] = config_to_json(net.config);
    doc["bn_momentum"] = net.trunk_bn.momentum;
    doc["bn_epsilon"] = net.trunk_bn.epsilon;
    doc["vocabulary"] = nlohmann::json::parse(vocab_to_json(vocab));
    nlohmann::json tensors = nlohmann::json::object();
    for (auto& [name, t] : all_tensors(n)) {
        tensors[name] = {{"shape", t->shape}, {"data", t->data}};
    }
    doc["tensors"] = std::move(tensors);
    doc["crc32"] = payload_crc(n);

    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << doc.dump() << "\n";
    if (!out) throw IoError("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read checkpoint: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("checkpoint is truncated or not valid JSON: ") + e.what());
    }
    if (!doc.contains("format_version") ||
        doc["format_version"].get<int>() != kCheckpointVersion)
        throw IoError("unsupported checkpoint format_version");

    Checkpoint cp;
    cp.net.config = config_from_json(doc.at("config"));
    cp.vocab = vocab_from_json(doc.at("vocabulary").dump());

    // Materialize parameter tensors with the right shapes, then fill them.
    SeededRng rng(cp.net.config.seed);
    cp.net = build(cp.net.config, rng);
    const double momentum = doc.value("bn_momentum", 0.99);
    const double epsilon = doc.value("bn_epsilon", 1e-3);
    for (BatchNormParams* bn : {&cp.net.trunk_bn, &cp.net.head_c.bn, &cp.net.head_r.bn,
                                &cp.net.head_g.bn}) {
        bn->momentum = momentum;
        bn->epsilon = epsilon;
    }
    const auto& tensors = doc.at("tensors");
    for (auto& [name, t] : all_tensors(cp.net)) {
        if (!tensors.contains(name)) throw IoError("checkpoint missing tensor " + name);
        const auto& entry = tensors.at(name);
        const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
        if (shape != t->shape)
            throw IoError("checkpoint tensor " + name + " has shape " + shape_str(shape) +
                          ", expected " + shape_str(t->shape));
        std::size_t expected = 1;
        for (std::size_t d : t->shape) expected *= d;
        t->data = entry.at("data").get<std::vector<double>>();
        if (t->data.size() != expected)
            throw IoError("checkpoint tensor " + name + " has wrong element count");
    }
    const std::uint32_t stored = doc.at("crc32").get<std::uint32_t>();
    const std::uint32_t actual = payload_crc(cp.net);
    if (stored != actual)
        throw IoError("checkpoint checksum failure: stored " + std::to_string(stored) +
                      ", computed " + std::to_string(actual));
    return cp;
}

}  // namespace sqlgrader
