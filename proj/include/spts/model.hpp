#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "spts/codec.hpp"
#include "spts/ops.hpp"

namespace spts::model {

struct ModelConfig {
    int image_h = 128;
    int image_w = 128;
    std::vector<int> stem_channels = {32, 64, 128};  // 3x3 convs, stride 2, pad 1
    int d_model = 128;
    int n_heads = 4;
    int n_encoder_layers = 3;
    int n_decoder_layers = 3;
    int ffn_dim = 512;
    double dropout = 0.1;
    int max_decode_len = 27 * 60 + 2;
    int vocab_size = 1039;

    int total_stride() const { return 1 << static_cast<int>(stem_channels.size()); }
    int grid_h() const { return image_h / total_stride(); }
    int grid_w() const { return image_w / total_stride(); }
    int memory_tokens() const { return grid_h() * grid_w(); }

    void validate() const {
        if (d_model % n_heads != 0)
            throw std::invalid_argument("ModelConfig: d_model must be divisible by n_heads");
        if (stem_channels.empty() || stem_channels.back() != d_model)
            throw std::invalid_argument("ModelConfig: last stem channel must equal d_model");
        if (image_h % total_stride() != 0 || image_w % total_stride() != 0)
            throw std::invalid_argument("ModelConfig: image size must be divisible by stride");
        if (max_decode_len < 3)
            throw std::invalid_argument("ModelConfig: max_decode_len too small");
    }
};

namespace detail {

// Interleaved sin/cos over pairs of channels, the usual transformer encoding.
inline void sincos_fill(std::vector<float>& row, size_t offset, int dims, double pos) {
    for (int i = 0; i + 1 < dims; i += 2) {
        const double freq = std::pow(10000.0, -static_cast<double>(i) / dims);
        row[offset + static_cast<size_t>(i)] = static_cast<float>(std::sin(pos * freq));
        row[offset + static_cast<size_t>(i) + 1] = static_cast<float>(std::cos(pos * freq));
    }
}

}  // namespace detail

template <class S>
struct SpotterT {
    using T = ad::TensorT<S>;

    struct Conv {
        T w, b;
    };
    struct Linear {
        T w, b;  // y = x @ w + b, w stored [in x out]
    };
    struct Norm {
        T gain, bias;
    };
    struct Attention {
        Linear q, k, v, o;
    };
    struct EncLayer {
        Norm ln1;
        Attention attn;
        Norm ln2;
        Linear ff1, ff2;
    };
    struct DecLayer {
        Norm ln1;
        Attention self_attn;
        Norm ln2;
        Attention cross_attn;
        Norm ln3;
        Linear ff1, ff2;
    };

    ModelConfig cfg;
    std::vector<Conv> stem;
    std::vector<EncLayer> encoder;
    Norm enc_final;
    std::vector<DecLayer> decoder;
    Norm dec_final;
    T embedding;  // [V x d_model]; the output projection is this, transposed

    // Constant (non-trained) positional tables.
    T enc_pos;  // [memory_tokens x d_model], 2D sinusoidal
    T dec_pos;  // [max_decode_len x d_model], 1D sinusoidal

    static constexpr S kLayerNormEps = static_cast<S>(1e-5);
    static constexpr S kMaskValue = static_cast<S>(-1e9);

    // --- construction -------------------------------------------------------

    static SpotterT create(const ModelConfig& cfg, uint64_t seed) {
        cfg.validate();
        SpotterT m;
        m.cfg = cfg;
        Rng rng(mix_seed(seed, 0x5eed));

        auto linear = [&](int in, int out) {
            Linear l;
            const double a = std::sqrt(6.0 / (in + out));
            l.w = T::zeros({in, out});
            for (auto& v : l.w.data()) v = static_cast<S>(rng.uniform(-a, a));
            l.w.set_requires_grad();
            l.b = T::zeros({out}).set_requires_grad();
            return l;
        };
        auto norm = [&](int n) {
            Norm nm;
            nm.gain = T::full({n}, S(1)).set_requires_grad();
            nm.bias = T::zeros({n}).set_requires_grad();
            return nm;
        };
        auto attention = [&](int d) {
            return Attention{linear(d, d), linear(d, d), linear(d, d), linear(d, d)};
        };

        int in_ch = 1;
        for (int ch : cfg.stem_channels) {
            Conv c;
            const double std_dev = std::sqrt(2.0 / (in_ch * 9));
            c.w = T::zeros({ch, in_ch, 3, 3});
            for (auto& v : c.w.data()) v = static_cast<S>(rng.normal() * std_dev);
            c.w.set_requires_grad();
            c.b = T::zeros({ch}).set_requires_grad();
            m.stem.push_back(std::move(c));
            in_ch = ch;
        }
        const int d = cfg.d_model;
        for (int i = 0; i < cfg.n_encoder_layers; ++i)
            m.encoder.push_back(EncLayer{norm(d), attention(d), norm(d), linear(d, cfg.ffn_dim),
                                         linear(cfg.ffn_dim, d)});
        m.enc_final = norm(d);
        for (int i = 0; i < cfg.n_decoder_layers; ++i)
            m.decoder.push_back(DecLayer{norm(d), attention(d), norm(d), attention(d), norm(d),
                                         linear(d, cfg.ffn_dim), linear(cfg.ffn_dim, d)});
        m.dec_final = norm(d);

        m.embedding = T::zeros({cfg.vocab_size, d});
        for (auto& v : m.embedding.data()) v = static_cast<S>(rng.normal() * 0.02);
        m.embedding.set_requires_grad();

        m.build_positional_tables();
        return m;
    }

    void build_positional_tables() {
        const int d = cfg.d_model;
        const int gh = cfg.grid_h(), gw = cfg.grid_w();
        std::vector<float> enc(static_cast<size_t>(gh) * gw * static_cast<size_t>(d));
        for (int y = 0; y < gh; ++y)
            for (int x = 0; x < gw; ++x) {
                std::vector<float> row(static_cast<size_t>(d), 0.f);
                detail::sincos_fill(row, 0, d / 2, static_cast<double>(x));
                detail::sincos_fill(row, static_cast<size_t>(d / 2), d - d / 2,
                                    static_cast<double>(y));
                std::copy(row.begin(), row.end(),
                          enc.begin() + (static_cast<size_t>(y) * gw + x) * static_cast<size_t>(d));
            }
        std::vector<S> enc_s(enc.begin(), enc.end());
        enc_pos = T::from({gh * gw, d}, std::move(enc_s));

        std::vector<float> dec(static_cast<size_t>(cfg.max_decode_len) * static_cast<size_t>(d));
        for (int p = 0; p < cfg.max_decode_len; ++p) {
            std::vector<float> row(static_cast<size_t>(d), 0.f);
            detail::sincos_fill(row, 0, d, static_cast<double>(p));
            std::copy(row.begin(), row.end(),
                      dec.begin() + static_cast<size_t>(p) * static_cast<size_t>(d));
        }
        std::vector<S> dec_s(dec.begin(), dec.end());
        dec_pos = T::from({cfg.max_decode_len, d}, std::move(dec_s));
    }

    // Fixed parameter enumeration order: stem, encoder, decoder, embedding.
    void visit_params(const std::function<void(const std::string&, T&)>& fn) {
        auto lin = [&](const std::string& p, Linear& l) {
            fn(p + ".w", l.w);
            fn(p + ".b", l.b);
        };
        auto nrm = [&](const std::string& p, Norm& n) {
            fn(p + ".gain", n.gain);
            fn(p + ".bias", n.bias);
        };
        auto attn = [&](const std::string& p, Attention& a) {
            lin(p + ".q", a.q);
            lin(p + ".k", a.k);
            lin(p + ".v", a.v);
            lin(p + ".o", a.o);
        };
        for (size_t i = 0; i < stem.size(); ++i) {
            fn("stem." + std::to_string(i) + ".w", stem[i].w);
            fn("stem." + std::to_string(i) + ".b", stem[i].b);
        }
        for (size_t i = 0; i < encoder.size(); ++i) {
            const std::string p = "enc." + std::to_string(i);
            nrm(p + ".ln1", encoder[i].ln1);
            attn(p + ".attn", encoder[i].attn);
            nrm(p + ".ln2", encoder[i].ln2);
            lin(p + ".ff1", encoder[i].ff1);
            lin(p + ".ff2", encoder[i].ff2);
        }
        nrm("enc.final", enc_final);
        for (size_t i = 0; i < decoder.size(); ++i) {
            const std::string p = "dec." + std::to_string(i);
            nrm(p + ".ln1", decoder[i].ln1);
            attn(p + ".self", decoder[i].self_attn);
            nrm(p + ".ln2", decoder[i].ln2);
            attn(p + ".cross", decoder[i].cross_attn);
            nrm(p + ".ln3", decoder[i].ln3);
            lin(p + ".ff1", decoder[i].ff1);
            lin(p + ".ff2", decoder[i].ff2);
        }
        nrm("dec.final", dec_final);
        fn("embedding", embedding);
    }

    std::vector<std::pair<std::string, T>> named_params() {
        std::vector<std::pair<std::string, T>> out;
        visit_params([&](const std::string& n, T& t) { out.emplace_back(n, t); });
        return out;
    }

    size_t param_count() {
        size_t n = 0;
        visit_params([&](const std::string&, T& t) { n += t.numel(); });
        return n;
    }

    // --- forward -------------------------------------------------------------

    T apply_linear(const Linear& l, const T& x) const { return ad::linear(x, l.w, l.b); }

    T apply_norm(const Norm& n, const T& x) const {
        return ad::layer_norm(x, n.gain, n.bias, kLayerNormEps);
    }

    T maybe_dropout(const T& x, Rng* rng) const {
        return rng ? ad::dropout(x, cfg.dropout, *rng) : x;
    }

    // Multi-head attention of x [L x D] over context [Tc x D]. The additive
    // mask, when present, is an [L x Tc] tensor of 0 / kMaskValue entries.
    T attention_block(const Attention& a, const T& x, const T& context, const T* mask) const {
        const int L = x.dim(0), Tc = context.dim(0);
        const int H = cfg.n_heads, dk = cfg.d_model / cfg.n_heads;
        const S inv_sqrt = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dk)));
        T q = ad::scale(apply_linear(a.q, x), inv_sqrt);
        T k = apply_linear(a.k, context);
        T v = apply_linear(a.v, context);
        q = ad::transpose(ad::reshape(q, {L, H, dk}), {1, 0, 2});    // [H x L x dk]
        k = ad::transpose(ad::reshape(k, {Tc, H, dk}), {1, 2, 0});   // [H x dk x Tc]
        v = ad::transpose(ad::reshape(v, {Tc, H, dk}), {1, 0, 2});   // [H x Tc x dk]
        T scores = ad::bmm(q, k);                                    // [H x L x Tc]
        if (mask) scores = ad::add(scores, *mask);
        T attn = ad::softmax(scores, 2);
        T ctx = ad::bmm(attn, v);                                    // [H x L x dk]
        ctx = ad::reshape(ad::transpose(ctx, {1, 0, 2}), {L, cfg.d_model});
        return apply_linear(a.o, ctx);
    }

    T ffn_block(const T& ff1_in, const Linear& ff1, const Linear& ff2) const {
        return apply_linear(ff2, ad::gelu(apply_linear(ff1, ff1_in)));
    }

    // image [1 x H x W], normalized to [0,1] -> memory [memory_tokens x d_model]
    T encode_image(const T& image, Rng* drop_rng = nullptr) const {
        if (image.rank() != 3 || image.dim(0) != 1 || image.dim(1) != cfg.image_h ||
            image.dim(2) != cfg.image_w)
            throw std::invalid_argument("encode_image: expected [1x" +
                                        std::to_string(cfg.image_h) + "x" +
                                        std::to_string(cfg.image_w) + "], got " +
                                        ad::shape_str(image.shape()));
        T x = image;
        for (const auto& c : stem) x = ad::relu(ad::conv2d(x, c.w, c.b, 2, 1));
        const int tkns = cfg.memory_tokens();
        x = ad::transpose(ad::reshape(x, {cfg.d_model, tkns}), {1, 0});  // [T x D]
        x = ad::add(x, enc_pos);
        x = maybe_dropout(x, drop_rng);
        for (const auto& layer : encoder) {
            T h = apply_norm(layer.ln1, x);
            x = ad::add(x, maybe_dropout(attention_block(layer.attn, h, h, nullptr), drop_rng));
            x = ad::add(x, maybe_dropout(ffn_block(apply_norm(layer.ln2, x), layer.ff1, layer.ff2),
                                         drop_rng));
        }
        return apply_norm(enc_final, x);
    }

    T causal_mask(int L) const {
        std::vector<S> m(static_cast<size_t>(L) * L, S(0));
        for (int i = 0; i < L; ++i)
            for (int j = i + 1; j < L; ++j) m[static_cast<size_t>(i) * L + j] = kMaskValue;
        return T::from({L, L}, std::move(m));
    }

    T decode_states(const T& memory, const std::vector<int>& input_tokens,
                    Rng* drop_rng = nullptr) const {
        const int L = static_cast<int>(input_tokens.size());
        if (L < 1 || L > cfg.max_decode_len)
            throw std::invalid_argument("decode: sequence length " + std::to_string(L) +
                                        " outside [1, " + std::to_string(cfg.max_decode_len) +
                                        "]");
        std::vector<int> positions(static_cast<size_t>(L));
        std::iota(positions.begin(), positions.end(), 0);
        // token embeddings ride at sqrt(d) scale so the additive positional
        // table does not drown the token identity early in training
        const S emb_scale = static_cast<S>(std::sqrt(static_cast<double>(cfg.d_model)));
        T x = ad::add(ad::scale(ad::embedding_lookup(embedding, input_tokens), emb_scale),
                      ad::embedding_lookup(dec_pos, positions));
        x = maybe_dropout(x, drop_rng);
        const T mask = causal_mask(L);
        for (const auto& layer : decoder) {
            T h = apply_norm(layer.ln1, x);
            x = ad::add(x, maybe_dropout(attention_block(layer.self_attn, h, h, &mask), drop_rng));
            x = ad::add(x, maybe_dropout(attention_block(layer.cross_attn,
                                                         apply_norm(layer.ln2, x), memory,
                                                         nullptr),
                                         drop_rng));
            x = ad::add(x, maybe_dropout(ffn_block(apply_norm(layer.ln3, x), layer.ff1, layer.ff2),
                                         drop_rng));
        }
        return apply_norm(dec_final, x);
    }

    T project_logits(const T& states) const {
        return ad::matmul(states, ad::transpose(embedding, {1, 0}));
    }

    // Teacher-forced forward; position i of the output conditions on input
    // tokens 0..i and the memory only.
    T forward_teacher_forced(const T& image, const std::vector<int>& input_tokens,
                             Rng* drop_rng = nullptr) const {
        const T memory = encode_image(image, drop_rng);
        return project_logits(decode_states(memory, input_tokens, drop_rng));
    }

    // --- incremental greedy decoding (no-grad path) ----------------------------
    //
    // Runs the decoder one token at a time over cached keys/values, keeping the
    // arithmetic per output element identical to the teacher-forced graph path,
    // so re-running the decoded sequence through forward_teacher_forced yields
    // the same argmax at every position.

    codec::TokenSequence greedy_decode(const T& image, int max_len = 0) const {
        if (max_len <= 0 || max_len > cfg.max_decode_len) max_len = cfg.max_decode_len;
        const T memory = encode_image(image, nullptr);
        const int D = cfg.d_model, H = cfg.n_heads, dk = D / H, V = cfg.vocab_size;
        const int Tm = memory.dim(0);
        const S inv_sqrt = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dk)));
        const int n_layers = static_cast<int>(decoder.size());

        // Per-layer cross-attention keys/values from the memory, computed once.
        std::vector<std::vector<S>> cross_k(static_cast<size_t>(n_layers)),
            cross_v(static_cast<size_t>(n_layers));
        for (int l = 0; l < n_layers; ++l) {
            cross_k[static_cast<size_t>(l)] =
                raw_linear(memory.data().data(), Tm, decoder[static_cast<size_t>(l)].cross_attn.k);
            cross_v[static_cast<size_t>(l)] =
                raw_linear(memory.data().data(), Tm, decoder[static_cast<size_t>(l)].cross_attn.v);
        }
        std::vector<std::vector<S>> self_k(static_cast<size_t>(n_layers)),
            self_v(static_cast<size_t>(n_layers));

        const S emb_scale = static_cast<S>(std::sqrt(static_cast<double>(cfg.d_model)));
        codec::TokenSequence seq;
        seq.ids.push_back(codec::Vocabulary::kSos);
        seq.likelihoods.push_back(1.f);
        std::vector<S> logits(static_cast<size_t>(V));
        std::vector<S> x(static_cast<size_t>(D)), h(static_cast<size_t>(D)),
            tmp(static_cast<size_t>(D));

        for (int t = 0; seq.ids.back() != codec::Vocabulary::kEos &&
                        static_cast<int>(seq.ids.size()) < max_len;
             ++t) {
            const int tok = seq.ids.back();
            // two separate passes mirror the graph ops (scale, then add), so
            // the rounding sequence matches the teacher-forced path exactly
            for (int i = 0; i < D; ++i)
                x[static_cast<size_t>(i)] =
                    embedding.data()[static_cast<size_t>(tok) * D + static_cast<size_t>(i)] *
                    emb_scale;
            for (int i = 0; i < D; ++i)
                x[static_cast<size_t>(i)] +=
                    dec_pos.data()[static_cast<size_t>(t) * D + static_cast<size_t>(i)];

            for (int l = 0; l < n_layers; ++l) {
                const auto& layer = decoder[static_cast<size_t>(l)];
                auto& sk = self_k[static_cast<size_t>(l)];
                auto& sv = self_v[static_cast<size_t>(l)];

                raw_norm(layer.ln1, x, h);
                std::vector<S> q = raw_linear(h.data(), 1, layer.self_attn.q);
                for (auto& qv : q) qv *= inv_sqrt;
                std::vector<S> kn = raw_linear(h.data(), 1, layer.self_attn.k);
                std::vector<S> vn = raw_linear(h.data(), 1, layer.self_attn.v);
                sk.insert(sk.end(), kn.begin(), kn.end());
                sv.insert(sv.end(), vn.begin(), vn.end());
                raw_attend(q, sk, sv, t + 1, H, dk, tmp);
                std::vector<S> attn_out = raw_linear(tmp.data(), 1, layer.self_attn.o);
                for (int i = 0; i < D; ++i) x[static_cast<size_t>(i)] += attn_out[static_cast<size_t>(i)];

                raw_norm(layer.ln2, x, h);
                q = raw_linear(h.data(), 1, layer.cross_attn.q);
                for (auto& qv : q) qv *= inv_sqrt;
                raw_attend(q, cross_k[static_cast<size_t>(l)], cross_v[static_cast<size_t>(l)],
                           Tm, H, dk, tmp);
                attn_out = raw_linear(tmp.data(), 1, layer.cross_attn.o);
                for (int i = 0; i < D; ++i) x[static_cast<size_t>(i)] += attn_out[static_cast<size_t>(i)];

                raw_norm(layer.ln3, x, h);
                std::vector<S> f = raw_linear(h.data(), 1, layer.ff1);
                for (auto& fv : f) fv = kernels::gelu_scalar(fv);
                std::vector<S> f2 = raw_linear(f.data(), 1, layer.ff2);
                for (int i = 0; i < D; ++i) x[static_cast<size_t>(i)] += f2[static_cast<size_t>(i)];
            }
            raw_norm(dec_final, x, h);
            kernels::matmul_nt(h.data(), embedding.data().data(), logits.data(), 1, D, V);
            kernels::softmax_row(logits.data(), V);
            int arg = 0;
            for (int j = 1; j < V; ++j)
                if (logits[static_cast<size_t>(j)] > logits[static_cast<size_t>(arg)]) arg = j;
            seq.ids.push_back(arg);
            seq.likelihoods.push_back(static_cast<float>(logits[static_cast<size_t>(arg)]));
        }
        return seq;
    }

private:
    // n rows of width l.w.dim(0) through a Linear, bias added per row.
    std::vector<S> raw_linear(const S* x, int n, const Linear& l) const {
        const int in = l.w.dim(0), out = l.w.dim(1);
        std::vector<S> y(static_cast<size_t>(n) * static_cast<size_t>(out));
        kernels::matmul(x, l.w.data().data(), y.data(), n, in, out);
        for (int r = 0; r < n; ++r)
            for (int j = 0; j < out; ++j)
                y[static_cast<size_t>(r) * out + static_cast<size_t>(j)] +=
                    l.b.data()[static_cast<size_t>(j)];
        return y;
    }

    void raw_norm(const Norm& n, const std::vector<S>& x, std::vector<S>& out) const {
        kernels::layer_norm_row(x.data(), n.gain.data().data(), n.bias.data().data(),
                                kLayerNormEps, out.data(), static_cast<int>(x.size()));
    }

    // Single-query multi-head attention over a cache of `len` rows. Head
    // slices are packed into contiguous buffers so the arithmetic runs through
    // kernels::matmul exactly like the graph path (bit-identical results).
    void raw_attend(const std::vector<S>& q, const std::vector<S>& cache_k,
                    const std::vector<S>& cache_v, int len, int H, int dk,
                    std::vector<S>& out) const {
        const int D = H * dk;
        std::vector<S> scores(static_cast<size_t>(len));
        std::vector<S> kt(static_cast<size_t>(dk) * len);   // [dk x len]
        std::vector<S> vh(static_cast<size_t>(len) * dk);   // [len x dk]
        for (int hh = 0; hh < H; ++hh) {
            const size_t off = static_cast<size_t>(hh) * static_cast<size_t>(dk);
            for (int j = 0; j < len; ++j) {
                const S* krow = cache_k.data() + static_cast<size_t>(j) * D + off;
                const S* vrow = cache_v.data() + static_cast<size_t>(j) * D + off;
                for (int i = 0; i < dk; ++i) {
                    kt[static_cast<size_t>(i) * len + j] = krow[i];
                    vh[static_cast<size_t>(j) * dk + i] = vrow[i];
                }
            }
            kernels::matmul(q.data() + off, kt.data(), scores.data(), 1, dk, len);
            kernels::softmax_row(scores.data(), len);
            kernels::matmul(scores.data(), vh.data(), out.data() + off, 1, len, dk);
        }
    }
};

using Spotter = SpotterT<float>;

// data::Image (row-major floats in [0,1]) -> [1 x H x W] tensor.
template <class S>
ad::TensorT<S> image_tensor(const std::vector<float>& pix, int h, int w) {
    std::vector<S> v(pix.begin(), pix.end());
    return ad::TensorT<S>::from({1, h, w}, std::move(v));
}

}  // namespace spts::model
