#include "spts/train.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "spts/threadpool.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace spts::train {

std::pair<std::vector<int>, std::vector<int>> make_training_pair(
    const data::SceneSample& sample, const TrainConfig& cfg, const codec::Vocabulary& vocab,
    Rng& rng) {
    std::vector<codec::TextInstance> instances = sample.instances;
    for (auto& inst : instances) inst.reference_point = pick_reference(inst, cfg.point_mode, rng);
    codec::TokenSequence seq =
        codec::build_sequence(instances, cfg.variant, vocab, sample.image.width,
                              sample.image.height, rng);
    std::vector<int> input(seq.ids.begin(), seq.ids.end() - 1);
    std::vector<int> target(seq.ids.begin() + 1, seq.ids.end());
    return {std::move(input), std::move(target)};
}

double teacher_forced_accuracy(model::Spotter& model,
                               const std::vector<data::SceneSample>& samples,
                               const TrainConfig& cfg, int limit) {
    const codec::Vocabulary vocab = cfg.make_vocab();
    const int n = limit > 0 ? std::min<int>(limit, static_cast<int>(samples.size()))
                            : static_cast<int>(samples.size());
    std::vector<long> hits(static_cast<size_t>(n), 0), totals(static_cast<size_t>(n), 0);
    const int threads = cfg.threads > 0 ? cfg.threads : worker_count();
    parallel_for(n, threads, [&](int i) {
        Rng rng(mix_seed(cfg.seed, 0xACCu, static_cast<uint64_t>(i)));
        auto [input, target] = make_training_pair(samples[static_cast<size_t>(i)], cfg, vocab, rng);
        auto img = model::image_tensor<float>(samples[static_cast<size_t>(i)].image.pix,
                                              samples[static_cast<size_t>(i)].image.height,
                                              samples[static_cast<size_t>(i)].image.width);
        ad::Tensor logits = model.forward_teacher_forced(img, input, nullptr);
        const int L = logits.dim(0), V = logits.dim(1);
        for (int r = 0; r < L; ++r) {
            const float* row = logits.data().data() + static_cast<size_t>(r) * V;
            int arg = 0;
            for (int j = 1; j < V; ++j)
                if (row[j] > row[arg]) arg = j;
            if (arg == target[static_cast<size_t>(r)]) ++hits[static_cast<size_t>(i)];
            ++totals[static_cast<size_t>(i)];
        }
    });
    const long h = std::accumulate(hits.begin(), hits.end(), 0L);
    const long t = std::accumulate(totals.begin(), totals.end(), 0L);
    return t > 0 ? static_cast<double>(h) / static_cast<double>(t) : 0.0;
}

// --- config JSON -----------------------------------------------------------------

namespace {

json model_config_json(const model::ModelConfig& mc) {
    return json{{"image_h", mc.image_h},
                {"image_w", mc.image_w},
                {"stem_channels", mc.stem_channels},
                {"d_model", mc.d_model},
                {"n_heads", mc.n_heads},
                {"n_encoder_layers", mc.n_encoder_layers},
                {"n_decoder_layers", mc.n_decoder_layers},
                {"ffn_dim", mc.ffn_dim},
                {"dropout", mc.dropout},
                {"max_decode_len", mc.max_decode_len},
                {"vocab_size", mc.vocab_size}};
}

model::ModelConfig model_config_from_json(const json& j) {
    model::ModelConfig mc;
    mc.image_h = j.at("image_h").get<int>();
    mc.image_w = j.at("image_w").get<int>();
    mc.stem_channels = j.at("stem_channels").get<std::vector<int>>();
    mc.d_model = j.at("d_model").get<int>();
    mc.n_heads = j.at("n_heads").get<int>();
    mc.n_encoder_layers = j.at("n_encoder_layers").get<int>();
    mc.n_decoder_layers = j.at("n_decoder_layers").get<int>();
    mc.ffn_dim = j.at("ffn_dim").get<int>();
    mc.dropout = j.at("dropout").get<double>();
    mc.max_decode_len = j.at("max_decode_len").get<int>();
    mc.vocab_size = j.at("vocab_size").get<int>();
    return mc;
}

json train_config_json(const TrainConfig& tc) {
    return json{{"batch_size", tc.batch_size},
                {"epochs", tc.epochs},
                {"finetune_epochs", tc.finetune_epochs},
                {"lr0", tc.lr0},
                {"lr1", tc.lr1},
                {"weight_decay", tc.weight_decay},
                {"grad_clip", tc.grad_clip},
                {"beta1", tc.beta1},
                {"beta2", tc.beta2},
                {"adam_eps", tc.adam_eps},
                {"seed", tc.seed},
                {"variant", codec::location_kind_name(tc.variant.kind)},
                {"l_tr", tc.variant.l_tr},
                {"n_ti_max", tc.variant.n_ti_max},
                {"ordering", codec::ordering_name(tc.variant.ordering)},
                {"point_mode", codec::point_mode_name(tc.point_mode)},
                {"n_bins", tc.n_bins},
                {"alphabet", tc.alphabet},
                {"augment_enabled", tc.augment_enabled},
                {"aug_short_min", tc.aug.short_side_min},
                {"aug_short_max", tc.aug.short_side_max},
                {"aug_rot_min_deg", tc.aug.rot_min_deg},
                {"aug_rot_max_deg", tc.aug.rot_max_deg},
                {"aug_max_shift", tc.aug.max_shift},
                {"checkpoint_every", tc.checkpoint_every}};
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig tc;
    tc.batch_size = j.at("batch_size").get<int>();
    tc.epochs = j.at("epochs").get<int>();
    tc.finetune_epochs = j.at("finetune_epochs").get<int>();
    tc.lr0 = j.at("lr0").get<double>();
    tc.lr1 = j.at("lr1").get<double>();
    tc.weight_decay = j.at("weight_decay").get<double>();
    tc.grad_clip = j.at("grad_clip").get<double>();
    tc.beta1 = j.at("beta1").get<double>();
    tc.beta2 = j.at("beta2").get<double>();
    tc.adam_eps = j.at("adam_eps").get<double>();
    tc.seed = j.at("seed").get<uint64_t>();
    tc.variant.kind = codec::parse_location_kind(j.at("variant").get<std::string>()).value();
    tc.variant.l_tr = j.at("l_tr").get<int>();
    tc.variant.n_ti_max = j.at("n_ti_max").get<int>();
    tc.variant.ordering = codec::parse_ordering(j.at("ordering").get<std::string>()).value();
    tc.point_mode = codec::parse_point_mode(j.at("point_mode").get<std::string>()).value();
    tc.n_bins = j.at("n_bins").get<int>();
    tc.alphabet = j.at("alphabet").get<std::vector<std::string>>();
    tc.augment_enabled = j.at("augment_enabled").get<bool>();
    tc.aug.short_side_min = j.at("aug_short_min").get<double>();
    tc.aug.short_side_max = j.at("aug_short_max").get<double>();
    tc.aug.rot_min_deg = j.at("aug_rot_min_deg").get<double>();
    tc.aug.rot_max_deg = j.at("aug_rot_max_deg").get<double>();
    tc.aug.max_shift = j.at("aug_max_shift").get<double>();
    tc.checkpoint_every = j.at("checkpoint_every").get<int>();
    return tc;
}

}  // namespace

std::string run_config_json(const model::ModelConfig& mc, const TrainConfig& tc, long step) {
    json j;
    j["model"] = model_config_json(mc);
    j["train"] = train_config_json(tc);
    j["step"] = step;
    return j.dump();
}

void parse_run_config(const std::string& json_text, model::ModelConfig* mc, TrainConfig* tc,
                      long* step) {
    const json j = json::parse(json_text);
    if (mc) *mc = model_config_from_json(j.at("model"));
    if (tc) *tc = train_config_from_json(j.at("train"));
    if (step) *step = j.at("step").get<long>();
}

Checkpoint make_checkpoint(model::Spotter& model, const AdamState& opt, const TrainConfig& tc,
                           long step) {
    Checkpoint ckpt;
    ckpt.config_json = run_config_json(model.cfg, tc, step);
    size_t pi = 0;
    model.visit_params([&](const std::string& name, ad::Tensor& t) {
        ckpt.tensors.push_back({name, t.shape(), t.data()});
        ++pi;
    });
    if (!opt.m.empty()) {
        pi = 0;
        model.visit_params([&](const std::string& name, ad::Tensor& t) {
            ckpt.tensors.push_back({"opt.m." + name, t.shape(), opt.m[pi]});
            ckpt.tensors.push_back({"opt.v." + name, t.shape(), opt.v[pi]});
            ++pi;
        });
    }
    return ckpt;
}

void restore_from_checkpoint(const Checkpoint& ckpt, model::Spotter& model, AdamState* opt) {
    size_t count = 0;
    model.visit_params([&](const std::string&, ad::Tensor&) { ++count; });
    if (opt) {
        opt->m.assign(count, {});
        opt->v.assign(count, {});
    }
    size_t pi = 0;
    model.visit_params([&](const std::string& name, ad::Tensor& t) {
        const NamedTensor* nt = ckpt.find(name);
        if (!nt) throw std::runtime_error("checkpoint missing tensor '" + name + "'");
        if (nt->shape != t.shape())
            throw std::runtime_error("checkpoint tensor '" + name + "' has shape " +
                                     ad::shape_str(nt->shape) + ", expected " +
                                     ad::shape_str(t.shape()));
        t.data() = nt->data;
        if (opt) {
            const NamedTensor* m = ckpt.find("opt.m." + name);
            const NamedTensor* v = ckpt.find("opt.v." + name);
            opt->m[pi] = m ? m->data : std::vector<float>(t.numel(), 0.f);
            opt->v[pi] = v ? v->data : std::vector<float>(t.numel(), 0.f);
        }
        ++pi;
    });
}

// --- training loop ------------------------------------------------------------------

TrainResult train(model::Spotter& model, AdamState& opt, long start_step,
                  const std::vector<data::SceneSample>& dataset, const TrainConfig& cfg_in,
                  const std::string& out_dir, const EvalHook& eval_hook) {
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    if (!(cfg_in.lr0 >= cfg_in.lr1) || !(cfg_in.lr1 > 0))
        throw std::invalid_argument("train: learning rates must satisfy lr0 >= lr1 > 0");
    // Augmentation always targets the model's input size.
    TrainConfig cfg = cfg_in;
    cfg.aug.out_width = model.cfg.image_w;
    cfg.aug.out_height = model.cfg.image_h;
    const codec::Vocabulary vocab = cfg.make_vocab();
    if (vocab.size() != model.cfg.vocab_size)
        throw std::invalid_argument("train: vocabulary size " + std::to_string(vocab.size()) +
                                    " != model vocab_size " +
                                    std::to_string(model.cfg.vocab_size));
    fs::create_directories(out_dir);

    auto params = model.named_params();
    const size_t n_params = params.size();
    if (opt.m.size() != n_params) {
        opt.m.assign(n_params, {});
        opt.v.assign(n_params, {});
        for (size_t p = 0; p < n_params; ++p) {
            opt.m[p].assign(params[p].second.numel(), 0.f);
            opt.v[p].assign(params[p].second.numel(), 0.f);
        }
    }
    std::vector<ad::Tensor> leaves;
    for (auto& [name, t] : params) leaves.push_back(t);

    const int n = static_cast<int>(dataset.size());
    const long steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    const long pretrain_steps = steps_per_epoch * cfg.epochs;
    long total_steps = steps_per_epoch * (cfg.epochs + cfg.finetune_epochs);
    // The schedule always spans the full run; stop_after_steps only halts it.
    if (cfg.stop_after_steps > 0) total_steps = std::min(total_steps, cfg.stop_after_steps);
    const int n_copies = cfg.augment_enabled ? 2 : 1;
    const int threads = cfg.threads > 0 ? cfg.threads : worker_count();

    std::ofstream log((fs::path(out_dir) / "train_log.jsonl").string(), std::ios::app);
    const std::string ckpt_path = (fs::path(out_dir) / "checkpoint.bin").string();

    TrainResult res;
    long cached_epoch = -1;
    std::vector<int> perm(static_cast<size_t>(n));

    for (long step = start_step; step < total_steps; ++step) {
        const long epoch = step / steps_per_epoch;
        if (epoch != cached_epoch) {
            std::iota(perm.begin(), perm.end(), 0);
            Rng erng(mix_seed(cfg.seed, 0xE90Cu, static_cast<uint64_t>(epoch)));
            erng.shuffle(perm);
            cached_epoch = epoch;
        }
        const long in_epoch = step % steps_per_epoch;
        const int lo = static_cast<int>(in_epoch) * cfg.batch_size;
        const int hi = std::min(n, lo + cfg.batch_size);
        const int n_slots = (hi - lo) * n_copies;
        const double lr =
            epoch < cfg.epochs ? lr_schedule(step, pretrain_steps, cfg.lr0, cfg.lr1) : cfg.lr1;

        std::vector<double> losses(static_cast<size_t>(n_slots), 0.0);
        std::vector<std::vector<std::vector<float>>> slot_grads(static_cast<size_t>(n_slots));
        parallel_for(n_slots, threads, [&](int s) {
            const int bi = perm[static_cast<size_t>(lo + s / n_copies)];
            Rng rng(mix_seed(cfg.seed, 0xA06u, static_cast<uint64_t>(step),
                             static_cast<uint64_t>(s)));
            data::SceneSample sample = cfg.augment_enabled
                                           ? data::augment(dataset[static_cast<size_t>(bi)],
                                                           cfg.aug, rng)
                                           : dataset[static_cast<size_t>(bi)];
            auto [input, target] = make_training_pair(sample, cfg, vocab, rng);
            auto img = model::image_tensor<float>(sample.image.pix, sample.image.height,
                                                  sample.image.width);
            Rng drop_rng(mix_seed(cfg.seed, 0xD0Bu, static_cast<uint64_t>(step),
                                  static_cast<uint64_t>(s)));
            ad::Tensor logits = model.forward_teacher_forced(img, input, &drop_rng);
            ad::Tensor loss = ad::cross_entropy(logits, target);
            losses[static_cast<size_t>(s)] = static_cast<double>(loss.item());
            slot_grads[static_cast<size_t>(s)] = ad::backward_grads(loss, leaves);
        });

        double loss_mean = 0;
        for (double l : losses) loss_mean += l;
        loss_mean /= n_slots;
        if (!std::isfinite(loss_mean)) {
            std::cerr << "train: non-finite loss at step " << step
                      << "; aborting (last checkpoint retained)\n";
            res.diverged = true;
            res.final_step = step;
            res.final_loss = loss_mean;
            res.checkpoint_path = ckpt_path;
            return res;
        }

        // Fixed slot-order reduction keeps gradients bit-identical for any
        // worker count.
        const float inv_slots = 1.f / static_cast<float>(n_slots);
        std::vector<std::vector<float>> grads(n_params);
        for (size_t p = 0; p < n_params; ++p) {
            grads[p].assign(params[p].second.numel(), 0.f);
            for (int s = 0; s < n_slots; ++s) {
                const auto& g = slot_grads[static_cast<size_t>(s)][p];
                for (size_t i = 0; i < g.size(); ++i) grads[p][i] += g[i];
            }
            for (auto& g : grads[p]) g *= inv_slots;
        }
        slot_grads.clear();

        if (cfg.grad_clip > 0) {
            double norm2 = 0;
            for (const auto& g : grads)
                for (float x : g) norm2 += static_cast<double>(x) * x;
            const double norm = std::sqrt(norm2);
            if (norm > cfg.grad_clip) {
                const float scale = static_cast<float>(cfg.grad_clip / norm);
                for (auto& g : grads)
                    for (auto& x : g) x *= scale;
            }
        }

        AdamWConfig awc{lr, cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.weight_decay};
        bool ok = true;
        for (size_t p = 0; p < n_params && ok; ++p)
            ok = adamw_step(params[p].second.data(), grads[p], opt.m[p], opt.v[p], step + 1, awc);
        if (!ok) {
            std::cerr << "train: non-finite gradient at step " << step
                      << "; aborting (last checkpoint retained)\n";
            res.diverged = true;
            res.final_step = step;
            res.final_loss = loss_mean;
            res.checkpoint_path = ckpt_path;
            return res;
        }

        log << "{\"step\":" << step << ",\"lr\":" << lr << ",\"loss\":" << loss_mean << "}"
            << std::endl;
        if (cfg.verbose && (step % 50 == 0 || step + 1 == total_steps))
            std::cerr << "step " << step << "/" << total_steps << " lr " << lr << " loss "
                      << loss_mean << "\n";
        res.final_loss = loss_mean;

        if (cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0 &&
            step + 1 < total_steps) {
            save_checkpoint(make_checkpoint(model, opt, cfg, step + 1), ckpt_path);
            if (eval_hook) eval_hook(step + 1, model);
        }
    }
    res.final_step = total_steps;
    save_checkpoint(make_checkpoint(model, opt, cfg, total_steps), ckpt_path);
    res.checkpoint_path = ckpt_path;
    log.flush();
    return res;
}

}  // namespace spts::train
