#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "spts/checkpoint.hpp"
#include "spts/codec.hpp"
#include "spts/data.hpp"
#include "spts/model.hpp"

namespace spts::train {

struct AdamWConfig {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
};

// Bias-corrected Adam update with decoupled weight decay (param -= lr*wd*param).
// t is the 1-based step count. Returns false (touching nothing) when any
// gradient entry is non-finite.
template <class S>
bool adamw_step(std::vector<S>& param, const std::vector<S>& grad, std::vector<S>& m,
                std::vector<S>& v, long t, const AdamWConfig& c) {
    if (param.size() != grad.size() || m.size() != param.size() || v.size() != param.size())
        throw std::invalid_argument("adamw_step: size mismatch");
    for (S g : grad)
        if (!std::isfinite(static_cast<double>(g))) return false;
    const S b1 = static_cast<S>(c.beta1), b2 = static_cast<S>(c.beta2);
    const S lr = static_cast<S>(c.lr), eps = static_cast<S>(c.eps);
    const S wd = static_cast<S>(c.weight_decay);
    const S bc1 = static_cast<S>(1.0 - std::pow(c.beta1, static_cast<double>(t)));
    const S bc2 = static_cast<S>(1.0 - std::pow(c.beta2, static_cast<double>(t)));
    for (size_t i = 0; i < param.size(); ++i) {
        m[i] = b1 * m[i] + (S(1) - b1) * grad[i];
        v[i] = b2 * v[i] + (S(1) - b2) * grad[i] * grad[i];
        const S mhat = m[i] / bc1;
        const S vhat = v[i] / bc2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + eps) + lr * wd * param[i];
    }
    return true;
}

// Linear decay from lr0 at step 0 to lr1 at total_steps.
inline double lr_schedule(long step, long total_steps, double lr0, double lr1) {
    if (total_steps <= 0) return lr1;
    return lr0 + (lr1 - lr0) * static_cast<double>(step) / static_cast<double>(total_steps);
}

struct TrainConfig {
    int batch_size = 8;
    int epochs = 30;          // linear-decay phase
    int finetune_epochs = 0;  // constant-lr1 phase
    double lr0 = 5e-4;
    double lr1 = 1e-5;
    double weight_decay = 1e-4;
    double grad_clip = 1.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    uint64_t seed = 1;
    codec::SequenceVariant variant;
    codec::PointMode point_mode = codec::PointMode::central;
    int n_bins = 1000;
    std::vector<std::string> alphabet = codec::Vocabulary::default_alphabet();
    bool augment_enabled = true;
    data::AugConfig aug;
    int checkpoint_every = 0;  // steps between periodic checkpoints; 0 = final only
    long stop_after_steps = 0;  // halt (with a checkpoint) at this absolute step; 0 = run out
    int threads = 0;            // 0 = PTS_THREADS / hardware
    bool verbose = false;

    codec::Vocabulary make_vocab() const { return codec::Vocabulary(n_bins, alphabet); }
};

struct AdamState {
    std::vector<std::vector<float>> m, v;
};

struct TrainResult {
    long final_step = 0;
    bool diverged = false;
    double final_loss = 0.0;
    std::string checkpoint_path;
};

// Reference points per the configured mode, then token framing: returns the
// decoder input (starts with SOS) and the shifted target (ends with EOS).
std::pair<std::vector<int>, std::vector<int>> make_training_pair(
    const data::SceneSample& sample, const TrainConfig& cfg, const codec::Vocabulary& vocab,
    Rng& rng);

// Teacher-forced argmax accuracy without augmentation or dropout.
double teacher_forced_accuracy(model::Spotter& model,
                               const std::vector<data::SceneSample>& samples,
                               const TrainConfig& cfg, int limit = -1);

// Config blob stored in checkpoints and echoed by the CLI.
std::string run_config_json(const model::ModelConfig& mc, const TrainConfig& tc, long step);
void parse_run_config(const std::string& json_text, model::ModelConfig* mc, TrainConfig* tc,
                      long* step);

Checkpoint make_checkpoint(model::Spotter& model, const AdamState& opt, const TrainConfig& tc,
                           long step);
// Restores weights (and optimizer moments when present). Shapes must match.
void restore_from_checkpoint(const Checkpoint& ckpt, model::Spotter& model, AdamState* opt);

// Optimizes the model in place from start_step to the configured step count.
// Writes checkpoint.bin (and train_log.jsonl) under out_dir. All per-step
// randomness is derived from (seed, step, slot), so resuming from a
// checkpoint reproduces the uninterrupted run bit for bit. eval_hook, when
// given, fires together with every periodic checkpoint.
using EvalHook = std::function<void(long step, model::Spotter& model)>;
TrainResult train(model::Spotter& model, AdamState& opt, long start_step,
                  const std::vector<data::SceneSample>& dataset, const TrainConfig& cfg,
                  const std::string& out_dir, const EvalHook& eval_hook = {});

}  // namespace spts::train
