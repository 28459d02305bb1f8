// spts: synthetic scene generation, training, inference and evaluation for
// the single-point text spotter.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "spts/data.hpp"
#include "spts/eval.hpp"
#include "spts/model.hpp"
#include "spts/threadpool.hpp"
#include "spts/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::vector<std::string> split_alphabet(const std::string& s) {
    return spts::codec::utf8_split(s);
}

void echo_config(const std::string& dir, const std::string& name, const std::string& text) {
    fs::create_directories(dir);
    std::ofstream f((fs::path(dir) / name).string(), std::ios::binary);
    f << text;
}

int cmd_gen_data(const std::string& out, int count, uint64_t seed, int width, int height,
                 const std::string& alphabet, int min_inst, int max_inst, int min_len,
                 int max_len, double curved_frac, double max_rotation, double min_scale,
                 double max_scale, int max_distractors, int threads) {
    spts::data::GenConfig cfg;
    cfg.width = width;
    cfg.height = height;
    if (!alphabet.empty()) cfg.alphabet = split_alphabet(alphabet);
    cfg.min_instances = min_inst;
    cfg.max_instances = max_inst;
    cfg.min_text_len = min_len;
    cfg.max_text_len = max_len;
    cfg.curved_frac = curved_frac;
    cfg.max_rotation_deg = max_rotation;
    cfg.min_scale = min_scale;
    cfg.max_scale = max_scale;
    cfg.max_distractors = max_distractors;
    if (threads <= 0) threads = spts::worker_count();

    fs::create_directories(out);
    json echo{{"command", "gen-data"}, {"count", count},   {"seed", seed},
              {"width", width},        {"height", height}, {"alphabet", cfg.alphabet},
              {"min_instances", min_inst}, {"max_instances", max_inst},
              {"min_text_len", min_len},   {"max_text_len", max_len},
              {"curved_frac", curved_frac}, {"max_rotation_deg", max_rotation},
              {"min_scale", min_scale},      {"max_scale", max_scale},
              {"max_distractors", max_distractors}};
    echo_config(out, "gen_config.json", echo.dump(2) + "\n");

    spts::data::generate_dataset(cfg, count, seed, out, threads);
    std::cout << "wrote " << count << " scenes under " << out << "\n";
    return 0;
}

struct TrainCli {
    std::string data, out, config_path, resume;
    std::optional<std::string> variant, ordering, point_mode, alphabet;
    std::optional<int> epochs, finetune_epochs, batch, n_bins, l_tr, n_ti_max, ckpt_every,
        threads;
    std::optional<long> stop_after;
    std::optional<double> lr0, lr1, dropout, weight_decay;
    std::optional<double> aug_rot, aug_short_min, aug_short_max, aug_shift;
    std::optional<uint64_t> seed;
    bool no_aug = false;
    bool quiet = false;
    std::optional<int> d_model, heads, enc_layers, dec_layers, ffn, image_size;
};

int cmd_train(const TrainCli& a) {
    spts::model::ModelConfig mc;
    spts::train::TrainConfig tc;
    if (!a.config_path.empty()) {
        std::ifstream f(a.config_path);
        if (!f) {
            std::cerr << "config not found: " << a.config_path << "\n";
            return 2;
        }
        std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        long ignored = 0;
        try {
            json j = json::parse(text);
            if (!j.contains("step")) j["step"] = 0;
            spts::train::parse_run_config(j.dump(), &mc, &tc, &ignored);
        } catch (const std::exception& e) {
            std::cerr << "bad config file: " << e.what() << "\n";
            return 2;
        }
    }
    if (a.variant) {
        auto k = spts::codec::parse_location_kind(*a.variant);
        if (!k) {
            std::cerr << "unknown variant '" << *a.variant << "'\n";
            return 2;
        }
        tc.variant.kind = *k;
    }
    if (a.ordering) {
        auto o = spts::codec::parse_ordering(*a.ordering);
        if (!o) {
            std::cerr << "unknown ordering '" << *a.ordering << "'\n";
            return 2;
        }
        tc.variant.ordering = *o;
    }
    if (a.point_mode) {
        auto m = spts::codec::parse_point_mode(*a.point_mode);
        if (!m) {
            std::cerr << "unknown point mode '" << *a.point_mode << "'\n";
            return 2;
        }
        tc.point_mode = *m;
    }
    if (a.alphabet) tc.alphabet = split_alphabet(*a.alphabet);
    if (a.epochs) tc.epochs = *a.epochs;
    if (a.finetune_epochs) tc.finetune_epochs = *a.finetune_epochs;
    if (a.batch) tc.batch_size = *a.batch;
    if (a.n_bins) tc.n_bins = *a.n_bins;
    if (a.l_tr) tc.variant.l_tr = *a.l_tr;
    if (a.n_ti_max) tc.variant.n_ti_max = *a.n_ti_max;
    if (a.ckpt_every) tc.checkpoint_every = *a.ckpt_every;
    if (a.stop_after) tc.stop_after_steps = *a.stop_after;
    if (a.threads) tc.threads = *a.threads;
    if (a.lr0) tc.lr0 = *a.lr0;
    if (a.lr1) tc.lr1 = *a.lr1;
    if (a.weight_decay) tc.weight_decay = *a.weight_decay;
    if (a.seed) tc.seed = *a.seed;
    if (a.no_aug) tc.augment_enabled = false;
    if (a.aug_rot) {
        tc.aug.rot_min_deg = -*a.aug_rot;
        tc.aug.rot_max_deg = *a.aug_rot;
    }
    if (a.aug_short_min) tc.aug.short_side_min = *a.aug_short_min;
    if (a.aug_short_max) tc.aug.short_side_max = *a.aug_short_max;
    if (a.aug_shift) tc.aug.max_shift = *a.aug_shift;
    tc.verbose = !a.quiet;

    if (a.d_model) mc.d_model = *a.d_model;
    if (mc.stem_channels.empty() || mc.stem_channels.back() != mc.d_model)
        mc.stem_channels = {std::max(4, mc.d_model / 4), std::max(8, mc.d_model / 2),
                            mc.d_model};
    if (a.heads) mc.n_heads = *a.heads;
    if (a.enc_layers) mc.n_encoder_layers = *a.enc_layers;
    if (a.dec_layers) mc.n_decoder_layers = *a.dec_layers;
    if (a.ffn) mc.ffn_dim = *a.ffn;
    if (a.image_size) {
        mc.image_h = mc.image_w = *a.image_size;
    }
    if (a.dropout) mc.dropout = *a.dropout;

    spts::model::Spotter model;
    spts::train::AdamState opt;
    long start_step = 0;
    if (!a.resume.empty()) {
        // resumed runs continue under the checkpoint's own configuration
        const auto ckpt = spts::train::load_checkpoint(a.resume);
        const bool verbose = tc.verbose;
        const int threads = tc.threads;
        spts::train::parse_run_config(ckpt.config_json, &mc, &tc, &start_step);
        tc.verbose = verbose;
        tc.threads = threads;
        tc.stop_after_steps = a.stop_after ? *a.stop_after : 0;
        model = spts::model::Spotter::create(mc, tc.seed);
        spts::train::restore_from_checkpoint(ckpt, model, &opt);
        std::cerr << "resuming from step " << start_step << "\n";
    } else {
        const spts::codec::Vocabulary vocab = tc.make_vocab();
        mc.vocab_size = vocab.size();
        mc.max_decode_len = tc.variant.segment_len() * tc.variant.n_ti_max + 2;
        tc.aug.out_width = mc.image_w;
        tc.aug.out_height = mc.image_h;
        try {
            mc.validate();
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 2;
        }
        model = spts::model::Spotter::create(mc, tc.seed);
    }

    auto samples = spts::data::load_samples((fs::path(a.data) / "manifest.jsonl").string());
    if (samples.empty()) {
        std::cerr << "dataset is empty: " << a.data << "\n";
        return 2;
    }
    if (samples[0].image.width != mc.image_w || samples[0].image.height != mc.image_h) {
        std::cerr << "dataset image size " << samples[0].image.width << "x"
                  << samples[0].image.height << " does not match model input " << mc.image_w
                  << "x" << mc.image_h << "\n";
        return 2;
    }

    fs::create_directories(a.out);
    echo_config(a.out, "config.json", spts::train::run_config_json(mc, tc, start_step) + "\n");

    const auto res = spts::train::train(model, opt, start_step, samples, tc, a.out);
    if (res.diverged) {
        std::cerr << "training diverged at step " << res.final_step << "\n";
        return 1;
    }
    const double acc = spts::train::teacher_forced_accuracy(model, samples, tc,
                                                            std::min<int>(64, (int)samples.size()));
    std::ofstream metrics((fs::path(a.out) / "metrics.json").string());
    metrics << json{{"final_step", res.final_step},
                    {"final_loss", res.final_loss},
                    {"token_accuracy", acc}}
                   .dump(2)
            << "\n";
    std::cout << "checkpoint: " << res.checkpoint_path << " (loss " << res.final_loss
              << ", token accuracy " << acc << ")\n";
    return 0;
}

int cmd_infer(const std::string& ckpt_path, const std::string& images, const std::string& out,
              int max_len, double min_conf, int threads) {
    const auto ckpt = spts::train::load_checkpoint(ckpt_path);
    spts::model::ModelConfig mc;
    spts::train::TrainConfig tc;
    long step = 0;
    spts::train::parse_run_config(ckpt.config_json, &mc, &tc, &step);
    auto model = spts::model::Spotter::create(mc, tc.seed);
    spts::train::restore_from_checkpoint(ckpt, model, nullptr);
    const spts::codec::Vocabulary vocab = tc.make_vocab();

    const auto manifest = spts::data::read_manifest(images);
    std::vector<spts::eval::PredRecord> records(manifest.size());
    if (threads <= 0) threads = spts::worker_count();
    spts::parallel_for(static_cast<int>(manifest.size()), threads, [&](int i) {
        const auto& rec = manifest[static_cast<size_t>(i)];
        const auto img = spts::data::load_record_image(images, rec);
        auto tensor = spts::model::image_tensor<float>(img.pix, img.height, img.width);
        const auto seq = model.greedy_decode(tensor, max_len);
        const auto dec = spts::codec::decode_sequence(seq, tc.variant, vocab, img.width,
                                                      img.height);
        spts::eval::PredRecord pr;
        pr.image_path = rec.image_path;
        for (const auto& d : dec.instances)
            if (d.confidence >= min_conf) pr.preds.push_back(d);
        records[static_cast<size_t>(i)] = std::move(pr);
    });
    spts::eval::write_predictions(records, out);
    echo_config(fs::path(out).parent_path().string(), fs::path(out).filename().string() +
                                                          ".config.json",
                json{{"command", "infer"},
                     {"ckpt", ckpt_path},
                     {"images", images},
                     {"max_len", max_len},
                     {"min_conf", min_conf}}
                        .dump(2) +
                    "\n");
    std::cout << "wrote predictions for " << records.size() << " images to " << out << "\n";
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& protocol, const std::string& point_mode,
             const std::string& lexicon_mode, double min_area, double min_conf,
             double iou_thresh, bool strict_case, const std::string& out) {
    const auto preds = spts::eval::read_predictions(pred_path);
    const auto gts = spts::data::read_manifest(gt_path);
    std::map<std::string, const spts::data::ManifestRecord*> gt_by_image;
    for (const auto& r : gts) gt_by_image[r.image_path] = &r;

    spts::eval::Lexicon lexicon;
    if (lexicon_mode == "full") {
        lexicon.mode = spts::eval::Lexicon::Mode::full;
        for (const auto& r : gts)
            for (const auto& inst : r.instances) lexicon.words.push_back(inst.transcription);
        std::sort(lexicon.words.begin(), lexicon.words.end());
        lexicon.words.erase(std::unique(lexicon.words.begin(), lexicon.words.end()),
                            lexicon.words.end());
    } else if (lexicon_mode != "none") {
        std::cerr << "unknown lexicon mode '" << lexicon_mode << "'\n";
        return 2;
    }

    spts::eval::MatchOptions opt;
    opt.case_insensitive = !strict_case;
    opt.min_area = min_area;
    if (lexicon.mode == spts::eval::Lexicon::Mode::full) opt.lexicon = &lexicon;

    const auto mode = spts::eval::parse_reference_mode(point_mode);
    if (!mode && protocol == "point") {
        std::cerr << "unknown point mode '" << point_mode << "'\n";
        return 2;
    }

    spts::eval::EvalReport total;
    json per_image = json::array();
    for (const auto& pr : preds) {
        auto it = gt_by_image.find(pr.image_path);
        if (it == gt_by_image.end()) {
            std::cerr << "no ground truth for image " << pr.image_path << "\n";
            return 1;
        }
        std::vector<spts::eval::Prediction> kept;
        for (const auto& p : pr.preds)
            if (p.confidence >= min_conf) kept.push_back(p);
        spts::eval::EvalReport rep;
        if (protocol == "point")
            rep = spts::eval::match_point_protocol(kept, it->second->instances, *mode, opt);
        else if (protocol == "iou")
            rep = spts::eval::match_iou_protocol(kept, it->second->instances, iou_thresh, opt);
        else if (protocol == "npts")
            rep = spts::eval::npts_match(kept, it->second->instances, opt);
        else {
            std::cerr << "unknown protocol '" << protocol << "'\n";
            return 2;
        }
        json matches = json::array();
        for (const auto& m : rep.matches)
            matches.push_back(json{{"gt", m.gt_index},
                                   {"pred", m.pred_index},
                                   {"score", m.score},
                                   {"correct", m.correct}});
        per_image.push_back(json{{"image", pr.image_path},
                                 {"tp", rep.tp},
                                 {"fp", rep.fp},
                                 {"fn", rep.fn},
                                 {"matches", std::move(matches)}});
        spts::eval::accumulate(total, rep);
    }
    total.finalize();
    json report{{"protocol", protocol},      {"lexicon", lexicon_mode},
                {"tp", total.tp},            {"fp", total.fp},
                {"fn", total.fn},            {"precision", total.precision},
                {"recall", total.recall},    {"f1", total.f1},
                {"images", std::move(per_image)}};
    const std::string text = report.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out, std::ios::binary);
        f << text;
        std::cout << "precision " << total.precision << " recall " << total.recall << " f1 "
                  << total.f1 << " -> " << out << "\n";
    }
    return 0;
}

int cmd_convert(const std::string& in, const std::string& to, const std::string& point_mode,
                uint64_t seed, const std::string& out) {
    const auto kind = spts::codec::parse_location_kind(to);
    if (!kind || *kind == spts::codec::LocationKind::nopoint) {
        std::cerr << "convert target must be point, rect or bezier\n";
        return 2;
    }
    const auto mode = spts::codec::parse_point_mode(point_mode);
    if (!mode) {
        std::cerr << "unknown point mode '" << point_mode << "'\n";
        return 2;
    }
    const auto manifest = spts::data::read_manifest(in);
    std::vector<spts::eval::PredRecord> out_records;
    spts::Rng rng(seed);
    for (const auto& rec : manifest) {
        spts::eval::PredRecord pr;
        pr.image_path = rec.image_path;
        for (const auto& inst : rec.instances) {
            spts::eval::Prediction p;
            p.text = inst.transcription;
            p.location.kind = *kind;
            switch (*kind) {
                case spts::codec::LocationKind::point:
                    p.location.pts.push_back(spts::codec::pick_reference(inst, *mode, rng));
                    break;
                case spts::codec::LocationKind::rect: {
                    const auto bb = spts::geom::bounding_box(inst.polygon);
                    p.location.pts.push_back({bb.x0, bb.y0});
                    p.location.pts.push_back({bb.x1, bb.y1});
                    break;
                }
                case spts::codec::LocationKind::bezier: {
                    const auto cp = spts::codec::polygon_to_bezier(inst);
                    p.location.pts.assign(cp.begin(), cp.end());
                    break;
                }
                default:
                    break;
            }
            pr.preds.push_back(std::move(p));
        }
        out_records.push_back(std::move(pr));
    }
    spts::eval::write_predictions(out_records, out);
    std::cout << "converted " << manifest.size() << " records to " << to << " -> " << out
              << "\n";
    return 0;
}

int cmd_render(const std::string& images, const std::string& pred_path, const std::string& out) {
    const auto manifest = spts::data::read_manifest(images);
    std::map<std::string, const spts::data::ManifestRecord*> by_image;
    for (const auto& r : manifest) by_image[r.image_path] = &r;
    const auto preds = spts::eval::read_predictions(pred_path);
    fs::create_directories(out);
    const auto& font = spts::data::GlyphFont::builtin();
    int written = 0;
    for (const auto& pr : preds) {
        auto it = by_image.find(pr.image_path);
        if (it == by_image.end()) continue;
        spts::data::Image img = spts::data::load_record_image(images, *it->second);
        for (const auto& p : pr.preds) {
            if (p.location.kind == spts::codec::LocationKind::nopoint ||
                p.location.pts.empty()) {
                spts::data::draw_glyph_text(img, p.text, {2, 2 + 9.0 * written}, 1, 1.0f, font);
                continue;
            }
            const auto q = spts::codec::location_point(p.location);
            spts::data::draw_cross(img, q, 3, 1.0f);
            if (p.location.kind == spts::codec::LocationKind::rect &&
                p.location.pts.size() == 2) {
                const auto a = p.location.pts[0], b = p.location.pts[1];
                spts::data::draw_line(img, {a.x, a.y}, {b.x, a.y}, 1.0f);
                spts::data::draw_line(img, {b.x, a.y}, {b.x, b.y}, 1.0f);
                spts::data::draw_line(img, {b.x, b.y}, {a.x, b.y}, 1.0f);
                spts::data::draw_line(img, {a.x, b.y}, {a.x, a.y}, 1.0f);
            }
            if (p.location.kind == spts::codec::LocationKind::bezier &&
                p.location.pts.size() == 8) {
                for (int half = 0; half < 2; ++half) {
                    std::array<spts::geom::Point, 4> c{
                        p.location.pts[static_cast<size_t>(half * 4 + 0)],
                        p.location.pts[static_cast<size_t>(half * 4 + 1)],
                        p.location.pts[static_cast<size_t>(half * 4 + 2)],
                        p.location.pts[static_cast<size_t>(half * 4 + 3)]};
                    spts::geom::Point prev = c[0];
                    for (int i = 1; i <= 12; ++i) {
                        const auto cur = spts::geom::bezier_eval(c, i / 12.0);
                        spts::data::draw_line(img, prev, cur, 1.0f);
                        prev = cur;
                    }
                }
            }
            spts::data::draw_glyph_text(img, p.text, {q.x + 4, q.y - 10}, 1, 1.0f, font);
        }
        spts::data::write_pgm(img, (fs::path(out) / fs::path(pr.image_path).filename()).string());
        ++written;
    }
    std::cout << "rendered " << written << " overlays to " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-point text spotting toolkit"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic glyph-scene dataset");
    std::string gen_out;
    int gen_count = 100, gen_w = 128, gen_h = 128;
    uint64_t gen_seed = 1;
    std::string gen_alphabet;
    int gen_min_inst = 1, gen_max_inst = 3, gen_min_len = 1, gen_max_len = 5;
    double gen_curved = 1.0 / 3.0, gen_rot = 15.0;
    double gen_min_scale = 1.6, gen_max_scale = 2.6;
    int gen_distractors = 4;
    int gen_threads = 0;
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--count", gen_count, "number of scenes");
    gen->add_option("--seed", gen_seed, "generation seed");
    gen->add_option("--width", gen_w, "canvas width");
    gen->add_option("--height", gen_h, "canvas height");
    gen->add_option("--alphabet", gen_alphabet, "characters to draw from");
    gen->add_option("--min-instances", gen_min_inst, "min text instances per scene");
    gen->add_option("--max-instances", gen_max_inst, "max text instances per scene");
    gen->add_option("--min-len", gen_min_len, "min transcription length");
    gen->add_option("--max-len", gen_max_len, "max transcription length");
    gen->add_option("--curved-frac", gen_curved, "fraction of curved baselines");
    gen->add_option("--max-rotation", gen_rot, "max baseline rotation (degrees)");
    gen->add_option("--min-scale", gen_min_scale, "min glyph scale");
    gen->add_option("--max-scale", gen_max_scale, "max glyph scale");
    gen->add_option("--max-distractors", gen_distractors, "max background strokes");
    gen->add_option("--threads", gen_threads, "worker threads (0 = auto)");

    // train
    auto* tr = app.add_subcommand("train", "train a spotter");
    TrainCli tcli;
    tr->add_option("--data", tcli.data, "dataset directory (with manifest.jsonl)")->required();
    tr->add_option("--out", tcli.out, "output directory")->required();
    tr->add_option("--config", tcli.config_path, "JSON config file");
    tr->add_option("--resume", tcli.resume, "checkpoint to resume from");
    tr->add_option("--variant", tcli.variant, "point|rect|bezier|nopoint");
    tr->add_option("--ordering", tcli.ordering, "random|area|topdown|dist2origin");
    tr->add_option("--point-mode", tcli.point_mode, "central|topleft|random");
    tr->add_option("--alphabet", tcli.alphabet, "alphabet characters");
    tr->add_option("--epochs", tcli.epochs, "linear-decay epochs");
    tr->add_option("--finetune-epochs", tcli.finetune_epochs, "constant-lr epochs");
    tr->add_option("--batch", tcli.batch, "batch size");
    tr->add_option("--lr0", tcli.lr0, "initial learning rate");
    tr->add_option("--lr1", tcli.lr1, "final learning rate");
    tr->add_option("--weight-decay", tcli.weight_decay, "AdamW weight decay");
    tr->add_option("--seed", tcli.seed, "training seed");
    tr->add_option("--n-bins", tcli.n_bins, "coordinate bins");
    tr->add_option("--l-tr", tcli.l_tr, "transcription slot length");
    tr->add_option("--n-ti-max", tcli.n_ti_max, "max instances per sequence");
    tr->add_option("--checkpoint-every", tcli.ckpt_every, "steps between checkpoints");
    tr->add_option("--stop-after-steps", tcli.stop_after, "halt after this absolute step");
    tr->add_option("--threads", tcli.threads, "worker threads (0 = auto)");
    tr->add_option("--d-model", tcli.d_model, "model width");
    tr->add_option("--heads", tcli.heads, "attention heads");
    tr->add_option("--enc-layers", tcli.enc_layers, "encoder layers");
    tr->add_option("--dec-layers", tcli.dec_layers, "decoder layers");
    tr->add_option("--ffn", tcli.ffn, "feed-forward width");
    tr->add_option("--image-size", tcli.image_size, "square model input size");
    tr->add_option("--dropout", tcli.dropout, "dropout rate");
    tr->add_flag("--no-aug", tcli.no_aug, "disable training augmentation");
    tr->add_option("--aug-rot", tcli.aug_rot, "augmentation rotation bound (degrees)");
    tr->add_option("--aug-short-min", tcli.aug_short_min, "resize short-side minimum");
    tr->add_option("--aug-short-max", tcli.aug_short_max, "resize short-side maximum");
    tr->add_option("--aug-shift", tcli.aug_shift, "crop jitter (pixels)");
    tr->add_flag("--quiet", tcli.quiet, "suppress progress output");

    // infer
    auto* inf = app.add_subcommand("infer", "run greedy decoding over a dataset");
    std::string inf_ckpt, inf_images, inf_out;
    int inf_max_len = 0, inf_threads = 0;
    double inf_min_conf = 0.0;
    inf->add_option("--ckpt", inf_ckpt, "checkpoint file")->required();
    inf->add_option("--images", inf_images, "manifest of images to decode")->required();
    inf->add_option("--out", inf_out, "predictions JSONL output")->required();
    inf->add_option("--max-len", inf_max_len, "decode length cap (0 = from config)");
    inf->add_option("--min-conf", inf_min_conf, "drop segments below this confidence");
    inf->add_option("--threads", inf_threads, "worker threads (0 = auto)");

    // eval
    auto* ev = app.add_subcommand("eval", "score predictions against ground truth");
    std::string ev_pred, ev_gt, ev_protocol = "point", ev_mode = "central",
                         ev_lexicon = "none", ev_out;
    double ev_min_area = 0.0, ev_min_conf = 0.0, ev_iou = 0.5;
    bool ev_strict = false;
    ev->add_option("--pred", ev_pred, "predictions JSONL")->required();
    ev->add_option("--gt", ev_gt, "ground-truth manifest JSONL")->required();
    ev->add_option("--protocol", ev_protocol, "point|iou|npts");
    ev->add_option("--point-mode", ev_mode, "central|topleft|random");
    ev->add_option("--lexicon", ev_lexicon, "none|full");
    ev->add_option("--min-area", ev_min_area, "ignore GTs below this polygon area");
    ev->add_option("--min-conf", ev_min_conf, "drop predictions below this confidence");
    ev->add_option("--iou-thresh", ev_iou, "IoU threshold");
    ev->add_flag("--strict-case", ev_strict, "case-sensitive transcription match");
    ev->add_option("--out", ev_out, "report JSON output (default: stdout)");

    // convert
    auto* cv = app.add_subcommand("convert", "convert polygon annotations between representations");
    std::string cv_in, cv_to, cv_mode = "central", cv_out;
    uint64_t cv_seed = 1;
    cv->add_option("--in", cv_in, "input manifest JSONL")->required();
    cv->add_option("--to", cv_to, "point|rect|bezier")->required();
    cv->add_option("--point-mode", cv_mode, "central|topleft|random");
    cv->add_option("--seed", cv_seed, "seed for random point mode");
    cv->add_option("--out", cv_out, "output JSONL")->required();

    // render
    auto* rd = app.add_subcommand("render", "draw predictions onto images");
    std::string rd_images, rd_pred, rd_out;
    rd->add_option("--images", rd_images, "manifest of source images")->required();
    rd->add_option("--pred", rd_pred, "predictions JSONL")->required();
    rd->add_option("--out", rd_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen_data(gen_out, gen_count, gen_seed, gen_w, gen_h, gen_alphabet,
                                gen_min_inst, gen_max_inst, gen_min_len, gen_max_len,
                                gen_curved, gen_rot, gen_min_scale, gen_max_scale,
                                gen_distractors, gen_threads);
        if (tr->parsed()) return cmd_train(tcli);
        if (inf->parsed())
            return cmd_infer(inf_ckpt, inf_images, inf_out, inf_max_len, inf_min_conf,
                             inf_threads);
        if (ev->parsed())
            return cmd_eval(ev_pred, ev_gt, ev_protocol, ev_mode, ev_lexicon, ev_min_area,
                            ev_min_conf, ev_iou, ev_strict, ev_out);
        if (cv->parsed()) return cmd_convert(cv_in, cv_to, cv_mode, cv_seed, cv_out);
        if (rd->parsed()) return cmd_render(rd_images, rd_pred, rd_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
