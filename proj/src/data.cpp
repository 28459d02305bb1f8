#include "spts/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "spts/threadpool.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace spts::data {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Baseline path for one text instance in its local frame. u runs over
// [0, length]; the glyph boxes hang half above and half below the path.
struct Baseline {
    bool curved = false;
    double length = 0;
    double radius = 0;  // curved only
    double bend = 0;    // total subtended angle, signed

    geom::Point at(double u) const {
        if (!curved) return {u, 0};
        const double a0 = -bend / 2;
        const double a = a0 + bend * (u / length);
        // circle centre sits at (x=chord middle offset handled by caller)
        return {radius * (std::sin(a) - std::sin(a0)), -radius * (std::cos(a) - std::cos(a0))};
    }
    double tangent(double u) const {
        if (!curved) return 0;
        return -bend / 2 + bend * (u / length);
    }
};

struct CharPlacement {
    geom::Affine cell_to_image;  // glyph cell coords (0..5, 0..7) -> image
    geom::Affine image_to_cell;
    std::string symbol;
    geom::Rect bbox;  // of the char box in image coords
};

geom::Point cell_corner(const geom::Affine& a, double gx, double gy) {
    return a.apply({gx, gy});
}

}  // namespace

SceneSample generate_scene(const GenConfig& cfg, Rng& rng) {
    if (cfg.width <= 0 || cfg.height <= 0)
        throw std::invalid_argument("generate_scene: bad canvas size");
    SceneSample out;
    out.image = Image(cfg.width, cfg.height);

    // noise background
    const double base = rng.uniform(0.05, 0.22);
    for (auto& p : out.image.pix)
        p = static_cast<float>(std::clamp(base + rng.normal() * 0.025, 0.0, 0.4));

    // dim distractor strokes
    const int strokes = cfg.max_distractors > 0 ? rng.uniform_int(0, cfg.max_distractors) : 0;
    for (int i = 0; i < strokes; ++i) {
        const geom::Point a{rng.uniform(0, cfg.width - 1), rng.uniform(0, cfg.height - 1)};
        const double ang = rng.uniform(0, 2 * kPi);
        const double len = rng.uniform(6, 22);
        const geom::Point b{a.x + std::cos(ang) * len, a.y + std::sin(ang) * len};
        draw_line(out.image, a, b, static_cast<float>(rng.uniform(0.28, 0.45)));
    }

    const GlyphFont font(cfg.alphabet);
    const int want = rng.uniform_int(cfg.min_instances, cfg.max_instances);
    std::vector<geom::Rect> occupied;

    for (int inst_i = 0; inst_i < want; ++inst_i) {
        bool placed = false;
        for (int attempt = 0; attempt < cfg.place_attempts && !placed; ++attempt) {
            const int n = rng.uniform_int(cfg.min_text_len, cfg.max_text_len);
            std::string text;
            std::vector<std::string> syms;
            for (int i = 0; i < n; ++i) {
                const auto& s = cfg.alphabet[rng.uniform_index(cfg.alphabet.size())];
                text += s;
                syms.push_back(s);
            }
            const double s = rng.uniform(cfg.min_scale, cfg.max_scale);
            const double rot = rng.uniform(-cfg.max_rotation_deg, cfg.max_rotation_deg) * kPi / 180;
            const bool curved = rng.bernoulli(cfg.curved_frac);

            Baseline bl;
            bl.length = ((n - 1) * GlyphFont::kAdvance + GlyphFont::kWidth) * s;
            if (curved) {
                bl.curved = true;
                const double bend = rng.uniform(cfg.min_bend_deg, cfg.max_bend_deg) * kPi / 180;
                bl.bend = rng.bernoulli(0.5) ? bend : -bend;
                bl.radius = bl.length / std::abs(bl.bend) * (bl.bend > 0 ? 1.0 : -1.0);
            }

            // Per-char affines in the instance frame, then rotate the whole
            // instance and translate into the canvas.
            std::vector<CharPlacement> chars;
            geom::Polygon top, bottom;
            for (int i = 0; i < n; ++i) {
                const double u0 = i * GlyphFont::kAdvance * s;
                const double uc = u0 + GlyphFont::kWidth * s / 2;
                const geom::Point pos = bl.at(uc);
                const double ang = bl.tangent(uc);
                // glyph cell (gx in [0,5], gy in [0,7]) centered on the path
                geom::Affine cell =
                    geom::Affine{{s, 0, -GlyphFont::kWidth * s / 2, 0, s,
                                  -GlyphFont::kHeight * s / 2}}
                        .then(geom::Affine::rotation_scale_about({0, 0}, ang, 1.0))
                        .then(geom::Affine::translation(pos.x, pos.y))
                        .then(geom::Affine::rotation_scale_about({0, 0}, rot, 1.0));
                CharPlacement cp;
                cp.cell_to_image = cell;  // translation to anchor applied later
                cp.symbol = syms[static_cast<size_t>(i)];
                chars.push_back(cp);
            }
            for (const auto& cp : chars) {
                top.push_back(cell_corner(cp.cell_to_image, 0, 0));
                top.push_back(cell_corner(cp.cell_to_image, GlyphFont::kWidth, 0));
            }
            for (int i = n - 1; i >= 0; --i) {
                const auto& cp = chars[static_cast<size_t>(i)];
                bottom.push_back(
                    cell_corner(cp.cell_to_image, GlyphFont::kWidth, GlyphFont::kHeight));
                bottom.push_back(cell_corner(cp.cell_to_image, 0, GlyphFont::kHeight));
            }
            geom::Polygon poly = top;
            poly.insert(poly.end(), bottom.begin(), bottom.end());

            const geom::Rect bb = geom::bounding_box(poly);
            const double free_w = cfg.width - 2 * cfg.margin - bb.width();
            const double free_h = cfg.height - 2 * cfg.margin - bb.height();
            if (free_w <= 0 || free_h <= 0) continue;  // too large; try new params
            const geom::Point anchor{cfg.margin - bb.x0 + rng.uniform(0, free_w),
                                     cfg.margin - bb.y0 + rng.uniform(0, free_h)};
            geom::Rect placed_bb{bb.x0 + anchor.x, bb.y0 + anchor.y, bb.x1 + anchor.x,
                                 bb.y1 + anchor.y};
            bool overlaps = false;
            for (const auto& o : occupied) {
                if (geom::rect_iou(placed_bb, o) > cfg.max_overlap_iou &&
                    std::min(placed_bb.x1, o.x1) > std::max(placed_bb.x0, o.x0) &&
                    std::min(placed_bb.y1, o.y1) > std::max(placed_bb.y0, o.y0)) {
                    overlaps = true;
                    break;
                }
            }
            if (overlaps) continue;

            // Commit: shift everything by the anchor and rasterize.
            const geom::Affine shift = geom::Affine::translation(anchor.x, anchor.y);
            for (auto& p : poly) p = shift.apply(p);
            const double ink = rng.uniform(0.72, 0.95);
            for (auto& cp : chars) {
                cp.cell_to_image = cp.cell_to_image.then(shift);
                cp.image_to_cell = cp.cell_to_image.inverse();
                geom::Polygon box{cell_corner(cp.cell_to_image, 0, 0),
                                  cell_corner(cp.cell_to_image, GlyphFont::kWidth, 0),
                                  cell_corner(cp.cell_to_image, GlyphFont::kWidth,
                                              GlyphFont::kHeight),
                                  cell_corner(cp.cell_to_image, 0, GlyphFont::kHeight)};
                cp.bbox = geom::bounding_box(box);
                const Glyph& g = font.glyph(cp.symbol);
                const int x0 = std::max(0, static_cast<int>(std::floor(cp.bbox.x0)));
                const int x1 = std::min(cfg.width - 1, static_cast<int>(std::ceil(cp.bbox.x1)));
                const int y0 = std::max(0, static_cast<int>(std::floor(cp.bbox.y0)));
                const int y1 = std::min(cfg.height - 1, static_cast<int>(std::ceil(cp.bbox.y1)));
                for (int y = y0; y <= y1; ++y)
                    for (int x = x0; x <= x1; ++x) {
                        const geom::Point cellp = cp.image_to_cell.apply(
                            {static_cast<double>(x), static_cast<double>(y)});
                        const int cx = static_cast<int>(std::floor(cellp.x));
                        const int cy = static_cast<int>(std::floor(cellp.y));
                        if (cx < 0 || cx >= GlyphFont::kWidth || cy < 0 ||
                            cy >= GlyphFont::kHeight)
                            continue;
                        if (!g.set(cy, cx)) continue;
                        const double v = std::clamp(ink + rng.uniform(-0.04, 0.04), 0.0, 1.0);
                        out.image.at(x, y) = static_cast<float>(v);
                    }
            }

            codec::TextInstance inst;
            inst.polygon = std::move(poly);
            inst.transcription = text;
            inst.reference_point = codec::central_point(inst);
            out.instances.push_back(std::move(inst));
            occupied.push_back(placed_bb);
            if (curved) ++out.curved_count;
            placed = true;
        }
        if (!placed) ++out.dropped_placements;
    }
    return out;
}

AugConfig AugConfig::identity(int w, int h) {
    AugConfig c;
    c.short_side_min = c.short_side_max = static_cast<double>(std::min(w, h));
    c.rot_min_deg = c.rot_max_deg = 0;
    c.max_shift = 0;
    c.out_width = w;
    c.out_height = h;
    return c;
}

SceneSample augment(const SceneSample& sample, const AugConfig& cfg, Rng& rng) {
    if (!cfg.enabled) return sample;
    const int W = sample.image.width, H = sample.image.height;
    const double short_side = static_cast<double>(std::min(W, H));
    const double target = rng.uniform(cfg.short_side_min, cfg.short_side_max);
    const double s = target / short_side;
    const double rot = rng.uniform(cfg.rot_min_deg, cfg.rot_max_deg) * kPi / 180;

    const geom::Point center{W / 2.0, H / 2.0};
    const geom::Affine m0 = geom::Affine::rotation_scale_about(center, rot, s);

    // Crop window: centered by default, jittered within max_shift, clamped so
    // every reference point stays inside with a small border.
    const double bx = center.x - cfg.out_width / 2.0;
    const double by = center.y - cfg.out_height / 2.0;
    double lo_x = bx - cfg.max_shift, hi_x = bx + cfg.max_shift;
    double lo_y = by - cfg.max_shift, hi_y = by + cfg.max_shift;
    const double border = 2.0;
    if (!sample.instances.empty()) {
        double min_px = 1e30, max_px = -1e30, min_py = 1e30, max_py = -1e30;
        for (const auto& inst : sample.instances) {
            const geom::Point p = m0.apply(inst.reference_point);
            min_px = std::min(min_px, p.x);
            max_px = std::max(max_px, p.x);
            min_py = std::min(min_py, p.y);
            max_py = std::max(max_py, p.y);
        }
        lo_x = std::max(lo_x, max_px - (cfg.out_width - 1 - border));
        hi_x = std::min(hi_x, min_px - border);
        lo_y = std::max(lo_y, max_py - (cfg.out_height - 1 - border));
        hi_y = std::min(hi_y, min_py - border);
    }
    const double ox = lo_x <= hi_x ? rng.uniform(lo_x, hi_x) : (lo_x + hi_x) / 2;
    const double oy = lo_y <= hi_y ? rng.uniform(lo_y, hi_y) : (lo_y + hi_y) / 2;

    const geom::Affine m = m0.then(geom::Affine::translation(-ox, -oy));
    SceneSample out;
    out.image = warp_affine(sample.image, m.inverse(), cfg.out_width, cfg.out_height);
    out.curved_count = sample.curved_count;
    for (const auto& inst : sample.instances) {
        codec::TextInstance ti;
        ti.transcription = inst.transcription;
        ti.reference_point = m.apply(inst.reference_point);
        if (ti.reference_point.x < 0 || ti.reference_point.x > cfg.out_width - 1 ||
            ti.reference_point.y < 0 || ti.reference_point.y > cfg.out_height - 1)
            continue;  // cropped out
        ti.polygon.reserve(inst.polygon.size());
        for (const auto& p : inst.polygon) {
            geom::Point q = m.apply(p);
            q.x = std::clamp(q.x, 0.0, static_cast<double>(cfg.out_width) - 1e-6);
            q.y = std::clamp(q.y, 0.0, static_cast<double>(cfg.out_height) - 1e-6);
            ti.polygon.push_back(q);
        }
        out.instances.push_back(std::move(ti));
    }
    return out;
}

// --- manifest IO -----------------------------------------------------------------

namespace {

json instance_to_json(const codec::TextInstance& inst) {
    json j;
    j["text"] = inst.transcription;
    json poly = json::array();
    for (const auto& p : inst.polygon) poly.push_back(json::array({p.x, p.y}));
    j["polygon"] = std::move(poly);
    return j;
}

codec::TextInstance instance_from_json(const json& j) {
    codec::TextInstance inst;
    inst.transcription = j.at("text").get<std::string>();
    for (const auto& p : j.at("polygon"))
        inst.polygon.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    if (inst.polygon.size() >= 4 && inst.polygon.size() % 2 == 0)
        inst.reference_point = codec::central_point(inst);
    return inst;
}

}  // namespace

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& rec : manifest) {
        json j;
        j["image"] = rec.image_path;
        j["width"] = rec.width;
        j["height"] = rec.height;
        json arr = json::array();
        for (const auto& inst : rec.instances) arr.push_back(instance_to_json(inst));
        j["instances"] = std::move(arr);
        f << j.dump() << "\n";
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    DatasetManifest out;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
            ManifestRecord rec;
            rec.image_path = j.at("image").get<std::string>();
            rec.width = j.at("width").get<int>();
            rec.height = j.at("height").get<int>();
            for (const auto& ji : j.at("instances"))
                rec.instances.push_back(instance_from_json(ji));
            out.push_back(std::move(rec));
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": malformed manifest line: " + e.what());
        }
    }
    return out;
}

DatasetManifest generate_dataset(const GenConfig& config, int count, uint64_t seed,
                                 const std::string& root, int n_threads) {
    fs::create_directories(fs::path(root) / "images");
    DatasetManifest manifest(static_cast<size_t>(count));
    parallel_for(count, n_threads, [&](int i) {
        Rng rng(mix_seed(seed, static_cast<uint64_t>(i)));
        SceneSample s = generate_scene(config, rng);
        char name[32];
        std::snprintf(name, sizeof(name), "images/%06d.pgm", i);
        write_pgm(s.image, (fs::path(root) / name).string());
        ManifestRecord rec;
        rec.image_path = name;
        rec.width = s.image.width;
        rec.height = s.image.height;
        rec.instances = std::move(s.instances);
        manifest[static_cast<size_t>(i)] = std::move(rec);
    });
    write_manifest(manifest, (fs::path(root) / "manifest.jsonl").string());
    return manifest;
}

Image load_record_image(const std::string& manifest_path, const ManifestRecord& rec) {
    const fs::path dir = fs::path(manifest_path).parent_path();
    return read_pgm((dir / rec.image_path).string());
}

std::vector<SceneSample> load_samples(const std::string& manifest_path) {
    const DatasetManifest manifest = read_manifest(manifest_path);
    std::vector<SceneSample> out(manifest.size());
    for (size_t i = 0; i < manifest.size(); ++i) {
        out[i].image = load_record_image(manifest_path, manifest[i]);
        out[i].instances = manifest[i].instances;
    }
    return out;
}

}  // namespace spts::data
