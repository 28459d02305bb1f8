#pragma once

#include <string>
#include <vector>

#include "spts/codec.hpp"
#include "spts/image.hpp"
#include "spts/rng.hpp"

namespace spts::data {

struct GenConfig {
    int width = 128;
    int height = 128;
    std::vector<std::string> alphabet = codec::Vocabulary::default_alphabet();
    int min_instances = 1;
    int max_instances = 3;
    int min_text_len = 1;
    int max_text_len = 5;
    double min_scale = 1.6;
    double max_scale = 2.6;
    double max_rotation_deg = 15.0;
    double curved_frac = 1.0 / 3.0;
    double min_bend_deg = 25.0;
    double max_bend_deg = 70.0;
    int max_distractors = 4;
    double margin = 3.0;          // keep polygons this far from the borders
    double max_overlap_iou = 0.0; // reject placements overlapping more than this
    int place_attempts = 40;      // rejection-sampling budget per instance
};

struct SceneSample {
    Image image;
    std::vector<codec::TextInstance> instances;
    int dropped_placements = 0;  // instances given up after place_attempts
    int curved_count = 0;
};

// Renders glyph text along straight or curved baselines over a noise
// background and records exact top/bottom boundary polygons.
SceneSample generate_scene(const GenConfig& config, Rng& rng);

struct AugConfig {
    bool enabled = true;
    double short_side_min = 112.0;  // resize target range for the short side
    double short_side_max = 144.0;
    double rot_min_deg = -30.0;
    double rot_max_deg = 30.0;
    double max_shift = 16.0;  // crop-window jitter around the centered position
    int out_width = 128;
    int out_height = 128;

    static AugConfig identity(int w, int h);
};

// Random resize + rotation + crop. Polygons and reference points are moved by
// the same affine; the crop window is chosen so every kept instance's
// reference point stays inside, and instances whose points cannot be kept are
// dropped. Polygon vertices are clamped to the output bounds.
SceneSample augment(const SceneSample& sample, const AugConfig& config, Rng& rng);

// --- dataset on disk ---------------------------------------------------------

struct ManifestRecord {
    std::string image_path;  // relative to the manifest's directory
    int width = 0;
    int height = 0;
    std::vector<codec::TextInstance> instances;
};

using DatasetManifest = std::vector<ManifestRecord>;

void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

// Generates `count` scenes under <root>/images/NNNNNN.pgm plus
// <root>/manifest.jsonl. Per-sample rng is derived from (seed, index), so the
// result is byte-identical for a given seed regardless of worker count.
DatasetManifest generate_dataset(const GenConfig& config, int count, uint64_t seed,
                                 const std::string& root, int n_threads = 1);

// Loads the image referenced by a manifest record (paths resolved against the
// manifest's directory).
Image load_record_image(const std::string& manifest_path, const ManifestRecord& rec);

// Reads the manifest and all referenced images into memory.
std::vector<SceneSample> load_samples(const std::string& manifest_path);

}  // namespace spts::data
