#pragma once

#include <array>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "spts/geometry.hpp"
#include "spts/rng.hpp"

namespace spts::codec {

// One annotated text instance. The polygon, when present, traces the top
// boundary left-to-right in its first half and the bottom boundary
// right-to-left in its second half.
struct TextInstance {
    geom::Polygon polygon;
    std::string transcription;  // UTF-8
    geom::Point reference_point;
};

// Token id layout: PAD=0, SOS=1, EOS=2, coordinate bins [3, 3+n_bins),
// character classes [3+n_bins, 3+n_bins+n_cls). Total size n_bins+n_cls+3.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kSos = 1;
    static constexpr int kEos = 2;

    Vocabulary(int n_bins, std::vector<std::string> alphabet);

    int n_bins() const { return n_bins_; }
    int n_classes() const { return static_cast<int>(alphabet_.size()); }
    int size() const { return n_bins_ + n_classes() + 3; }

    bool is_bin(int id) const { return id >= 3 && id < 3 + n_bins_; }
    bool is_char(int id) const { return id >= 3 + n_bins_ && id < size(); }

    int bin_token(int bin) const;       // bin in [1, n_bins]
    int bin_from_token(int id) const;   // inverse of bin_token
    int char_token(const std::string& symbol) const;  // -1 when not in alphabet
    const std::string& char_from_token(int id) const;

    const std::vector<std::string>& alphabet() const { return alphabet_; }
    std::string token_name(int id) const;  // for diagnostics

    static std::vector<std::string> default_alphabet();  // A-Z then 0-9

private:
    int n_bins_;
    std::vector<std::string> alphabet_;
    std::unordered_map<std::string, int> char_ids_;
};

enum class LocationKind { point, rect, bezier, nopoint };
enum class Ordering { random, area, top_down, dist2origin };
enum class PointMode { central, topleft, random };

const char* location_kind_name(LocationKind k);
const char* ordering_name(Ordering o);
const char* point_mode_name(PointMode m);
std::optional<LocationKind> parse_location_kind(const std::string& s);
std::optional<Ordering> parse_ordering(const std::string& s);
std::optional<PointMode> parse_point_mode(const std::string& s);

// Per-instance token layout: N_p location tokens followed by l_tr
// transcription slots.
struct SequenceVariant {
    LocationKind kind = LocationKind::point;
    int l_tr = 25;
    int n_ti_max = 60;
    Ordering ordering = Ordering::random;

    int location_params() const;                       // N_p
    int segment_len() const { return location_params() + l_tr; }
};

struct TokenSequence {
    std::vector<int> ids;
    std::vector<float> likelihoods;  // aligned with ids when non-empty
};

// Decoded location; pts holds 1 point (point), 2 corners (rect), 8 control
// points (bezier, top curve then bottom curve) or nothing (nopoint).
struct Location {
    LocationKind kind = LocationKind::point;
    std::vector<geom::Point> pts;
};

// Representative point used by distance-based matching: the point itself, the
// rect center, or the mean of the two bezier curve midpoints.
geom::Point location_point(const Location& loc);

struct Decoded {
    Location location;
    std::string text;
    double confidence = 1.0;
};

struct DecodeResult {
    std::vector<Decoded> instances;
    int dropped_segments = 0;  // segments rejected for non-bin coordinate slots
    bool partial_tail = false; // trailing tokens short of a full segment
};

enum class OovPolicy { skip_instance, error };

// --- coordinate discretization -------------------------------------------

// Uniform bin in [1, n_bins]: clamp(floor(v / extent * n_bins) + 1, 1, n_bins).
int quantize_coord(double v, double extent, int n_bins);
// Bin center: (bin - 0.5) / n_bins * extent; round-trip error <= extent/(2 n_bins).
double dequantize_coord(int bin, double extent, int n_bins);

// --- reference points ------------------------------------------------------

// Mean of the top boundary's arc-length midpoint and the bottom boundary's.
geom::Point central_point(const TextInstance& instance);
// Vertex minimizing x + y, ties broken by smaller y.
geom::Point topleft_point(const TextInstance& instance);
// Uniform sample inside the polygon (rejection over its bounding box).
geom::Point random_point(const TextInstance& instance, Rng& rng);

// The indicated point for the given mode.
geom::Point pick_reference(const TextInstance& instance, PointMode mode, Rng& rng);

// --- bezier fitting ---------------------------------------------------------

// Least-squares cubic through fixed endpoints at the given parameter values.
// Returns the 4 control points; rss_out receives the sum of squared residuals.
std::array<geom::Point, 4> fit_cubic_ls(const std::vector<geom::Point>& pts,
                                        const std::vector<double>& params,
                                        double* rss_out = nullptr);

// Fits one cubic to each polygon boundary (top in stored order, bottom in
// stored order) with arc-length parameterization refined by Newton-Raphson
// reparameterization. Sides with fewer than 4 vertices fall back to collinear
// control points at 1/3 and 2/3.
std::array<geom::Point, 8> polygon_to_bezier(const TextInstance& instance);

// --- sequence construction / parsing ----------------------------------------

std::vector<TextInstance> order_instances(const std::vector<TextInstance>& instances,
                                          Ordering ordering, Rng& rng);

// SOS + per-instance segments in the variant's ordering + EOS. Instances past
// n_ti_max (after ordering) are dropped; out-of-alphabet characters follow
// `policy`, with skipped instances counted in *skipped_out when given.
TokenSequence build_sequence(const std::vector<TextInstance>& instances,
                             const SequenceVariant& variant, const Vocabulary& vocab,
                             double extent_w, double extent_h, Rng& rng,
                             OovPolicy policy = OovPolicy::skip_instance,
                             int* skipped_out = nullptr);

// Robust inverse of build_sequence over (possibly malformed) model output.
DecodeResult decode_sequence(const TokenSequence& tokens, const SequenceVariant& variant,
                             const Vocabulary& vocab, double extent_w, double extent_h);

// Splits UTF-8 text into single-codepoint symbols.
std::vector<std::string> utf8_split(const std::string& s);

}  // namespace spts::codec
