#pragma once

#include <string>
#include <vector>

#include "spts/codec.hpp"

namespace spts::eval {

// Decoded model output: location (per variant), transcription, confidence.
using Prediction = codec::Decoded;

// Which ground-truth geometry the point protocol measures distance to.
enum class ReferenceMode { central, topleft, random_polygon };

const char* reference_mode_name(ReferenceMode m);
std::optional<ReferenceMode> parse_reference_mode(const std::string& s);

struct Lexicon {
    enum class Mode { none, full };
    Mode mode = Mode::none;
    std::vector<std::string> words;
};

struct MatchOptions {
    bool case_insensitive = true;
    double max_distance = -1.0;  // point protocol only; < 0 disables the cutoff
    double min_area = 0.0;       // GT polygons below this area are ignored (don't care)
    const Lexicon* lexicon = nullptr;
};

struct MatchRecord {
    int gt_index = -1;
    int pred_index = -1;  // -1 when the GT went unmatched
    double score = 0.0;   // distance, IoU or edit distance depending on protocol
    bool correct = false;
};

struct EvalReport {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::vector<MatchRecord> matches;

    void finalize();  // fills precision/recall/f1 from the counts
};

// Folds `img` (one image's report) into `total`; call finalize() afterwards.
void accumulate(EvalReport& total, const EvalReport& img);

// Point protocol: predictions bind in descending confidence to the nearest
// unmatched GT reference; a bound pair is a TP only when the transcription
// matches, otherwise it is a FP and the GT stays unrecalled.
EvalReport match_point_protocol(const std::vector<Prediction>& preds,
                                const std::vector<codec::TextInstance>& gts,
                                ReferenceMode mode, const MatchOptions& opt = {});

// IoU protocol over rectangles (threshold default 0.5); GT boxes are the
// circumscribed rectangles of the polygons.
EvalReport match_iou_protocol(const std::vector<Prediction>& preds,
                              const std::vector<codec::TextInstance>& gts,
                              double threshold = 0.5, const MatchOptions& opt = {});

// Levenshtein distance with unit costs over UTF-8 codepoints.
int edit_distance(const std::string& a, const std::string& b);

// No-point protocol: binds by minimum edit distance instead of geometry;
// a pair is a TP only at distance zero.
EvalReport npts_match(const std::vector<Prediction>& preds,
                      const std::vector<codec::TextInstance>& gts,
                      const MatchOptions& opt = {});

// Full mode: the lexicon word with minimum edit distance (ties broken
// lexicographically); none mode returns the input unchanged.
std::string lexicon_correct(const std::string& pred_text, const Lexicon& lexicon);

// Predictions on disk: one JSON object per line, {"image": path, "instances":
// [{"point"|"rect"|"bezier": [...], "text": str, "confidence": num}]}.
struct PredRecord {
    std::string image_path;
    std::vector<Prediction> preds;
};

void write_predictions(const std::vector<PredRecord>& records, const std::string& path);
std::vector<PredRecord> read_predictions(const std::string& path);

}  // namespace spts::eval
