#include "spts/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace spts::eval {

namespace {

std::string fold_case(const std::string& s, bool fold) {
    if (!fold) return s;
    std::string out = s;
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string corrected_text(const Prediction& p, const MatchOptions& opt) {
    std::string t = p.text;
    if (opt.lexicon) t = lexicon_correct(t, *opt.lexicon);
    return fold_case(t, opt.case_insensitive);
}

// Confidence-descending processing order with content-based tie-breaking, so
// the result depends only on the prediction set, not its input order.
std::vector<size_t> canonical_order(const std::vector<Prediction>& preds) {
    std::vector<size_t> idx(preds.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        const Prediction& pa = preds[a];
        const Prediction& pb = preds[b];
        if (pa.confidence != pb.confidence) return pa.confidence > pb.confidence;
        const bool la = pa.location.kind != codec::LocationKind::nopoint && !pa.location.pts.empty();
        const bool lb = pb.location.kind != codec::LocationKind::nopoint && !pb.location.pts.empty();
        if (la && lb) {
            const geom::Point qa = codec::location_point(pa.location);
            const geom::Point qb = codec::location_point(pb.location);
            if (qa.x != qb.x) return qa.x < qb.x;
            if (qa.y != qb.y) return qa.y < qb.y;
        }
        if (pa.text != pb.text) return pa.text < pb.text;
        return a < b;
    });
    return idx;
}

geom::Rect prediction_box(const Prediction& p) {
    switch (p.location.kind) {
        case codec::LocationKind::rect:
            return {p.location.pts.at(0).x, p.location.pts.at(0).y, p.location.pts.at(1).x,
                    p.location.pts.at(1).y};
        case codec::LocationKind::bezier: {
            geom::Polygon sampled;
            for (int half = 0; half < 2; ++half) {
                std::array<geom::Point, 4> c{
                    p.location.pts.at(static_cast<size_t>(half * 4 + 0)),
                    p.location.pts.at(static_cast<size_t>(half * 4 + 1)),
                    p.location.pts.at(static_cast<size_t>(half * 4 + 2)),
                    p.location.pts.at(static_cast<size_t>(half * 4 + 3))};
                for (int i = 0; i <= 8; ++i) sampled.push_back(geom::bezier_eval(c, i / 8.0));
            }
            return geom::bounding_box(sampled);
        }
        default:
            throw std::invalid_argument("IoU protocol needs box-like predictions, got " +
                                        std::string(codec::location_kind_name(p.location.kind)));
    }
}

struct GtState {
    bool ignored = false;
    bool taken = false;
    std::string folded_text;
    geom::Point ref{};
    geom::Rect box{};
};

std::vector<GtState> prepare_gts(const std::vector<codec::TextInstance>& gts,
                                 const MatchOptions& opt) {
    std::vector<GtState> st(gts.size());
    for (size_t i = 0; i < gts.size(); ++i) {
        st[i].folded_text = fold_case(gts[i].transcription, opt.case_insensitive);
        if (opt.min_area > 0 && !gts[i].polygon.empty() &&
            geom::polygon_area(gts[i].polygon) < opt.min_area)
            st[i].ignored = true;
    }
    return st;
}

}  // namespace

const char* reference_mode_name(ReferenceMode m) {
    switch (m) {
        case ReferenceMode::central: return "central";
        case ReferenceMode::topleft: return "topleft";
        case ReferenceMode::random_polygon: return "random";
    }
    return "?";
}

std::optional<ReferenceMode> parse_reference_mode(const std::string& s) {
    if (s == "central") return ReferenceMode::central;
    if (s == "topleft") return ReferenceMode::topleft;
    if (s == "random") return ReferenceMode::random_polygon;
    return std::nullopt;
}

void EvalReport::finalize() {
    precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

void accumulate(EvalReport& total, const EvalReport& img) {
    total.tp += img.tp;
    total.fp += img.fp;
    total.fn += img.fn;
    total.matches.insert(total.matches.end(), img.matches.begin(), img.matches.end());
}

EvalReport match_point_protocol(const std::vector<Prediction>& preds,
                                const std::vector<codec::TextInstance>& gts,
                                ReferenceMode mode, const MatchOptions& opt) {
    auto st = prepare_gts(gts, opt);
    for (size_t i = 0; i < gts.size(); ++i) {
        if (mode == ReferenceMode::central)
            st[i].ref = central_point(gts[i]);
        else if (mode == ReferenceMode::topleft)
            st[i].ref = topleft_point(gts[i]);
    }

    EvalReport rep;
    std::vector<MatchRecord> per_gt(gts.size());
    for (size_t i = 0; i < gts.size(); ++i) per_gt[i].gt_index = static_cast<int>(i);

    for (size_t pi : canonical_order(preds)) {
        const Prediction& p = preds[pi];
        const geom::Point q = codec::location_point(p.location);
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t gi = 0; gi < gts.size(); ++gi) {
            if (st[gi].taken) continue;
            const double d = mode == ReferenceMode::random_polygon
                                 ? geom::point_polygon_dist(q, gts[gi].polygon)
                                 : geom::dist(q, st[gi].ref);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(gi);
            }
        }
        if (best < 0 || (opt.max_distance >= 0 && best_d > opt.max_distance)) {
            ++rep.fp;
            continue;
        }
        st[static_cast<size_t>(best)].taken = true;
        if (st[static_cast<size_t>(best)].ignored) continue;  // don't-care region
        const bool correct =
            corrected_text(p, opt) == st[static_cast<size_t>(best)].folded_text;
        per_gt[static_cast<size_t>(best)].pred_index = static_cast<int>(pi);
        per_gt[static_cast<size_t>(best)].score = best_d;
        per_gt[static_cast<size_t>(best)].correct = correct;
        if (correct)
            ++rep.tp;
        else
            ++rep.fp;  // bound but misrecognized; the GT stays unrecalled
    }
    for (size_t i = 0; i < gts.size(); ++i) {
        if (st[i].ignored) continue;
        rep.matches.push_back(per_gt[i]);
        if (!per_gt[i].correct) ++rep.fn;
    }
    rep.finalize();
    return rep;
}

EvalReport match_iou_protocol(const std::vector<Prediction>& preds,
                              const std::vector<codec::TextInstance>& gts, double threshold,
                              const MatchOptions& opt) {
    auto st = prepare_gts(gts, opt);
    for (size_t i = 0; i < gts.size(); ++i) st[i].box = geom::bounding_box(gts[i].polygon);

    EvalReport rep;
    std::vector<MatchRecord> per_gt(gts.size());
    for (size_t i = 0; i < gts.size(); ++i) per_gt[i].gt_index = static_cast<int>(i);

    for (size_t pi : canonical_order(preds)) {
        const Prediction& p = preds[pi];
        const geom::Rect pb = prediction_box(p);
        int best = -1;
        double best_iou = threshold;
        for (size_t gi = 0; gi < gts.size(); ++gi) {
            if (st[gi].taken) continue;
            const double iou = geom::rect_iou(pb, st[gi].box);
            if (iou > best_iou || (best < 0 && iou >= threshold)) {
                best_iou = iou;
                best = static_cast<int>(gi);
            }
        }
        if (best < 0) {
            ++rep.fp;
            continue;
        }
        st[static_cast<size_t>(best)].taken = true;
        if (st[static_cast<size_t>(best)].ignored) continue;
        const bool correct =
            corrected_text(p, opt) == st[static_cast<size_t>(best)].folded_text;
        per_gt[static_cast<size_t>(best)].pred_index = static_cast<int>(pi);
        per_gt[static_cast<size_t>(best)].score = best_iou;
        per_gt[static_cast<size_t>(best)].correct = correct;
        if (correct)
            ++rep.tp;
        else
            ++rep.fp;
    }
    for (size_t i = 0; i < gts.size(); ++i) {
        if (st[i].ignored) continue;
        rep.matches.push_back(per_gt[i]);
        if (!per_gt[i].correct) ++rep.fn;
    }
    rep.finalize();
    return rep;
}

int edit_distance(const std::string& a, const std::string& b) {
    const auto sa = codec::utf8_split(a);
    const auto sb = codec::utf8_split(b);
    const size_t n = sa.size(), m = sb.size();
    std::vector<int> prev(m + 1), cur(m + 1);
    for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (size_t j = 1; j <= m; ++j) {
            const int sub = prev[j - 1] + (sa[i - 1] == sb[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

EvalReport npts_match(const std::vector<Prediction>& preds,
                      const std::vector<codec::TextInstance>& gts, const MatchOptions& opt) {
    auto st = prepare_gts(gts, opt);

    EvalReport rep;
    std::vector<MatchRecord> per_gt(gts.size());
    for (size_t i = 0; i < gts.size(); ++i) per_gt[i].gt_index = static_cast<int>(i);

    for (size_t pi : canonical_order(preds)) {
        const std::string text = corrected_text(preds[pi], opt);
        int best = -1;
        int best_d = std::numeric_limits<int>::max();
        for (size_t gi = 0; gi < gts.size(); ++gi) {
            if (st[gi].taken) continue;
            const int d = edit_distance(text, st[gi].folded_text);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(gi);
            }
        }
        if (best < 0) {
            ++rep.fp;
            continue;
        }
        st[static_cast<size_t>(best)].taken = true;
        if (st[static_cast<size_t>(best)].ignored) continue;
        const bool correct = best_d == 0;
        per_gt[static_cast<size_t>(best)].pred_index = static_cast<int>(pi);
        per_gt[static_cast<size_t>(best)].score = best_d;
        per_gt[static_cast<size_t>(best)].correct = correct;
        if (correct)
            ++rep.tp;
        else
            ++rep.fp;
    }
    for (size_t i = 0; i < gts.size(); ++i) {
        if (st[i].ignored) continue;
        rep.matches.push_back(per_gt[i]);
        if (!per_gt[i].correct) ++rep.fn;
    }
    rep.finalize();
    return rep;
}

std::string lexicon_correct(const std::string& pred_text, const Lexicon& lexicon) {
    if (lexicon.mode == Lexicon::Mode::none) return pred_text;
    if (lexicon.words.empty())
        throw std::invalid_argument("lexicon_correct: full mode needs a non-empty word list");
    const std::string* best = nullptr;
    int best_d = std::numeric_limits<int>::max();
    for (const auto& w : lexicon.words) {
        const int d = edit_distance(pred_text, w);
        if (d < best_d || (d == best_d && best && w < *best)) {
            best_d = d;
            best = &w;
        }
    }
    return *best;
}

void write_predictions(const std::vector<PredRecord>& records, const std::string& path) {
    using json = nlohmann::json;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& rec : records) {
        json arr = json::array();
        for (const auto& p : rec.preds) {
            json jp;
            std::vector<double> coords;
            for (const auto& pt : p.location.pts) {
                coords.push_back(pt.x);
                coords.push_back(pt.y);
            }
            switch (p.location.kind) {
                case codec::LocationKind::point: jp["point"] = coords; break;
                case codec::LocationKind::rect: jp["rect"] = coords; break;
                case codec::LocationKind::bezier: jp["bezier"] = coords; break;
                case codec::LocationKind::nopoint: break;
            }
            jp["text"] = p.text;
            jp["confidence"] = p.confidence;
            arr.push_back(std::move(jp));
        }
        f << json{{"image", rec.image_path}, {"instances", std::move(arr)}}.dump() << "\n";
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<PredRecord> read_predictions(const std::string& path) {
    using json = nlohmann::json;
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::vector<PredRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            PredRecord rec;
            rec.image_path = j.at("image").get<std::string>();
            for (const auto& jp : j.at("instances")) {
                Prediction p;
                std::vector<double> coords;
                if (jp.contains("point")) {
                    p.location.kind = codec::LocationKind::point;
                    coords = jp.at("point").get<std::vector<double>>();
                } else if (jp.contains("rect")) {
                    p.location.kind = codec::LocationKind::rect;
                    coords = jp.at("rect").get<std::vector<double>>();
                } else if (jp.contains("bezier")) {
                    p.location.kind = codec::LocationKind::bezier;
                    coords = jp.at("bezier").get<std::vector<double>>();
                } else {
                    p.location.kind = codec::LocationKind::nopoint;
                }
                for (size_t i = 0; i + 1 < coords.size(); i += 2)
                    p.location.pts.push_back({coords[i], coords[i + 1]});
                p.text = jp.at("text").get<std::string>();
                p.confidence = jp.value("confidence", 1.0);
                rec.preds.push_back(std::move(p));
            }
            out.push_back(std::move(rec));
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": malformed prediction line: " + e.what());
        }
    }
    return out;
}

}  // namespace spts::eval
