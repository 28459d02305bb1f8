#include "spts/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spts::codec {

// --- Vocabulary -------------------------------------------------------------

Vocabulary::Vocabulary(int n_bins, std::vector<std::string> alphabet)
    : n_bins_(n_bins), alphabet_(std::move(alphabet)) {
    if (n_bins_ < 1) throw std::invalid_argument("Vocabulary: n_bins must be >= 1");
    if (alphabet_.empty()) throw std::invalid_argument("Vocabulary: empty alphabet");
    for (size_t i = 0; i < alphabet_.size(); ++i) {
        if (alphabet_[i].empty()) throw std::invalid_argument("Vocabulary: empty symbol");
        if (!char_ids_.emplace(alphabet_[i], 3 + n_bins_ + static_cast<int>(i)).second)
            throw std::invalid_argument("Vocabulary: duplicate symbol '" + alphabet_[i] + "'");
    }
}

int Vocabulary::bin_token(int bin) const {
    if (bin < 1 || bin > n_bins_)
        throw std::out_of_range("bin " + std::to_string(bin) + " outside [1, " +
                                std::to_string(n_bins_) + "]");
    return 2 + bin;
}

int Vocabulary::bin_from_token(int id) const {
    if (!is_bin(id)) throw std::out_of_range("token " + std::to_string(id) + " is not a bin");
    return id - 2;
}

int Vocabulary::char_token(const std::string& symbol) const {
    auto it = char_ids_.find(symbol);
    return it == char_ids_.end() ? -1 : it->second;
}

const std::string& Vocabulary::char_from_token(int id) const {
    if (!is_char(id))
        throw std::out_of_range("token " + std::to_string(id) + " is not a character");
    return alphabet_[static_cast<size_t>(id - 3 - n_bins_)];
}

std::string Vocabulary::token_name(int id) const {
    if (id == kPad) return "<PAD>";
    if (id == kSos) return "<SOS>";
    if (id == kEos) return "<EOS>";
    if (is_bin(id)) return "bin:" + std::to_string(bin_from_token(id));
    if (is_char(id)) return "chr:" + char_from_token(id);
    return "invalid:" + std::to_string(id);
}

std::vector<std::string> Vocabulary::default_alphabet() {
    std::vector<std::string> a;
    for (char c = 'A'; c <= 'Z'; ++c) a.emplace_back(1, c);
    for (char c = '0'; c <= '9'; ++c) a.emplace_back(1, c);
    return a;
}

// --- enums -------------------------------------------------------------------

const char* location_kind_name(LocationKind k) {
    switch (k) {
        case LocationKind::point: return "point";
        case LocationKind::rect: return "rect";
        case LocationKind::bezier: return "bezier";
        case LocationKind::nopoint: return "nopoint";
    }
    return "?";
}

const char* ordering_name(Ordering o) {
    switch (o) {
        case Ordering::random: return "random";
        case Ordering::area: return "area";
        case Ordering::top_down: return "topdown";
        case Ordering::dist2origin: return "dist2origin";
    }
    return "?";
}

std::optional<LocationKind> parse_location_kind(const std::string& s) {
    if (s == "point") return LocationKind::point;
    if (s == "rect") return LocationKind::rect;
    if (s == "bezier") return LocationKind::bezier;
    if (s == "nopoint") return LocationKind::nopoint;
    return std::nullopt;
}

std::optional<Ordering> parse_ordering(const std::string& s) {
    if (s == "random") return Ordering::random;
    if (s == "area") return Ordering::area;
    if (s == "topdown") return Ordering::top_down;
    if (s == "dist2origin") return Ordering::dist2origin;
    return std::nullopt;
}

const char* point_mode_name(PointMode m) {
    switch (m) {
        case PointMode::central: return "central";
        case PointMode::topleft: return "topleft";
        case PointMode::random: return "random";
    }
    return "?";
}

std::optional<PointMode> parse_point_mode(const std::string& s) {
    if (s == "central") return PointMode::central;
    if (s == "topleft") return PointMode::topleft;
    if (s == "random") return PointMode::random;
    return std::nullopt;
}

int SequenceVariant::location_params() const {
    switch (kind) {
        case LocationKind::point: return 2;
        case LocationKind::rect: return 4;
        case LocationKind::bezier: return 16;
        case LocationKind::nopoint: return 0;
    }
    return 0;
}

geom::Point location_point(const Location& loc) {
    switch (loc.kind) {
        case LocationKind::point:
            return loc.pts.at(0);
        case LocationKind::rect:
            return {(loc.pts.at(0).x + loc.pts.at(1).x) * 0.5,
                    (loc.pts.at(0).y + loc.pts.at(1).y) * 0.5};
        case LocationKind::bezier: {
            const auto mid_top = geom::bezier_eval(
                {loc.pts.at(0), loc.pts.at(1), loc.pts.at(2), loc.pts.at(3)}, 0.5);
            const auto mid_bot = geom::bezier_eval(
                {loc.pts.at(4), loc.pts.at(5), loc.pts.at(6), loc.pts.at(7)}, 0.5);
            return {(mid_top.x + mid_bot.x) * 0.5, (mid_top.y + mid_bot.y) * 0.5};
        }
        case LocationKind::nopoint:
            break;
    }
    throw std::logic_error("location_point: nopoint prediction has no location");
}

// --- coordinate discretization ------------------------------------------------

int quantize_coord(double v, double extent, int n_bins) {
    if (n_bins < 1) throw std::invalid_argument("quantize_coord: n_bins must be >= 1");
    if (!(v >= 0.0 && v <= extent))
        throw std::out_of_range("coordinate " + std::to_string(v) + " outside [0, " +
                                std::to_string(extent) + "]");
    const int bin = static_cast<int>(std::floor(v / extent * n_bins)) + 1;
    return std::clamp(bin, 1, n_bins);
}

double dequantize_coord(int bin, double extent, int n_bins) {
    if (bin < 1 || bin > n_bins)
        throw std::out_of_range("bin " + std::to_string(bin) + " outside [1, " +
                                std::to_string(n_bins) + "]");
    return (static_cast<double>(bin) - 0.5) / n_bins * extent;
}

// --- reference points ----------------------------------------------------------

namespace {

void require_boundary_polygon(const TextInstance& instance, const char* op) {
    if (instance.polygon.size() < 4 || instance.polygon.size() % 2 != 0)
        throw std::invalid_argument(std::string(op) +
                                    ": polygon with top/bottom boundaries required, got " +
                                    std::to_string(instance.polygon.size()) + " vertices");
}

std::pair<std::vector<geom::Point>, std::vector<geom::Point>> split_boundaries(
    const geom::Polygon& poly) {
    const size_t half = poly.size() / 2;
    std::vector<geom::Point> top(poly.begin(), poly.begin() + static_cast<long>(half));
    std::vector<geom::Point> bottom(poly.begin() + static_cast<long>(half), poly.end());
    return {std::move(top), std::move(bottom)};
}

}  // namespace

geom::Point central_point(const TextInstance& instance) {
    require_boundary_polygon(instance, "central_point");
    auto [top, bottom] = split_boundaries(instance.polygon);
    const geom::Point mt = geom::polyline_point_at(top, 0.5);
    const geom::Point mb = geom::polyline_point_at(bottom, 0.5);
    return {(mt.x + mb.x) * 0.5, (mt.y + mb.y) * 0.5};
}

geom::Point topleft_point(const TextInstance& instance) {
    if (instance.polygon.empty())
        throw std::invalid_argument("topleft_point: polygon required");
    geom::Point best = instance.polygon[0];
    for (const auto& p : instance.polygon) {
        const double s = p.x + p.y, bs = best.x + best.y;
        if (s < bs || (s == bs && p.y < best.y)) best = p;
    }
    return best;
}

geom::Point random_point(const TextInstance& instance, Rng& rng) {
    if (instance.polygon.size() < 3)
        throw std::invalid_argument("random_point: polygon required");
    const geom::Rect bb = geom::bounding_box(instance.polygon);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const geom::Point p{rng.uniform(bb.x0, bb.x1), rng.uniform(bb.y0, bb.y1)};
        if (geom::point_in_polygon(p, instance.polygon)) return p;
    }
    // Degenerate area; fall back to the vertex mean.
    geom::Point c{0, 0};
    for (const auto& p : instance.polygon) c = c + p;
    return c * (1.0 / static_cast<double>(instance.polygon.size()));
}

geom::Point pick_reference(const TextInstance& instance, PointMode mode, Rng& rng) {
    switch (mode) {
        case PointMode::central: return central_point(instance);
        case PointMode::topleft: return topleft_point(instance);
        case PointMode::random: return random_point(instance, rng);
    }
    return instance.reference_point;
}

// --- bezier fitting --------------------------------------------------------------

std::array<geom::Point, 4> fit_cubic_ls(const std::vector<geom::Point>& pts,
                                        const std::vector<double>& params, double* rss_out) {
    if (pts.size() < 2 || pts.size() != params.size())
        throw std::invalid_argument("fit_cubic_ls: need matching points and parameters");
    const geom::Point p0 = pts.front(), p3 = pts.back();
    double a11 = 0, a12 = 0, a22 = 0;
    geom::Point r1{0, 0}, r2{0, 0};
    for (size_t i = 0; i < pts.size(); ++i) {
        const double t = params[i], u = 1.0 - t;
        const double b0 = u * u * u, b1 = 3 * u * u * t, b2 = 3 * u * t * t, b3 = t * t * t;
        const geom::Point rhs = pts[i] - (p0 * b0 + p3 * b3);
        a11 += b1 * b1;
        a12 += b1 * b2;
        a22 += b2 * b2;
        r1 = r1 + rhs * b1;
        r2 = r2 + rhs * b2;
    }
    const double det = a11 * a22 - a12 * a12;
    std::array<geom::Point, 4> ctrl{p0, p0 + (p3 - p0) * (1.0 / 3.0),
                                    p0 + (p3 - p0) * (2.0 / 3.0), p3};
    if (std::abs(det) > 1e-12) {
        ctrl[1] = {(r1.x * a22 - r2.x * a12) / det, (r1.y * a22 - r2.y * a12) / det};
        ctrl[2] = {(r2.x * a11 - r1.x * a12) / det, (r2.y * a11 - r1.y * a12) / det};
    }
    if (rss_out) {
        double rss = 0;
        for (size_t i = 0; i < pts.size(); ++i) {
            const geom::Point d = geom::bezier_eval(ctrl, params[i]) - pts[i];
            rss += geom::dot(d, d);
        }
        *rss_out = rss;
    }
    return ctrl;
}

namespace {

geom::Point bezier_d1(const std::array<geom::Point, 4>& c, double t) {
    const double u = 1.0 - t;
    return (c[1] - c[0]) * (3 * u * u) + (c[2] - c[1]) * (6 * u * t) +
           (c[3] - c[2]) * (3 * t * t);
}

std::vector<double> chord_params(const std::vector<geom::Point>& pts) {
    std::vector<double> t(pts.size(), 0.0);
    for (size_t i = 1; i < pts.size(); ++i)
        t[i] = t[i - 1] + geom::dist(pts[i - 1], pts[i]);
    const double total = t.back();
    if (total > 0)
        for (auto& v : t) v /= total;
    else
        for (size_t i = 0; i < t.size(); ++i)
            t[i] = static_cast<double>(i) / static_cast<double>(t.size() - 1);
    return t;
}

// Gaussian elimination with partial pivoting; a is n x n, b is overwritten
// with the solution. Returns false on a (near-)singular system.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[static_cast<size_t>(r) * n + col]) >
                std::abs(a[static_cast<size_t>(pivot) * n + col]))
                pivot = r;
        if (std::abs(a[static_cast<size_t>(pivot) * n + col]) < 1e-14) return false;
        if (pivot != col) {
            for (int c = 0; c < n; ++c)
                std::swap(a[static_cast<size_t>(col) * n + c], a[static_cast<size_t>(pivot) * n + c]);
            std::swap(b[static_cast<size_t>(col)], b[static_cast<size_t>(pivot)]);
        }
        const double inv = 1.0 / a[static_cast<size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[static_cast<size_t>(r) * n + col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c)
                a[static_cast<size_t>(r) * n + c] -= f * a[static_cast<size_t>(col) * n + c];
            b[static_cast<size_t>(r)] -= f * b[static_cast<size_t>(col)];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[static_cast<size_t>(r)];
        for (int c = r + 1; c < n; ++c) s -= a[static_cast<size_t>(r) * n + c] * b[static_cast<size_t>(c)];
        b[static_cast<size_t>(r)] = s / a[static_cast<size_t>(r) * n + r];
    }
    return true;
}

double side_rss(const std::array<geom::Point, 4>& c, const std::vector<geom::Point>& pts,
                const std::vector<double>& ts) {
    double rss = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        const geom::Point d = geom::bezier_eval(c, ts[i]) - pts[i];
        rss += geom::dot(d, d);
    }
    return rss;
}

// Joint Levenberg-Marquardt over the two interior control points and the
// interior sample parameters. Chord-length initialization alone leaves a
// parameterization bias that plain fit/reproject alternation removes only
// geometrically slowly; the joint solve takes exact-cubic samples to machine
// precision in a handful of iterations.
std::array<geom::Point, 4> fit_cubic_side(const std::vector<geom::Point>& pts) {
    if (pts.size() < 4) {
        const geom::Point p0 = pts.front(), p3 = pts.back();
        return {p0, p0 + (p3 - p0) * (1.0 / 3.0), p0 + (p3 - p0) * (2.0 / 3.0), p3};
    }
    const int n = static_cast<int>(pts.size());
    std::vector<double> ts = chord_params(pts);
    double best_rss = 0;
    std::array<geom::Point, 4> best = fit_cubic_ls(pts, ts, &best_rss);
    std::array<geom::Point, 4> cur = best;
    std::vector<double> cur_ts = ts;

    const int n_unknowns = 4 + (n - 2);  // P1.xy, P2.xy, interior t_i
    double lambda = 1e-3;
    for (int iter = 0; iter < 60 && best_rss > 1e-16; ++iter) {
        // Accumulate J^T J and J^T r over residuals (2 per point).
        std::vector<double> jtj(static_cast<size_t>(n_unknowns) * n_unknowns, 0.0);
        std::vector<double> jtr(static_cast<size_t>(n_unknowns), 0.0);
        for (int i = 0; i < n; ++i) {
            const double t = cur_ts[static_cast<size_t>(i)], u = 1.0 - t;
            const double b1 = 3 * u * u * t, b2 = 3 * u * t * t;
            const geom::Point r = geom::bezier_eval(cur, t) - pts[static_cast<size_t>(i)];
            const geom::Point d1 = bezier_d1(cur, t);
            const int ti_col = (i > 0 && i < n - 1) ? 4 + (i - 1) : -1;
            // x residual: vars P1.x (col 0), P2.x (col 2), t_i
            {
                const double jx[3] = {b1, b2, d1.x};
                const int cx[3] = {0, 2, ti_col};
                for (int a = 0; a < 3; ++a) {
                    if (cx[a] < 0) continue;
                    jtr[static_cast<size_t>(cx[a])] += jx[a] * r.x;
                    for (int b = 0; b < 3; ++b) {
                        if (cx[b] < 0) continue;
                        jtj[static_cast<size_t>(cx[a]) * n_unknowns + cx[b]] += jx[a] * jx[b];
                    }
                }
            }
            // y residual: vars P1.y (col 1), P2.y (col 3), t_i
            {
                const double jy[3] = {b1, b2, d1.y};
                const int cy[3] = {1, 3, ti_col};
                for (int a = 0; a < 3; ++a) {
                    if (cy[a] < 0) continue;
                    jtr[static_cast<size_t>(cy[a])] += jy[a] * r.y;
                    for (int b = 0; b < 3; ++b) {
                        if (cy[b] < 0) continue;
                        jtj[static_cast<size_t>(cy[a]) * n_unknowns + cy[b]] += jy[a] * jy[b];
                    }
                }
            }
        }
        std::vector<double> lhs = jtj;
        for (int d = 0; d < n_unknowns; ++d)
            lhs[static_cast<size_t>(d) * n_unknowns + d] += lambda * (jtj[static_cast<size_t>(d) * n_unknowns + d] + 1e-12);
        std::vector<double> delta = jtr;
        if (!solve_dense(lhs, delta, n_unknowns)) break;

        std::array<geom::Point, 4> next = cur;
        next[1] = {cur[1].x - delta[0], cur[1].y - delta[1]};
        next[2] = {cur[2].x - delta[2], cur[2].y - delta[3]};
        std::vector<double> next_ts = cur_ts;
        for (int i = 1; i < n - 1; ++i)
            next_ts[static_cast<size_t>(i)] =
                std::clamp(cur_ts[static_cast<size_t>(i)] - delta[static_cast<size_t>(4 + i - 1)], 0.0, 1.0);
        const double rss = side_rss(next, pts, next_ts);
        if (rss < best_rss) {
            best_rss = rss;
            best = next;
            cur = next;
            cur_ts = next_ts;
            lambda = std::max(lambda * 0.3, 1e-12);
        } else {
            lambda *= 10;
            if (lambda > 1e8) break;
        }
    }
    return best;
}

}  // namespace

std::array<geom::Point, 8> polygon_to_bezier(const TextInstance& instance) {
    require_boundary_polygon(instance, "polygon_to_bezier");
    auto [top, bottom] = split_boundaries(instance.polygon);
    const auto ct = fit_cubic_side(top);
    const auto cb = fit_cubic_side(bottom);
    return {ct[0], ct[1], ct[2], ct[3], cb[0], cb[1], cb[2], cb[3]};
}

// --- ordering -----------------------------------------------------------------

std::vector<TextInstance> order_instances(const std::vector<TextInstance>& instances,
                                          Ordering ordering, Rng& rng) {
    std::vector<TextInstance> out = instances;
    switch (ordering) {
        case Ordering::random:
            rng.shuffle(out);
            break;
        case Ordering::area:
            std::stable_sort(out.begin(), out.end(),
                             [](const TextInstance& a, const TextInstance& b) {
                                 return geom::polygon_area(a.polygon) >
                                        geom::polygon_area(b.polygon);
                             });
            break;
        case Ordering::top_down:
            std::stable_sort(out.begin(), out.end(),
                             [](const TextInstance& a, const TextInstance& b) {
                                 return a.reference_point.y < b.reference_point.y;
                             });
            break;
        case Ordering::dist2origin:
            std::stable_sort(out.begin(), out.end(),
                             [](const TextInstance& a, const TextInstance& b) {
                                 return std::hypot(a.reference_point.x, a.reference_point.y) >
                                        std::hypot(b.reference_point.x, b.reference_point.y);
                             });
            break;
    }
    return out;
}

// --- build / decode --------------------------------------------------------------

namespace {

std::vector<double> location_coords(const TextInstance& inst, LocationKind kind) {
    switch (kind) {
        case LocationKind::point:
            return {inst.reference_point.x, inst.reference_point.y};
        case LocationKind::rect: {
            if (inst.polygon.empty())
                throw std::invalid_argument("build_sequence: rect variant requires polygons");
            const geom::Rect r = geom::bounding_box(inst.polygon);
            return {r.x0, r.y0, r.x1, r.y1};
        }
        case LocationKind::bezier: {
            const auto cp = polygon_to_bezier(inst);
            std::vector<double> v;
            v.reserve(16);
            for (const auto& p : cp) {
                v.push_back(p.x);
                v.push_back(p.y);
            }
            return v;
        }
        case LocationKind::nopoint:
            return {};
    }
    return {};
}

}  // namespace

TokenSequence build_sequence(const std::vector<TextInstance>& instances,
                             const SequenceVariant& variant, const Vocabulary& vocab,
                             double extent_w, double extent_h, Rng& rng, OovPolicy policy,
                             int* skipped_out) {
    std::vector<TextInstance> ordered = order_instances(instances, variant.ordering, rng);
    if (static_cast<int>(ordered.size()) > variant.n_ti_max)
        ordered.resize(static_cast<size_t>(variant.n_ti_max));

    TokenSequence seq;
    seq.ids.reserve(2 + ordered.size() * static_cast<size_t>(variant.segment_len()));
    seq.ids.push_back(Vocabulary::kSos);
    int skipped = 0;
    for (const auto& inst : ordered) {
        // Tokenize the transcription first so an out-of-alphabet character can
        // skip the instance before any of its tokens are emitted.
        std::vector<int> text_ids;
        bool oov = false;
        for (const auto& sym : utf8_split(inst.transcription)) {
            const int id = vocab.char_token(sym);
            if (id < 0) {
                if (policy == OovPolicy::error)
                    throw std::invalid_argument("build_sequence: character '" + sym +
                                                "' not in alphabet");
                oov = true;
                break;
            }
            text_ids.push_back(id);
        }
        if (oov) {
            ++skipped;
            continue;
        }
        const auto coords = location_coords(inst, variant.kind);
        for (size_t i = 0; i < coords.size(); ++i) {
            const double extent = (i % 2 == 0) ? extent_w : extent_h;
            seq.ids.push_back(vocab.bin_token(quantize_coord(coords[i], extent, vocab.n_bins())));
        }
        if (static_cast<int>(text_ids.size()) > variant.l_tr)
            text_ids.resize(static_cast<size_t>(variant.l_tr));
        seq.ids.insert(seq.ids.end(), text_ids.begin(), text_ids.end());
        for (int i = static_cast<int>(text_ids.size()); i < variant.l_tr; ++i)
            seq.ids.push_back(Vocabulary::kPad);
    }
    seq.ids.push_back(Vocabulary::kEos);
    if (skipped_out) *skipped_out = skipped;
    return seq;
}

DecodeResult decode_sequence(const TokenSequence& tokens, const SequenceVariant& variant,
                             const Vocabulary& vocab, double extent_w, double extent_h) {
    DecodeResult res;
    const auto& ids = tokens.ids;
    const bool with_lik = !tokens.likelihoods.empty();
    size_t begin = 0;
    if (!ids.empty() && ids[0] == Vocabulary::kSos) begin = 1;
    size_t end = begin;
    while (end < ids.size() && ids[end] != Vocabulary::kEos) ++end;

    const int seg = variant.segment_len();
    const int np = variant.location_params();
    const size_t interior = end - begin;
    res.partial_tail = interior % static_cast<size_t>(seg) != 0;
    const size_t n_seg = interior / static_cast<size_t>(seg);

    for (size_t s = 0; s < n_seg; ++s) {
        const size_t base = begin + s * static_cast<size_t>(seg);
        Decoded dec;
        dec.location.kind = variant.kind;
        bool bad = false;
        for (int i = 0; i < np && !bad; i += 2) {
            const int tx = ids[base + static_cast<size_t>(i)];
            const int ty = ids[base + static_cast<size_t>(i) + 1];
            if (!vocab.is_bin(tx) || !vocab.is_bin(ty)) {
                bad = true;
                break;
            }
            dec.location.pts.push_back(
                {dequantize_coord(vocab.bin_from_token(tx), extent_w, vocab.n_bins()),
                 dequantize_coord(vocab.bin_from_token(ty), extent_h, vocab.n_bins())});
        }
        if (bad) {
            ++res.dropped_segments;
            continue;
        }
        for (int i = np; i < seg; ++i) {
            const int id = ids[base + static_cast<size_t>(i)];
            if (!vocab.is_char(id)) break;  // PAD or malformed token ends the text
            dec.text += vocab.char_from_token(id);
        }
        if (with_lik) {
            double acc = 0;
            for (int i = 0; i < seg; ++i) acc += tokens.likelihoods[base + static_cast<size_t>(i)];
            dec.confidence = acc / seg;
        }
        res.instances.push_back(std::move(dec));
    }
    return res;
}

std::vector<std::string> utf8_split(const std::string& s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        size_t len = 1;
        if ((c & 0x80u) == 0x00u)
            len = 1;
        else if ((c & 0xE0u) == 0xC0u)
            len = 2;
        else if ((c & 0xF0u) == 0xE0u)
            len = 3;
        else if ((c & 0xF8u) == 0xF0u)
            len = 4;
        len = std::min(len, s.size() - i);
        out.push_back(s.substr(i, len));
        i += len;
    }
    return out;
}

}  // namespace spts::codec
