#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "spts/codec.hpp"

using namespace spts;
using namespace spts::codec;

namespace {

// Independent arc-length midpoint: dense cumulative-length walk.
geom::Point midpoint_oracle(const std::vector<geom::Point>& pts) {
    double total = 0;
    for (size_t i = 1; i < pts.size(); ++i) total += geom::dist(pts[i - 1], pts[i]);
    double target = total / 2;
    for (size_t i = 1; i < pts.size(); ++i) {
        const double seg = geom::dist(pts[i - 1], pts[i]);
        if (target <= seg) {
            const double t = seg > 0 ? target / seg : 0;
            return {pts[i - 1].x + (pts[i].x - pts[i - 1].x) * t,
                    pts[i - 1].y + (pts[i].y - pts[i - 1].y) * t};
        }
        target -= seg;
    }
    return pts.back();
}

TextInstance make_rect_instance(double x0, double y0, double x1, double y1,
                                const std::string& text, int pts_per_side = 2) {
    TextInstance inst;
    for (int i = 0; i < pts_per_side; ++i) {
        const double t = static_cast<double>(i) / (pts_per_side - 1);
        inst.polygon.push_back({x0 + (x1 - x0) * t, y0});
    }
    for (int i = 0; i < pts_per_side; ++i) {
        const double t = static_cast<double>(i) / (pts_per_side - 1);
        inst.polygon.push_back({x1 + (x0 - x1) * t, y1});
    }
    inst.transcription = text;
    inst.reference_point = central_point(inst);
    return inst;
}

TextInstance random_instance(Rng& rng, const Vocabulary& vocab, double w, double h,
                             int max_len) {
    const double margin = 8;
    const double bw = rng.uniform(10, 30), bh = rng.uniform(5, 12);
    const double x0 = rng.uniform(margin, w - margin - bw);
    const double y0 = rng.uniform(margin, h - margin - bh);
    std::string text;
    const int len = rng.uniform_int(1, max_len);
    for (int i = 0; i < len; ++i)
        text += vocab.alphabet()[rng.uniform_index(vocab.alphabet().size())];
    return make_rect_instance(x0, y0, x0 + bw, y0 + bh, text, 4);
}

}  // namespace

TEST_CASE("vocabulary layout and size formula") {
    Vocabulary v(1000, Vocabulary::default_alphabet());
    CHECK(v.size() == 1000 + 36 + 3);
    CHECK(v.n_classes() == 36);

    // the reported 97-symbol configuration: 95 printable ASCII + 2 accents
    std::vector<std::string> big;
    for (char c = 32; c < 127; ++c) big.emplace_back(1, c);
    big.push_back("é");
    big.push_back("ü");
    REQUIRE(big.size() == 97);
    Vocabulary v97(1000, big);
    CHECK(v97.size() == 1100);
}

TEST_CASE("vocabulary bijection over every id") {
    Vocabulary v(50, {"A", "B", "é"});
    CHECK(v.size() == 56);
    for (int id = 0; id < v.size(); ++id) {
        if (id == Vocabulary::kPad || id == Vocabulary::kSos || id == Vocabulary::kEos) {
            CHECK_FALSE(v.is_bin(id));
            CHECK_FALSE(v.is_char(id));
        } else if (v.is_bin(id)) {
            CHECK(v.bin_token(v.bin_from_token(id)) == id);
        } else {
            REQUIRE(v.is_char(id));
            CHECK(v.char_token(v.char_from_token(id)) == id);
        }
    }
    CHECK(v.char_token("Z") == -1);
}

TEST_CASE("quantize_coord boundaries and round trip") {
    CHECK(quantize_coord(0, 800, 800) == 1);
    CHECK(quantize_coord(800, 800, 800) == 800);  // clamped at the upper edge
    CHECK(quantize_coord(400.0, 800, 1000) == 501);
    CHECK(dequantize_coord(501, 800, 1000) == doctest::Approx(400.4));
    CHECK(std::abs(dequantize_coord(501, 800, 1000) - 400.0) <= 800.0 / (2 * 1000));
    CHECK_THROWS_AS(quantize_coord(-0.5, 800, 800), std::out_of_range);
    CHECK_THROWS_AS(quantize_coord(800.5, 800, 800), std::out_of_range);

    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        const double extent = rng.uniform(10, 1000);
        const int n_bins = rng.uniform_int(1, 1200);
        const double v = rng.uniform(0, extent);
        const int bin = quantize_coord(v, extent, n_bins);
        CHECK(bin >= 1);
        CHECK(bin <= n_bins);
        CHECK(std::abs(dequantize_coord(bin, extent, n_bins) - v) <=
              extent / (2.0 * n_bins) + 1e-9);
    }
}

TEST_CASE("central_point: rectangle, parallelogram, curved oracle") {
    auto rect = make_rect_instance(0, 0, 10, 4, "A");
    auto c = central_point(rect);
    CHECK(c.x == doctest::Approx(5));
    CHECK(c.y == doctest::Approx(2));

    TextInstance para;
    para.polygon = {{0, 0}, {10, 2}, {10, 6}, {0, 4}};
    auto cp = central_point(para);
    CHECK(cp.x == doctest::Approx(5));
    CHECK(cp.y == doctest::Approx(3));

    // random 8-vertex curved polygon vs the dense-walk oracle
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        TextInstance curved;
        std::vector<geom::Point> top, bottom;
        for (int i = 0; i < 4; ++i) {
            const double x = i * 10.0 + rng.uniform(-1, 1);
            top.push_back({x, 20 + 6 * std::sin(x / 7.0) + rng.uniform(-1, 1)});
        }
        for (int i = 3; i >= 0; --i) {
            const double x = i * 10.0 + rng.uniform(-1, 1);
            bottom.push_back({x, 32 + 6 * std::sin(x / 7.0) + rng.uniform(-1, 1)});
        }
        curved.polygon = top;
        curved.polygon.insert(curved.polygon.end(), bottom.begin(), bottom.end());
        const auto got = central_point(curved);
        const auto mt = midpoint_oracle(top);
        const auto mb = midpoint_oracle(bottom);
        CHECK(got.x == doctest::Approx((mt.x + mb.x) / 2).epsilon(1e-9));
        CHECK(got.y == doctest::Approx((mt.y + mb.y) / 2).epsilon(1e-9));
    }
}

TEST_CASE("central_point requires a boundary polygon") {
    TextInstance inst;
    inst.transcription = "A";
    CHECK_THROWS_AS(central_point(inst), std::invalid_argument);
}

TEST_CASE("topleft_point and random_point") {
    auto rect = make_rect_instance(0, 0, 10, 4, "A");
    auto tl = topleft_point(rect);
    CHECK(tl.x == doctest::Approx(0));
    CHECK(tl.y == doctest::Approx(0));

    // tie on x+y broken by smaller y
    TextInstance tie;
    tie.polygon = {{2, 4}, {9, 0}, {9, 5}, {4, 2}};
    auto t = topleft_point(tie);
    CHECK(t.x == 4);
    CHECK(t.y == 2);

    Rng rng(3);
    TextInstance sliver;
    sliver.polygon = {{0, 0}, {40, 0.8}, {40, 1.6}, {0, 0.8}};
    for (int i = 0; i < 200; ++i) {
        auto p = random_point(sliver, rng);
        CHECK(geom::point_in_polygon(p, sliver.polygon));
    }
}

TEST_CASE("random_point empirical centroid matches polygon centroid") {
    TextInstance inst;
    inst.polygon = {{10, 10}, {50, 14}, {52, 30}, {8, 26}};
    Rng rng(17);
    double sx = 0, sy = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        auto p = random_point(inst, rng);
        sx += p.x;
        sy += p.y;
    }
    // shoelace centroid oracle
    double a = 0, cx = 0, cy = 0;
    const auto& poly = inst.polygon;
    for (size_t i = 0; i < poly.size(); ++i) {
        const auto& p0 = poly[i];
        const auto& p1 = poly[(i + 1) % poly.size()];
        const double cross = p0.x * p1.y - p1.x * p0.y;
        a += cross;
        cx += (p0.x + p1.x) * cross;
        cy += (p0.y + p1.y) * cross;
    }
    cx /= 3 * a;
    cy /= 3 * a;
    const double diag = 50.0;
    CHECK(std::abs(sx / n - cx) < 0.02 * diag);
    CHECK(std::abs(sy / n - cy) < 0.02 * diag);
}

TEST_CASE("bezier: straight edge gives collinear thirds") {
    auto inst = make_rect_instance(0, 0, 9, 4, "A");
    const auto cp = polygon_to_bezier(inst);
    CHECK(cp[0].x == doctest::Approx(0));
    CHECK(cp[1].x == doctest::Approx(3));
    CHECK(cp[1].y == doctest::Approx(0));
    CHECK(cp[2].x == doctest::Approx(6));
    CHECK(cp[3].x == doctest::Approx(9));
}

TEST_CASE("bezier: recovers exact cubic samples with tiny residual") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        std::array<geom::Point, 4> truth;
        truth[0] = {0, rng.uniform(-3, 3)};
        truth[1] = {rng.uniform(5, 15), rng.uniform(-10, 10)};
        truth[2] = {rng.uniform(20, 30), rng.uniform(-10, 10)};
        truth[3] = {40, rng.uniform(-3, 3)};
        std::vector<geom::Point> top;
        const int n = 12;
        for (int i = 0; i < n; ++i) top.push_back(geom::bezier_eval(truth, i / (n - 1.0)));
        std::vector<geom::Point> bottom;
        for (int i = n - 1; i >= 0; --i) {
            auto p = geom::bezier_eval(truth, i / (n - 1.0));
            bottom.push_back({p.x, p.y + 10});
        }
        TextInstance inst;
        inst.polygon = top;
        inst.polygon.insert(inst.polygon.end(), bottom.begin(), bottom.end());
        const auto cp = polygon_to_bezier(inst);
        double rss = 0;
        std::array<geom::Point, 4> fit_top{cp[0], cp[1], cp[2], cp[3]};
        auto sqdist = [&](double t, const geom::Point& q) {
            const auto b = geom::bezier_eval(fit_top, t);
            return (b.x - q.x) * (b.x - q.x) + (b.y - q.y) * (b.y - q.y);
        };
        for (const auto& q : top) {
            double best_t = 0, best = 1e30;
            for (int s = 0; s <= 400; ++s) {
                const double t = s / 400.0;
                const double d = sqdist(t, q);
                if (d < best) {
                    best = d;
                    best_t = t;
                }
            }
            double lo = std::max(0.0, best_t - 1.0 / 400), hi = std::min(1.0, best_t + 1.0 / 400);
            for (int it = 0; it < 80; ++it) {
                const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
                if (sqdist(m1, q) < sqdist(m2, q))
                    hi = m2;
                else
                    lo = m1;
            }
            rss += sqdist((lo + hi) / 2, q);
        }
        INFO("trial ", trial, " rss ", rss);
        CHECK(rss < 1e-6);
    }
}

TEST_CASE("bezier least squares matches an independent normal-equation oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<geom::Point> pts;
        std::vector<double> ts;
        const int n = 9;
        for (int i = 0; i < n; ++i) {
            const double t = i / (n - 1.0);
            ts.push_back(t);
            pts.push_back({t * 30 + rng.uniform(-0.5, 0.5), std::sin(t * 3) * 8 + rng.uniform(-0.5, 0.5)});
        }
        double rss = 0;
        const auto fit = fit_cubic_ls(pts, ts, &rss);

        // oracle: explicit 2x2 normal equations via Cramer's rule
        const geom::Point p0 = pts.front(), p3 = pts.back();
        double a11 = 0, a12 = 0, a22 = 0, r1x = 0, r1y = 0, r2x = 0, r2y = 0;
        for (int i = 0; i < n; ++i) {
            const double t = ts[static_cast<size_t>(i)], u = 1 - t;
            const double b0 = u * u * u, b1 = 3 * u * u * t, b2 = 3 * u * t * t, b3 = t * t * t;
            const double rx = pts[static_cast<size_t>(i)].x - b0 * p0.x - b3 * p3.x;
            const double ry = pts[static_cast<size_t>(i)].y - b0 * p0.y - b3 * p3.y;
            a11 += b1 * b1;
            a12 += b1 * b2;
            a22 += b2 * b2;
            r1x += b1 * rx;
            r1y += b1 * ry;
            r2x += b2 * rx;
            r2y += b2 * ry;
        }
        const double det = a11 * a22 - a12 * a12;
        const geom::Point p1o{(r1x * a22 - r2x * a12) / det, (r1y * a22 - r2y * a12) / det};
        const geom::Point p2o{(r2x * a11 - r1x * a12) / det, (r2y * a11 - r1y * a12) / det};
        double rss_oracle = 0;
        const std::array<geom::Point, 4> oc{p0, p1o, p2o, p3};
        for (int i = 0; i < n; ++i) {
            const auto b = geom::bezier_eval(oc, ts[static_cast<size_t>(i)]);
            const auto d = geom::Point{b.x - pts[static_cast<size_t>(i)].x,
                                       b.y - pts[static_cast<size_t>(i)].y};
            rss_oracle += d.x * d.x + d.y * d.y;
        }
        CHECK(fit[1].x == doctest::Approx(p1o.x).epsilon(1e-9));
        CHECK(fit[2].y == doctest::Approx(p2o.y).epsilon(1e-9));
        CHECK(rss == doctest::Approx(rss_oracle).epsilon(1e-9));
    }
}

TEST_CASE("build_sequence basics") {
    Vocabulary vocab(1000, Vocabulary::default_alphabet());
    SequenceVariant variant;  // point, l_tr 25
    Rng rng(1);

    auto seq = build_sequence({}, variant, vocab, 128, 128, rng);
    CHECK(seq.ids == std::vector<int>{Vocabulary::kSos, Vocabulary::kEos});

    auto inst = make_rect_instance(20, 20, 50, 32, "AB");
    auto one = build_sequence({inst}, variant, vocab, 128, 128, rng);
    REQUIRE(one.ids.size() == 29);  // SOS + 2 coords + 25 text slots + EOS
    CHECK(one.ids.front() == Vocabulary::kSos);
    CHECK(one.ids.back() == Vocabulary::kEos);
    CHECK(vocab.is_bin(one.ids[1]));
    CHECK(vocab.is_bin(one.ids[2]));
    CHECK(vocab.char_from_token(one.ids[3]) == "A");
    CHECK(vocab.char_from_token(one.ids[4]) == "B");
    for (size_t i = 5; i < 28; ++i) CHECK(one.ids[i] == Vocabulary::kPad);
}

TEST_CASE("build_sequence truncates to n_ti_max") {
    Vocabulary vocab(1000, Vocabulary::default_alphabet());
    SequenceVariant variant;
    variant.ordering = Ordering::top_down;
    Rng rng(1);
    std::vector<TextInstance> many;
    for (int i = 0; i < 61; ++i) many.push_back(make_rect_instance(5, 5 + i, 30, 9 + i, "A"));
    auto seq = build_sequence(many, variant, vocab, 800, 800, rng);
    CHECK(seq.ids.size() == 2 + 60u * 27u);
}

TEST_CASE("build_sequence out-of-alphabet policies") {
    Vocabulary vocab(100, {"A", "B"});
    SequenceVariant variant;
    variant.l_tr = 4;
    Rng rng(9);
    auto good = make_rect_instance(10, 10, 30, 20, "AB");
    auto bad = make_rect_instance(40, 40, 60, 50, "AXB");
    int skipped = -1;
    auto seq = build_sequence({good, bad}, variant, vocab, 128, 128, rng,
                              OovPolicy::skip_instance, &skipped);
    CHECK(skipped == 1);
    CHECK(seq.ids.size() == 2 + 6);
    CHECK_THROWS_AS(
        build_sequence({bad}, variant, vocab, 128, 128, rng, OovPolicy::error, nullptr),
        std::invalid_argument);
}

TEST_CASE("decode_sequence handles trivial/malformed input") {
    Vocabulary vocab(1000, Vocabulary::default_alphabet());
    SequenceVariant variant;
    TokenSequence empty;
    empty.ids = {Vocabulary::kSos, Vocabulary::kEos};
    CHECK(decode_sequence(empty, variant, vocab, 128, 128).instances.empty());

    // non-bin token in a coordinate slot drops the segment
    TokenSequence bad;
    bad.ids.push_back(Vocabulary::kSos);
    bad.ids.push_back(vocab.char_token("A"));  // should be a bin
    bad.ids.push_back(vocab.bin_token(5));
    for (int i = 0; i < 25; ++i) bad.ids.push_back(Vocabulary::kPad);
    bad.ids.push_back(Vocabulary::kEos);
    auto res = decode_sequence(bad, variant, vocab, 128, 128);
    CHECK(res.instances.empty());
    CHECK(res.dropped_segments == 1);

    // trailing partial segment is discarded but flagged
    TokenSequence partial;
    partial.ids = {Vocabulary::kSos, vocab.bin_token(3), vocab.bin_token(4),
                   vocab.char_token("A"), Vocabulary::kEos};
    auto res2 = decode_sequence(partial, variant, vocab, 128, 128);
    CHECK(res2.instances.empty());
    CHECK(res2.partial_tail);
}

TEST_CASE("decode confidence is the segment mean of likelihoods") {
    Vocabulary vocab(1000, Vocabulary::default_alphabet());
    SequenceVariant variant;
    variant.l_tr = 2;
    Rng rng(2);
    auto inst = make_rect_instance(10, 10, 40, 24, "AB");
    auto seq = build_sequence({inst}, variant, vocab, 128, 128, rng);
    REQUIRE(seq.ids.size() == 6);
    seq.likelihoods = {1.0f, 0.9f, 0.8f, 1.0f, 0.5f, 0.7f};  // SOS + 4 segment + EOS
    auto res = decode_sequence(seq, variant, vocab, 128, 128);
    REQUIRE(res.instances.size() == 1);
    CHECK(res.instances[0].confidence == doctest::Approx((0.9 + 0.8 + 1.0 + 0.5) / 4));
}

TEST_CASE("round trip across all variants") {
    Vocabulary vocab(1000, Vocabulary::default_alphabet());
    Rng rng(77);
    for (auto kind : {LocationKind::point, LocationKind::rect, LocationKind::bezier,
                      LocationKind::nopoint}) {
        SequenceVariant variant;
        variant.kind = kind;
        variant.l_tr = 8;
        for (int trial = 0; trial < 200; ++trial) {
            const double w = 128, h = 96;
            std::vector<TextInstance> instances;
            const int n = rng.uniform_int(0, 4);
            for (int i = 0; i < n; ++i) instances.push_back(random_instance(rng, vocab, w, h, 6));
            auto seq = build_sequence(instances, variant, vocab, w, h, rng);
            CHECK((seq.ids.size() - 2) % static_cast<size_t>(variant.segment_len()) == 0);
            auto res = decode_sequence(seq, variant, vocab, w, h);
            REQUIRE(res.instances.size() == instances.size());
            CHECK(res.dropped_segments == 0);

            // decode order follows the (shuffled) build order; match by text multiset
            std::vector<std::string> want, got;
            for (const auto& inst : instances) want.push_back(inst.transcription);
            for (const auto& d : res.instances) got.push_back(d.text);
            std::sort(want.begin(), want.end());
            std::sort(got.begin(), got.end());
            CHECK(want == got);

            const double tol_x = w / (2.0 * vocab.n_bins()) + 1e-9;
            const double tol_y = h / (2.0 * vocab.n_bins()) + 1e-9;
            for (const auto& d : res.instances) {
                if (kind == LocationKind::nopoint) {
                    CHECK(d.location.pts.empty());
                    continue;
                }
                // find the source instance by text (texts may repeat; check best match)
                double best = 1e30;
                for (const auto& inst : instances) {
                    if (inst.transcription != d.text) continue;
                    std::vector<geom::Point> ref_pts;
                    if (kind == LocationKind::point) {
                        ref_pts = {inst.reference_point};
                    } else if (kind == LocationKind::rect) {
                        const auto bb = geom::bounding_box(inst.polygon);
                        ref_pts = {{bb.x0, bb.y0}, {bb.x1, bb.y1}};
                    } else {
                        const auto cp = polygon_to_bezier(inst);
                        ref_pts.assign(cp.begin(), cp.end());
                    }
                    REQUIRE(ref_pts.size() == d.location.pts.size());
                    double worst = 0;
                    for (size_t i = 0; i < ref_pts.size(); ++i) {
                        worst = std::max(worst, std::abs(ref_pts[i].x - d.location.pts[i].x) / tol_x);
                        worst = std::max(worst, std::abs(ref_pts[i].y - d.location.pts[i].y) / tol_y);
                    }
                    best = std::min(best, worst);
                }
                CHECK(best <= 1.0);
            }
        }
    }
}

TEST_CASE("order_instances strategies") {
    Rng rng(41);
    auto a = make_rect_instance(0, 10, 2, 14, "S");    // area 8
    auto b = make_rect_instance(50, 2, 60, 10, "L");   // area 80
    CHECK(order_instances({a}, Ordering::area, rng).size() == 1);

    auto by_area = order_instances({a, b}, Ordering::area, rng);
    CHECK(by_area[0].transcription == "L");

    // TopDown vs a naive comparison-sort oracle
    std::vector<TextInstance> many;
    for (int i = 0; i < 5; ++i)
        many.push_back(make_rect_instance(5.0 * i, rng.uniform(0, 100), 5.0 * i + 4,
                                          rng.uniform(100, 110), std::string(1, char('A' + i))));
    auto sorted = order_instances(many, Ordering::top_down, rng);
    auto oracle = many;
    std::sort(oracle.begin(), oracle.end(), [](const TextInstance& x, const TextInstance& y) {
        return x.reference_point.y < y.reference_point.y;
    });
    for (size_t i = 0; i < many.size(); ++i)
        CHECK(sorted[i].transcription == oracle[i].transcription);

    auto far = order_instances({a, b}, Ordering::dist2origin, rng);
    CHECK(far[0].transcription == "L");  // farther from the origin first
}
