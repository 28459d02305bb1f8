#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "spts/data.hpp"
#include "spts/eval.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path work_root() {
    auto p = fs::temp_directory_path() / "spts_cli_test";
    return p;
}

int run(const std::string& args) {
    const std::string cmd = std::string(SPTS_CLI_PATH) + " " + args + " >" +
                            (work_root() / "last_stdout.txt").string() + " 2>" +
                            (work_root() / "last_stderr.txt").string();
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("cli pipeline: gen-data, train, infer, eval, convert, render") {
    const auto root = work_root();
    fs::remove_all(root);
    fs::create_directories(root);

    SUBCASE("usage errors exit with code 2") {
        CHECK(run("train --data /nonexistent") == 2);  // missing --out
        CHECK(run("nonsense") == 2);
    }

    SUBCASE("gen-data: count 0, determinism, then the full loop") {
        const auto empty = (root / "empty").string();
        REQUIRE(run("gen-data --out " + empty + " --count 0 --seed 3") == 0);
        CHECK(spts::data::read_manifest(empty + "/manifest.jsonl").empty());

        const auto d1 = (root / "d1").string(), d2 = (root / "d2").string();
        const std::string gen_args =
            " --count 6 --seed 11 --width 32 --height 32 --alphabet AB "
            "--max-instances 1 --max-len 2 --threads 2";
        REQUIRE(run("gen-data --out " + d1 + gen_args) == 0);
        REQUIRE(run("gen-data --out " + d2 + gen_args) == 0);
        CHECK(slurp(d1 + "/manifest.jsonl") == slurp(d2 + "/manifest.jsonl"));
        CHECK(slurp(d1 + "/images/000003.pgm") == slurp(d2 + "/images/000003.pgm"));

        // tiny model config so training takes seconds
        const std::string model_flags =
            " --image-size 32 --d-model 16 --heads 2 --enc-layers 1 --dec-layers 1 --ffn 32 "
            "--alphabet AB --n-bins 64 --l-tr 4 --n-ti-max 2 --dropout 0";
        const auto run1 = (root / "run1").string();
        REQUIRE(run("train --data " + d1 + " --out " + run1 + model_flags +
                    " --epochs 40 --batch 2 --lr0 1e-3 --seed 4 --ordering topdown "
                    "--no-aug --quiet --threads 2") == 0);
        CHECK(fs::exists(run1 + "/checkpoint.bin"));
        CHECK(fs::exists(run1 + "/config.json"));
        CHECK(fs::exists(run1 + "/train_log.jsonl"));

        // resume from the final checkpoint is a no-op but must succeed
        const auto run2 = (root / "run2").string();
        REQUIRE(run("train --data " + d1 + " --out " + run2 + " --resume " + run1 +
                    "/checkpoint.bin --quiet") == 0);

        const auto preds = (root / "preds.jsonl").string();
        REQUIRE(run("infer --ckpt " + run1 + "/checkpoint.bin --images " + d1 +
                    "/manifest.jsonl --out " + preds + " --threads 2 --max-len 16") == 0);
        const auto pred_records = spts::eval::read_predictions(preds);
        CHECK(pred_records.size() == 6);

        const auto report_path = (root / "report.json").string();
        REQUIRE(run("eval --pred " + preds + " --gt " + d1 + "/manifest.jsonl --protocol point "
                    "--out " + report_path) == 0);
        const auto report = json::parse(slurp(report_path));
        CHECK(report.contains("f1"));
        CHECK(report["tp"].get<int>() + report["fn"].get<int>() >= 0);

        // converting the ground truth to points and evaluating it scores 1.0
        const auto gt_preds = (root / "gt_as_preds.jsonl").string();
        REQUIRE(run("convert --in " + d1 + "/manifest.jsonl --to point --out " + gt_preds) == 0);
        const auto perfect_path = (root / "perfect.json").string();
        REQUIRE(run("eval --pred " + gt_preds + " --gt " + d1 +
                    "/manifest.jsonl --protocol point --out " + perfect_path) == 0);
        const auto perfect = json::parse(slurp(perfect_path));
        CHECK(perfect["f1"].get<double>() == doctest::Approx(1.0));
        CHECK(perfect["precision"].get<double>() == doctest::Approx(1.0));

        // bezier conversion of straight-edge polygons gives collinear controls
        const auto bez = (root / "bezier.jsonl").string();
        REQUIRE(run("convert --in " + d1 + "/manifest.jsonl --to bezier --out " + bez) == 0);
        const auto bez_records = spts::eval::read_predictions(bez);
        bool checked_any = false;
        for (const auto& rec : bez_records)
            for (const auto& p : rec.preds) {
                REQUIRE(p.location.pts.size() == 8);
                // straight-ish synthetic boxes: interior controls sit between ends
                for (int half = 0; half < 2; ++half) {
                    const auto& a = p.location.pts[static_cast<size_t>(half * 4)];
                    const auto& d = p.location.pts[static_cast<size_t>(half * 4 + 3)];
                    const auto& m1 = p.location.pts[static_cast<size_t>(half * 4 + 1)];
                    const double cross = (d.x - a.x) * (m1.y - a.y) - (d.y - a.y) * (m1.x - a.x);
                    const double len2 = (d.x - a.x) * (d.x - a.x) + (d.y - a.y) * (d.y - a.y);
                    if (len2 > 1) CHECK(std::abs(cross) / len2 < 0.35);
                }
                checked_any = true;
            }
        CHECK(checked_any);

        const auto overlays = (root / "overlays").string();
        REQUIRE(run("render --images " + d1 + "/manifest.jsonl --pred " + preds + " --out " +
                    overlays) == 0);
        CHECK(fs::exists(overlays + "/000000.pgm"));

        // npts protocol runs on point predictions too (text-only matching)
        REQUIRE(run("eval --pred " + gt_preds + " --gt " + d1 +
                    "/manifest.jsonl --protocol npts --out " + (root / "npts.json").string()) ==
                0);
        const auto npts = json::parse(slurp(root / "npts.json"));
        CHECK(npts["f1"].get<double>() == doctest::Approx(1.0));

        // unknown variant string is a usage error
        CHECK(run("train --data " + d1 + " --out " + (root / "bad").string() +
                  " --variant wedge --quiet") == 2);
    }
}
