// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "commands.hpp"
#include "oracles.hpp"
#include "roadstereo/aggregate.hpp"
#include "roadstereo/costs.hpp"
#include "roadstereo/disparity.hpp"
#include "roadstereo/image_io.hpp"
#include "roadstereo/keyvalue.hpp"
#include "roadstereo/pipeline.hpp"
#include "roadstereo/recon.hpp"
#include "roadstereo/synth.hpp"

using namespace roadstereo;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string num(double v, int prec = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

// ------------------------------------------------------------- 1: NCC oracle

Verdict ncc_oracle()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1001);
    const int rhos[] = {1, 2, 3};
    double worst = 0.0;
    long checked = 0;
    long mismatched_validity = 0;
    for (int trial = 0; trial < 24; ++trial) {
        const int rho = rhos[trial % 3];
        const auto left = oracle::random_image(32, 24, rng);
        const auto right = oracle::random_image(32, 24, rng);
        const auto vols = compute_cost_volumes(left, right, NccParams{rho, 8}, nullptr, 1);
        for (int d = 0; d <= 8; ++d)
            for (int v = 0; v < 24; ++v)
                for (int u = 0; u < 32; ++u) {
                    const double expect = oracle::ncc(left, right, u, v, d, rho);
                    const bool valid = vols.reference.valid(u, v, d);
                    if (std::isnan(expect) == valid) {
                        ++mismatched_validity;
                        continue;
                    }
                    if (!valid)
                        continue;
                    worst = std::max(worst, std::abs(vols.reference.at(u, v, d) - expect));
                    ++checked;
                }
    }
    const double t = seconds_since(t0);
    return {worst <= 1e-9 && mismatched_validity == 0 && checked > 0 && t < 10.0,
            "24 pairs, " + std::to_string(checked) + " entries, max error " + num(worst) + ", validity mismatches " +
                std::to_string(mismatched_validity) + ", " + num(t, 3) + " s"};
}

// ------------------------------------------------------- 2: bilateral oracle

Verdict bilateral_oracle()
{
    std::mt19937_64 rng(2002);
    const int rhos[] = {1, 2, 4};
    std::uniform_real_distribution<double> cost(-1.0, 1.0);
    std::bernoulli_distribution hole(0.1);
    double worst = 0.0;
    long checked = 0;
    long mismatched_validity = 0;
    for (int trial = 0; trial < 24; ++trial) {
        const int rho = rhos[trial % 3];
        const auto guide = oracle::random_image(16, 16, rng);
        CostVolume vol(16, 16, 0);
        for (auto& c : vol.slice(0))
            c = hole(rng) ? kInvalidCost : cost(rng);
        const BilateralParams p{rho, 5.0, 10.0};
        const auto out = aggregate_volume(vol, guide, p, 1);
        const std::vector<double> src(vol.slice(0).begin(), vol.slice(0).end());
        for (int v = 0; v < 16; ++v)
            for (int u = 0; u < 16; ++u) {
                const double expect = oracle::bilateral(src, guide, u, v, rho, p.gamma_d, p.gamma_r);
                if (std::isnan(expect) == out.valid(u, v, 0)) {
                    ++mismatched_validity;
                    continue;
                }
                if (std::isnan(expect))
                    continue;
                worst = std::max(worst, std::abs(out.at(u, v, 0) - expect));
                ++checked;
            }
    }
    return {worst <= 1e-9 && mismatched_validity == 0 && checked > 0,
            "24 slices, " + std::to_string(checked) + " entries, max error " + num(worst)};
}

// ---------------------------------------------------------- 3: dual storage

Verdict dual_identity()
{
    std::mt19937_64 rng(3003);
    long checked = 0;
    long violations = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 20 + trial * 3;
        const int h = 12 + trial;
        const auto left = oracle::random_image(w, h, rng);
        const auto right = oracle::random_image(w, h, rng);
        Mask mask(w, h, 255);
        for (int k = 0; k < 5; ++k)
            mask(static_cast<int>(rng() % static_cast<unsigned>(w)), static_cast<int>(rng() % static_cast<unsigned>(h))) = 0;
        const NccParams p{1 + trial % 3, 3 + trial % 7};
        const auto vols = compute_cost_volumes(left, right, p, trial % 2 ? &mask : nullptr, 1 + trial % 4);
        long ref_valid = 0;
        for (int d = 0; d <= p.d_max; ++d)
            for (int v = 0; v < h; ++v)
                for (int u = 0; u < w; ++u) {
                    if (!vols.reference.valid(u, v, d))
                        continue;
                    ++ref_valid;
                    if (u - d < 0 || !(vols.reference.at(u, v, d) == vols.target.at(u - d, v, d)))
                        ++violations;
                    ++checked;
                }
        long tar_valid = 0;
        for (double c : vols.target.values())
            tar_valid += is_valid_cost(c);
        violations += std::abs(tar_valid - ref_valid);
    }
    return {violations == 0 && checked > 0,
            std::to_string(checked) + " entries, " + std::to_string(violations) + " violations"};
}

// -------------------------------------------------------- 4: parabola vertex

Verdict subpixel_vertex()
{
    std::mt19937_64 rng(4004);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    double worst = 0.0;
    double worst_offset = 0.0;
    int trials = 0;
    while (trials < 1000) {
        double a = c(rng), b = c(rng), e = c(rng);
        const double top = std::max({a, b, e});
        if (top == a)
            std::swap(a, b);
        else if (top == e)
            std::swap(e, b);
        if (std::abs(2 * a + 2 * e - 4 * b) < 1e-12)
            continue;
        CostVolume vol(1, 1, 2);
        vol.at(0, 0, 0) = a;
        vol.at(0, 0, 1) = b;
        vol.at(0, 0, 2) = e;
        const auto refined = subpixel_refine(DisparityMap(1, 1, {1.0}), vol, 1);
        const double off = refined(0, 0) - 1.0;
        worst = std::max(worst, std::abs(off - oracle::parabola_vertex(a, b, e)));
        worst_offset = std::max(worst_offset, std::abs(off));
        ++trials;
    }
    return {worst <= 1e-12 && worst_offset <= 0.5,
            "1000 triples, max vertex error " + num(worst) + ", max |offset| " + num(worst_offset)};
}

// ------------------------------------------------------ synthetic end-to-end

SceneSpec plane_scene()
{
    SceneSpec spec;
    spec.width = 640;
    spec.height = 480;
    spec.rig = {700.0, 319.5, 239.5, 0.12, 1.27, -1.0, 1.0};
    spec.noise_sigma = 1.0;
    spec.seed = 7;
    return spec;
}

SceneSpec box_scene()
{
    SceneSpec spec = plane_scene();
    spec.boxes.push_back({0.0, 0.42, 0.12, 0.12, 0.1});
    return spec;
}

PipelineConfig pipeline_config(unsigned threads)
{
    PipelineConfig cfg;
    cfg.d_max = 32;
    cfg.threads = threads;
    return cfg;
}

struct EndToEnd {
    DisparityMap disparity;
    RoadModel model;
    double seconds = 0.0;
};

EndToEnd run_pipeline(const SyntheticPair& pair, unsigned threads)
{
    const PipelineConfig cfg = pipeline_config(threads);
    const auto t0 = Clock::now();
    EndToEnd r;
    r.model = estimate_road_model(pair.left, pair.right, nullptr, cfg);
    r.disparity = match_pair(pair.left, pair.right, r.model, cfg).disparity;
    r.seconds = seconds_since(t0);
    return r;
}

std::string pfm_bytes(const DisparityMap& map)
{
    std::ostringstream out;
    write_pfm(out, map);
    return out.str();
}

Verdict plane_accuracy(const SyntheticPair& pair, const EndToEnd& run)
{
    double sq = 0.0;
    long matched = 0;
    long road = 0;
    long road_valid = 0;
    for (int v = 0; v < pair.left.height(); ++v)
        for (int u = 0; u < pair.left.width(); ++u) {
            if (!pair.gt_disparity.valid(u, v) || pair.occlusion(u, v) != 0)
                continue;
            ++road;
            if (!run.disparity.valid(u, v))
                continue;
            ++road_valid;
            const double e = run.disparity(u, v) - pair.gt_disparity(u, v);
            sq += e * e;
            ++matched;
        }
    const double rms = matched ? std::sqrt(sq / matched) : INFINITY;
    const double frac = road ? static_cast<double>(road_valid) / road : 0.0;
    return {rms <= 0.25 && frac >= 0.95 && run.seconds < 60.0,
            "rms " + num(rms, 4) + " px, road valid " + num(100 * frac, 4) + "%, " + num(run.seconds, 3) +
                " s single-threaded"};
}

Verdict box_height(const SceneSpec& spec, const SyntheticPair& pair, const EndToEnd& run)
{
    const PixelRect top = surface_bounds(pair, Surface::box_top, 0);
    if (top.width < 20 || top.height < 20)
        return {false, "box top too small in the image"};
    const PointCloud cloud = triangulate(run.disparity, spec.rig, 1.0, 1);
    const PointCloud road = cloud.select(top.grown(12), false);
    const PointCloud inner = cloud.select(top.grown(-6), true);
    if (road.size() < 3 || inner.empty())
        return {false, "not enough reconstructed points"};
    const Plane plane = fit_plane(road);
    const double toward_camera = plane.n3 > 0.0 ? 1.0 : -1.0;
    const auto dist = point_plane_distances(inner, plane);
    double sum = 0.0;
    for (double d : dist)
        sum += d * toward_camera;
    const double height = sum / static_cast<double>(dist.size());
    const double target = spec.boxes[0].height;
    const double rel = std::abs(height - target) / target;
    return {rel <= 0.02, "mean height " + num(height * 1000, 5) + " mm vs " + num(target * 1000, 4) + " mm (" +
                             num(100 * rel, 3) + "%), " + std::to_string(inner.size()) + " points"};
}

// --------------------------------------------------------- 7: model recovery

Verdict model_recovery(const SceneSpec& spec, const SyntheticPair& pair)
{
    const auto truth = alpha_from_rig(spec.rig);
    std::vector<std::pair<int, int>> visible;
    for (int v = 0; v < spec.height; ++v)
        for (int u = 0; u < spec.width; ++u)
            if (pair.gt_disparity.valid(u, v) && pair.occlusion(u, v) == 0)
                visible.emplace_back(u, v);
    int failures = 0;
    double worst0 = 0.0;
    double worst1 = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        std::mt19937_64 rng(7000 + trial);
        std::uniform_int_distribution<std::size_t> pick(0, visible.size() - 1);
        std::uniform_real_distribution<double> gross(5.0, 40.0);
        std::bernoulli_distribution sign(0.5);
        std::vector<Correspondence> matches;
        const int n = 400;
        for (int k = 0; k < n; ++k) {
            const auto [u, v] = visible[pick(rng)];
            double ur = u - pair.gt_disparity(u, v);
            if (k < n * 3 / 10)
                ur += sign(rng) ? gross(rng) : -gross(rng);
            matches.push_back({double(u), double(v), ur, double(v)});
        }
        std::shuffle(matches.begin(), matches.end(), rng);
        RansacParams ransac;
        ransac.seed = static_cast<std::uint64_t>(trial + 1);
        try {
            const RoadModel m = fit_road_model(matches, ransac, spec.height);
            const double e0 = std::abs(m.alpha0 - truth.alpha0);
            const double e1 = std::abs(m.alpha1 - truth.alpha1);
            worst0 = std::max(worst0, e0);
            worst1 = std::max(worst1, e1);
            if (e0 > 1e-3 || e1 > 1e-3)
                ++failures;
        } catch (const Error&) {
            ++failures;
        }
    }
    return {failures == 0, "50 trials, " + std::to_string(failures) + " failures, max |d alpha0| " + num(worst0) +
                               ", max |d alpha1| " + num(worst1)};
}

// ------------------------------------------------------------ 8: bench shape

Verdict bench_shape()
{
    const fs::path csv_path = fs::temp_directory_path() / ("roadstereo_accept_bench_" + std::to_string(::getpid()) + ".csv");
    std::ostringstream out, err;
    const int code = cli::run({"roadstereo", "bench", "--repeats", "20", "--threads", "1", "--out", csv_path.string()},
                              out, err);
    if (code != 0)
        return {false, "bench exited with " + std::to_string(code) + ": " + err.str()};

    std::ifstream in(csv_path);
    std::string line;
    std::getline(in, line);
    if (line != "rho_block,rho_agg,seconds,mde_per_s")
        return {false, "unexpected CSV header '" + line + "'"};
    std::map<std::pair<int, int>, double> t;
    double worst_mde = 0.0;
    // 320x240 built-in scene at the default d_max of 20.
    const double evaluations = 320.0 * 240.0 * 20.0 * 1e-6;
    while (std::getline(in, line)) {
        const auto f = split_csv_fields(line);
        const int rb = std::stoi(f[0]);
        const int ra = std::stoi(f[1]);
        const double s = std::stod(f[2]);
        const double mde = std::stod(f[3]);
        t[{rb, ra}] = s;
        // The CSV rounds seconds to 1e-6 and Mde/s to 1e-4.
        const double expect = evaluations / s;
        const double allowed = 0.5e-4 + expect * 0.5e-6 / s;
        worst_mde = std::max(worst_mde, std::abs(mde - expect) / allowed);
    }
    fs::remove(csv_path);
    if (t.size() != 30)
        return {false, "expected 30 CSV rows, got " + std::to_string(t.size())};

    const double slack = 0.05;
    int violations = 0;
    std::string worst_case;
    double worst_ratio = 1e9;
    for (int rb = 1; rb <= 5; ++rb)
        for (int ra = 0; ra <= 5; ++ra) {
            const double here = t[{rb, ra}];
            auto check = [&](int rb2, int ra2) {
                const double ratio = t[{rb2, ra2}] / here;
                if (ratio < worst_ratio) {
                    worst_ratio = ratio;
                    worst_case = "(" + std::to_string(rb) + "," + std::to_string(ra) + ")->(" + std::to_string(rb2) +
                                 "," + std::to_string(ra2) + ")";
                }
                if (ratio < 1.0 - slack)
                    ++violations;
            };
            if (ra < 5)
                check(rb, ra + 1);
            if (rb < 5)
                check(rb + 1, ra);
        }
    const double doubling = t[{3, 4}] / t[{3, 2}];
    std::string per_block;
    for (int rb = 1; rb <= 5; ++rb)
        per_block += (rb > 1 ? "," : "") + num(t[{rb, 4}] / t[{rb, 2}], 3);
    return {violations == 0 && doubling >= 1.5 && worst_mde <= 1.0,
            "monotonicity violations " + std::to_string(violations) + " (tightest step " + worst_case + " x" +
                num(worst_ratio, 3) + "), t(rho=4)/t(rho=2) at rho_block=3: " + num(doubling, 3) +
                " (rho_block 1..5: " + per_block + "), Mde/s within rounding: " + (worst_mde <= 1.0 ? "yes" : "no") +
                "; operating point rho_block=3 rho_agg=4: " + num(evaluations / t[{3, 4}], 4) + " Mde/s"};
}

}  // namespace

int main()
{
    std::vector<std::pair<std::string, std::function<Verdict()>>> criteria;

    SceneSpec plane_spec = plane_scene();
    SceneSpec box_spec = box_scene();
    std::optional<SyntheticPair> plane_pair;
    std::optional<SyntheticPair> box_pair;
    std::map<unsigned, EndToEnd> plane_runs;
    std::map<unsigned, EndToEnd> box_runs;
    auto plane_run = [&](unsigned threads) -> const EndToEnd& {
        if (!plane_pair)
            plane_pair = render_pair(plane_spec, 1);
        if (!plane_runs.contains(threads))
            plane_runs[threads] = run_pipeline(*plane_pair, threads);
        return plane_runs[threads];
    };
    auto box_run = [&](unsigned threads) -> const EndToEnd& {
        if (!box_pair)
            box_pair = render_pair(box_spec, 1);
        if (!box_runs.contains(threads))
            box_runs[threads] = run_pipeline(*box_pair, threads);
        return box_runs[threads];
    };

    criteria.emplace_back("NCC cost volume equals brute-force evaluation", ncc_oracle);
    criteria.emplace_back("bilateral aggregation equals brute-force evaluation", bilateral_oracle);
    criteria.emplace_back("reference and target volumes agree entry by entry", dual_identity);
    criteria.emplace_back("parabola refinement hits the fitted vertex", subpixel_vertex);
    criteria.emplace_back("synthetic plane disparity accuracy",
                          [&] { return plane_accuracy(*(plane_run(1), plane_pair), plane_run(1)); });
    criteria.emplace_back("synthetic box height", [&] { return box_height(box_spec, *(box_run(1), box_pair), box_run(1)); });
    criteria.emplace_back("road model recovery under 30% outliers", [&] {
        if (!plane_pair)
            plane_pair = render_pair(plane_spec, 1);
        return model_recovery(plane_spec, *plane_pair);
    });
    criteria.emplace_back("bench runtime shape and Mde/s", bench_shape);
    criteria.emplace_back("disparity maps independent of thread count", [&] {
        std::string detail;
        bool pass = true;
        for (const char* name : {"plane", "box"}) {
            const bool plane = std::string(name) == "plane";
            const std::string ref = pfm_bytes((plane ? plane_run(1) : box_run(1)).disparity);
            for (unsigned threads : {2u, 8u}) {
                const bool same = pfm_bytes((plane ? plane_run(threads) : box_run(threads)).disparity) == ref;
                pass = pass && same;
                detail += std::string(detail.empty() ? "" : ", ") + name + " 1 vs " + std::to_string(threads) + ": " +
                          (same ? "identical" : "DIFFERENT");
            }
        }
        return Verdict{pass, detail};
    });

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += !v.pass;
        std::printf("%s criterion %zu: %s -- %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
