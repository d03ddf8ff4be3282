#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "roadstereo/disparity.hpp"
#include "roadstereo/image_io.hpp"
#include "roadstereo/keyvalue.hpp"
#include "roadstereo/pipeline.hpp"
#include "roadstereo/recon.hpp"
#include "roadstereo/synth.hpp"

namespace roadstereo::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

const char* const kConfigKeys[] = {
    "rho_block",       "d_max",           "rho_agg",          "gamma_d",
    "gamma_r",         "lr_tol",          "delta_margin",     "ransac_threshold",
    "ransac_iterations", "ransac_min_consensus", "seed",     "sparse_half_window",
    "sparse_grid",     "sparse_min_peak", "sparse_max_disparity", "sparse_min_stddev",
    "d_min",           "threads",
};

std::string dashed(std::string key)
{
    std::ranges::replace(key, '_', '-');
    return key;
}

std::string fmt(double v, int precision = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

// --config plus one override flag per config key; flags win over the file.
struct ConfigOptions {
    std::string file;
    bool print = false;
    std::map<std::string, std::string> values;
    std::vector<std::pair<std::string, CLI::Option*>> flags;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--config", file, "flat key=value config file");
        cmd->add_flag("--print-config", print, "print the effective configuration and exit");
        for (const char* key : kConfigKeys)
            flags.emplace_back(key, cmd->add_option("--" + dashed(key), values[key], std::string("override ") + key));
    }

    PipelineConfig resolve() const
    {
        try {
            KeyValueFile kv;
            if (!file.empty())
                kv = KeyValueFile::load(file);
            for (const auto& [key, opt] : flags)
                if (opt->count() > 0)
                    kv.set(key, values.at(key));
            PipelineConfig cfg;
            cfg.apply(kv);
            cfg.validate();
            return cfg;
        } catch (const Error& e) {
            throw UsageError(std::string("config: ") + e.what());
        }
    }
};

PixelRect parse_rect(const std::string& text)
{
    const auto f = split_csv_fields(text);
    if (f.size() != 4)
        throw UsageError("--roi expects u0,v0,w,h");
    try {
        PixelRect r{parse_int(f[0], "roi"), parse_int(f[1], "roi"), parse_int(f[2], "roi"), parse_int(f[3], "roi")};
        if (r.width <= 0 || r.height <= 0)
            throw UsageError("--roi width and height must be positive");
        return r;
    } catch (const FormatError& e) {
        throw UsageError(e.what());
    }
}

std::vector<int> parse_int_list(const std::string& text, const char* what)
{
    std::vector<int> out;
    try {
        for (const auto& f : split_csv_fields(text))
            out.push_back(parse_int(f, what));
    } catch (const FormatError& e) {
        throw UsageError(e.what());
    }
    if (out.empty())
        throw UsageError(std::string(what) + ": empty list");
    return out;
}

void print_timings(std::ostream& out, const MatchResult& res)
{
    std::map<std::string, double> per_stage;
    std::vector<std::string> order;
    for (const auto& t : res.timings) {
        if (!per_stage.contains(t.stage))
            order.push_back(t.stage);
        per_stage[t.stage] += t.seconds;
    }
    for (const auto& s : order)
        out << "stage " << s << ' ' << fmt(per_stage[s]) << " s\n";
}

std::uint64_t fnv1a(const DisparityMap& map)
{
    std::ostringstream os;
    write_pfm(os, map);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void require_inputs(const char* cmd, std::initializer_list<std::pair<const char*, const std::string*>> inputs)
{
    for (const auto& [flag, value] : inputs)
        if (value->empty())
            throw UsageError(std::string(cmd) + ": " + flag + " is required");
}

// ---------------------------------------------------------------- transform

struct TransformOptions {
    std::string left;
    std::string right;
    std::string matches;
    std::string out_model = "road_model.txt";
    std::string out_warped = "warped.pgm";
    std::string out_matches;
    std::string roll_disparity;
    ConfigOptions config;
};

int cmd_transform(const TransformOptions& o, std::ostream& out)
{
    const PipelineConfig cfg = o.config.resolve();
    if (o.config.print) {
        cfg.to_config().write(out);
        return kOk;
    }
    require_inputs("transform", {{"--left", &o.left}, {"--right", &o.right}});
    const GrayImage left = load_pgm(o.left);
    const GrayImage right = load_pgm(o.right);
    if (!left.same_shape(right))
        throw DataError("left and right images differ in size");

    std::vector<Correspondence> given;
    if (!o.matches.empty())
        given = load_correspondences(o.matches);
    std::vector<Correspondence> used;
    const RoadModel model = estimate_road_model(left, right, o.matches.empty() ? nullptr : &given, cfg, &used);
    WarpResult warped;
    try {
        warped = warp_target(right, model, cfg.threads);
    } catch (const ParameterError& ex) {
        throw DataError(ex.what());
    }

    std::optional<double> roll;
    if (!o.roll_disparity.empty()) {
        const DisparityMap patch_map = load_pfm(o.roll_disparity);
        roll = estimate_roll(patch_map, default_roll_patch(patch_map.width(), patch_map.height()));
    }

    {
        std::ofstream mf(o.out_model);
        if (!mf)
            throw IoError("cannot open '" + o.out_model + "' for writing");
        write_road_model(mf, model);
    }
    save_pgm(o.out_warped, warped.image);
    if (!o.out_matches.empty()) {
        std::ofstream cf(o.out_matches);
        if (!cf)
            throw IoError("cannot open '" + o.out_matches + "' for writing");
        write_correspondences(cf, used);
    }

    out << "correspondences=" << used.size() << '\n'
        << "alpha0=" << fmt(model.alpha0, 9) << '\n'
        << "alpha1=" << fmt(model.alpha1, 9) << '\n'
        << "delta=" << fmt(model.delta, 1) << '\n'
        << "inlier_count=" << model.inlier_count << '\n'
        << "residual_rms=" << fmt(model.residual_rms, 6) << '\n';
    if (roll)
        out << "roll=" << fmt(*roll, 9) << '\n';
    return kOk;
}

// -------------------------------------------------------------------- match

struct MatchOptions {
    std::string left;
    std::string right;
    std::string model;
    bool identity = false;
    std::string out = "disparity.pfm";
    std::string vis;
    std::string dump_costs;
    ConfigOptions config;
};

int cmd_match(const MatchOptions& o, std::ostream& out)
{
    const PipelineConfig cfg = o.config.resolve();
    if (o.config.print) {
        cfg.to_config().write(out);
        return kOk;
    }
    require_inputs("match", {{"--left", &o.left}, {"--right", &o.right}});
    if (o.identity == !o.model.empty())
        throw UsageError("match: give exactly one of --model or --identity");
    const RoadModel model = o.identity ? RoadModel::identity() : load_road_model(o.model);
    const GrayImage left = load_pgm(o.left);
    const GrayImage right = load_pgm(o.right);
    if (!left.same_shape(right))
        throw DataError("left and right images differ in size");

    MatchResult res;
    try {
        res = match_pair(left, right, model, cfg, !o.dump_costs.empty());
    } catch (const ParameterError& ex) {
        throw DataError(ex.what());
    }
    save_pfm(o.out, res.disparity);
    if (!o.vis.empty())
        save_pgm(o.vis, visualize_disparity(res.disparity));
    if (!o.dump_costs.empty()) {
        save_cost_volume(o.dump_costs + "_ref_raw.bin", res.raw_costs->reference);
        save_cost_volume(o.dump_costs + "_tar_raw.bin", res.raw_costs->target);
        save_cost_volume(o.dump_costs + "_ref_agg.bin", res.aggregated_costs->reference);
        save_cost_volume(o.dump_costs + "_tar_agg.bin", res.aggregated_costs->target);
    }

    const NccParams ncc = cfg.ncc();
    print_timings(out, res);
    out << "valid_pixels=" << res.disparity.valid_count() << " of " << res.disparity.size() << '\n';
    out << "matching_seconds=" << fmt(res.matching_seconds) << '\n';
    out << "mde_per_s=" << fmt(mde_per_second(left.width(), left.height(), ncc.d_max, res.matching_seconds), 3)
        << '\n';
    return kOk;
}

// -------------------------------------------------------------- reconstruct

struct ReconstructOptions {
    std::string disparity;
    std::string rig;
    std::string roi;
    int guard = 0;
    bool corners = false;
    std::string out = "cloud.ply";
    ConfigOptions config;
};

Plane corner_plane(const PointCloud& cloud, const PixelRect& rect)
{
    const int cx[4] = {rect.x, rect.x + rect.width - 1, rect.x, rect.x + rect.width - 1};
    const int cy[4] = {rect.y, rect.y, rect.y + rect.height - 1, rect.y + rect.height - 1};
    Point3 picked[4];
    for (int k = 0; k < 4; ++k) {
        long best = std::numeric_limits<long>::max();
        for (const auto& cp : cloud.points) {
            const long du = cp.u - cx[k];
            const long dv = cp.v - cy[k];
            if (du * du + dv * dv < best) {
                best = du * du + dv * dv;
                picked[k] = cp.p;
            }
        }
    }
    return fit_plane_corners(picked[0], picked[1], picked[2], picked[3]);
}

void print_stats(std::ostream& out, const char* prefix, const DistanceStats& s)
{
    out << prefix << "_count=" << s.count << '\n'
        << prefix << "_min=" << fmt(s.min) << '\n'
        << prefix << "_max=" << fmt(s.max) << '\n'
        << prefix << "_mean=" << fmt(s.mean) << '\n'
        << prefix << "_rms=" << fmt(s.rms) << '\n';
}

int cmd_reconstruct(const ReconstructOptions& o, std::ostream& out)
{
    const PipelineConfig cfg = o.config.resolve();
    if (o.config.print) {
        cfg.to_config().write(out);
        return kOk;
    }
    require_inputs("reconstruct", {{"--disparity", &o.disparity}, {"--rig", &o.rig}});
    std::optional<PixelRect> roi;
    if (!o.roi.empty())
        roi = parse_rect(o.roi);
    if (o.guard < 0)
        throw UsageError("--guard must be non-negative");
    if (o.corners && !roi)
        throw UsageError("--corners needs --roi");

    CameraRig rig;
    try {
        rig = CameraRig::from_config(KeyValueFile::load(o.rig));
        rig.validate();
    } catch (const ParameterError& e) {
        throw UsageError(o.rig + ": " + e.what());
    }
    const DisparityMap map = load_pfm(o.disparity);
    const PointCloud cloud = triangulate(map, rig, cfg.d_min, cfg.threads);
    if (cloud.empty())
        throw DataError("no valid disparities >= d_min to reconstruct");

    out << "points=" << cloud.size() << '\n';
    if (roi) {
        const PointCloud inside = cloud.select(*roi, true);
        const PointCloud outside = cloud.select(roi->grown(o.guard), false);
        if (inside.empty())
            throw DataError("region of interest holds no valid points");
        if (outside.size() < 3)
            throw DataError("fewer than 3 valid points outside the region of interest");
        const Plane plane = o.corners ? corner_plane(outside, roi->grown(o.guard)) : fit_plane(outside);
        auto dist = point_plane_distances(inside, plane);
        const auto road = summarize(point_plane_distances(outside, plane));
        // Positive heights point towards the camera side of the plane.
        const double towards_camera = plane.n3 > 0.0 ? 1.0 : -1.0;
        std::vector<double> heights(dist.size());
        std::ranges::transform(dist, heights.begin(), [&](double d) { return d * towards_camera; });
        out << "plane=" << fmt(plane.n0, 9) << ',' << fmt(plane.n1, 9) << ',' << fmt(plane.n2, 9) << ','
            << fmt(plane.n3, 9) << '\n';
        print_stats(out, "road_distance", road);
        print_stats(out, "roi_distance", summarize(dist));
        print_stats(out, "roi_height", summarize(heights));
    } else {
        const Plane plane = fit_plane(cloud);
        out << "plane=" << fmt(plane.n0, 9) << ',' << fmt(plane.n1, 9) << ',' << fmt(plane.n2, 9) << ','
            << fmt(plane.n3, 9) << '\n';
        print_stats(out, "plane_distance", summarize(point_plane_distances(cloud, plane)));
    }
    save_ply(o.out, cloud);
    return kOk;
}

// -------------------------------------------------------------------- synth

struct SynthOptions {
    std::string scene;
    std::string out_dir = ".";
    std::optional<int> seed;
    std::optional<double> noise_sigma;
    unsigned threads = 0;
};

int cmd_synth(const SynthOptions& o, std::ostream& out)
{
    SceneSpec spec;
    try {
        KeyValueFile kv;
        if (!o.scene.empty())
            kv = KeyValueFile::load(o.scene);
        spec = SceneSpec::from_config(kv);
        if (o.seed)
            spec.seed = static_cast<std::uint64_t>(*o.seed);
        if (o.noise_sigma)
            spec.noise_sigma = *o.noise_sigma;
        spec.validate();
    } catch (const IoError&) {
        throw;
    } catch (const SceneError&) {
        throw;
    } catch (const Error& e) {
        throw UsageError(std::string("scene: ") + e.what());
    }

    const SyntheticPair pair = render_pair(spec, o.threads);
    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    save_pgm(dir / "left.pgm", pair.left);
    save_pgm(dir / "right.pgm", pair.right);
    save_pfm(dir / "gt.pfm", pair.gt_disparity);
    save_pgm(dir / "occlusion.pgm", pair.occlusion);
    GrayImage labels(pair.surface.width(), pair.surface.height());
    for (int v = 0; v < labels.height(); ++v)
        for (int u = 0; u < labels.width(); ++u)
            labels(u, v) = static_cast<std::uint8_t>(pair.surface(u, v) * 80);
    save_pgm(dir / "surface.pgm", labels);
    {
        KeyValueFile kv;
        spec.to_config(kv);
        std::ofstream sf(dir / "scene.cfg");
        if (!sf)
            throw IoError("cannot write '" + (dir / "scene.cfg").string() + "'");
        kv.write(sf);
    }

    const auto alpha = alpha_from_rig(spec.rig);
    out << "alpha0=" << fmt(alpha.alpha0, 9) << "\nalpha1=" << fmt(alpha.alpha1, 9) << '\n';
    for (std::size_t i = 0; i < spec.boxes.size(); ++i) {
        const PixelRect r = surface_bounds(pair, Surface::box_top, static_cast<int>(i));
        out << "box" << i << "_top_roi=" << r.x << ',' << r.y << ',' << r.width << ',' << r.height << '\n';
    }
    return kOk;
}

// --------------------------------------------------------------------- eval

struct EvalOptions {
    std::string disparity;
    std::string gt;
    std::string occlusion;
    int border = 0;
};

int cmd_eval(const EvalOptions& o, std::ostream& out)
{
    if (o.border < 0)
        throw UsageError("--border must be non-negative");
    const DisparityMap est = load_pfm(o.disparity);
    const DisparityMap gt = load_pfm(o.gt);
    if (!est.same_shape(gt))
        throw DataError("disparity and ground truth differ in size");
    std::optional<GrayImage> occ;
    if (!o.occlusion.empty()) {
        occ = load_pgm(o.occlusion);
        if (!occ->same_shape(gt))
            throw DataError("occlusion mask and ground truth differ in size");
    }

    const double thresholds[] = {0.25, 0.5, 1.0};
    std::size_t evaluated = 0;
    std::size_t matched = 0;
    std::size_t bad[3] = {};
    double sq = 0.0;
    double abs_sum = 0.0;
    for (int v = o.border; v < gt.height() - o.border; ++v)
        for (int u = o.border; u < gt.width() - o.border; ++u) {
            if (!gt.valid(u, v) || (occ && (*occ)(u, v) != 0))
                continue;
            ++evaluated;
            if (!est.valid(u, v))
                continue;
            ++matched;
            const double e = est(u, v) - gt(u, v);
            sq += e * e;
            abs_sum += std::abs(e);
            for (int k = 0; k < 3; ++k)
                if (std::abs(e) > thresholds[k])
                    ++bad[k];
        }
    if (matched == 0)
        throw DataError("no pixel is valid in both the estimate and the ground truth");
    const double m = static_cast<double>(matched);
    out << "evaluated=" << evaluated << '\n'
        << "coverage=" << fmt(m / static_cast<double>(evaluated)) << '\n'
        << "rms=" << fmt(std::sqrt(sq / m)) << '\n'
        << "mae=" << fmt(abs_sum / m) << '\n'
        << "bad_0.25=" << fmt(bad[0] / m) << '\n'
        << "bad_0.5=" << fmt(bad[1] / m) << '\n'
        << "bad_1.0=" << fmt(bad[2] / m) << '\n';
    return kOk;
}

// -------------------------------------------------------------------- bench

struct BenchOptions {
    std::string scene;
    std::string left;
    std::string right;
    std::string model;
    std::string rho_blocks = "1,2,3,4,5";
    std::string rho_aggs = "0,1,2,3,4,5";
    int repeats = 1;
    std::string out = "bench.csv";
    ConfigOptions config;
};

SceneSpec default_bench_scene()
{
    SceneSpec s;
    s.width = 320;
    s.height = 240;
    s.rig = {350.0, 159.5, 119.5, 0.12, 1.27, -1.0, 1.0};
    s.noise_sigma = 1.0;
    s.seed = 11;
    return s;
}

int cmd_bench(const BenchOptions& o, std::ostream& out)
{
    const PipelineConfig base = o.config.resolve();
    if (o.config.print) {
        base.to_config().write(out);
        return kOk;
    }
    const auto rho_blocks = parse_int_list(o.rho_blocks, "--rho-block-values");
    const auto rho_aggs = parse_int_list(o.rho_aggs, "--rho-agg-values");
    if (o.repeats < 1)
        throw UsageError("--repeats must be at least 1");
    for (int rb : rho_blocks)
        if (rb < 1)
            throw UsageError("--rho-block-values: values must be at least 1");
    for (int ra : rho_aggs)
        if (ra < 0)
            throw UsageError("--rho-agg-values: values must be non-negative");
    if (!o.scene.empty() && !o.left.empty())
        throw UsageError("bench: give either --scene or --left/--right");
    if (o.left.empty() != o.right.empty())
        throw UsageError("bench: --left and --right go together");

    GrayImage left;
    GrayImage right;
    if (!o.left.empty()) {
        left = load_pgm(o.left);
        right = load_pgm(o.right);
        if (!left.same_shape(right))
            throw DataError("left and right images differ in size");
    } else {
        SceneSpec spec = default_bench_scene();
        if (!o.scene.empty()) {
            try {
                spec = SceneSpec::from_config(KeyValueFile::load(o.scene));
            } catch (const FormatError& e) {
                throw UsageError(e.what());
            }
        }
        const SyntheticPair pair = render_pair(spec, base.threads);
        left = pair.left;
        right = pair.right;
    }
    const RoadModel model =
        !o.model.empty() ? load_road_model(o.model) : estimate_road_model(left, right, nullptr, base);

    struct Setting {
        int rho_block;
        int rho_agg;
        double best = std::numeric_limits<double>::infinity();
        std::uint64_t digest = 0;
        std::size_t valid = 0;
    };
    std::vector<Setting> settings;
    for (int rb : rho_blocks)
        for (int ra : rho_aggs)
            settings.push_back({rb, ra});
    // Repeats are interleaved across settings so that a slow spell on a shared
    // machine hits every setting rather than a single one.
    for (int rep = 0; rep < o.repeats; ++rep)
        for (auto& st : settings) {
            PipelineConfig cfg = base;
            cfg.rho_block = st.rho_block;
            cfg.bilateral.rho_agg = st.rho_agg;
            const MatchResult res = match_pair(left, right, model, cfg);
            st.best = std::min(st.best, res.matching_seconds);
            st.digest = fnv1a(res.disparity);
            st.valid = res.disparity.valid_count();
        }

    std::ostringstream csv;
    csv << "rho_block,rho_agg,seconds,mde_per_s\n";
    for (const auto& st : settings) {
        PipelineConfig cfg = base;
        cfg.rho_block = st.rho_block;
        const double mde = mde_per_second(left.width(), left.height(), cfg.ncc().d_max, st.best);
        csv << st.rho_block << ',' << st.rho_agg << ',' << fmt(st.best) << ',' << fmt(mde, 4) << '\n';
        char hex[32];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(st.digest));
        out << "rho_block=" << st.rho_block << " rho_agg=" << st.rho_agg << " seconds=" << fmt(st.best)
            << " mde_per_s=" << fmt(mde, 3) << " valid=" << st.valid << " digest=" << hex << '\n';
    }
    std::ofstream f(o.out);
    if (!f)
        throw IoError("cannot open '" + o.out + "' for writing");
    f << csv.str();
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Road-surface stereo reconstruction toolkit"};
    app.require_subcommand(1);
    unsigned synth_threads = 0;

    TransformOptions t;
    auto* transform = app.add_subcommand("transform", "estimate the road model and warp the target image");
    transform->add_option("--left", t.left, "reference image (PGM)");
    transform->add_option("--right", t.right, "target image (PGM)");
    transform->add_option("--matches", t.matches, "correspondence CSV (ul,vl,ur,vr); default: built-in matcher");
    transform->add_option("--out-model", t.out_model, "road model output")->capture_default_str();
    transform->add_option("--out-warped", t.out_warped, "warped target output (PGM)")->capture_default_str();
    transform->add_option("--out-matches", t.out_matches, "write the correspondences used");
    transform->add_option("--roll-disparity", t.roll_disparity, "disparity PFM for the near-field roll estimate");
    t.config.attach(transform);

    MatchOptions m;
    auto* match = app.add_subcommand("match", "dense disparity estimation");
    match->add_option("--left", m.left, "reference image (PGM)");
    match->add_option("--right", m.right, "target image (PGM), unwarped");
    match->add_option("--model", m.model, "road model from 'transform'");
    match->add_flag("--identity", m.identity, "use the zero-shift model");
    match->add_option("--out", m.out, "disparity output (PFM)")->capture_default_str();
    match->add_option("--vis", m.vis, "8-bit visualisation output (PGM)");
    match->add_option("--dump-costs", m.dump_costs, "prefix for raw and aggregated cost volume dumps");
    m.config.attach(match);

    ReconstructOptions r;
    auto* reconstruct = app.add_subcommand("reconstruct", "triangulate a disparity map and measure against a plane");
    reconstruct->add_option("--disparity", r.disparity, "disparity map (PFM)");
    reconstruct->add_option("--rig", r.rig, "rig key=value file");
    reconstruct->add_option("--roi", r.roi, "measured region u0,v0,w,h");
    reconstruct->add_option("--guard", r.guard, "pixels around the roi excluded from the plane fit")
        ->capture_default_str();
    reconstruct->add_flag("--corners", r.corners, "fit the plane through the four corners of the grown roi");
    reconstruct->add_option("--out", r.out, "point cloud output (PLY)")->capture_default_str();
    r.config.attach(reconstruct);

    SynthOptions s;
    auto* synth = app.add_subcommand("synth", "render a synthetic stereo pair with ground truth");
    synth->add_option("--scene", s.scene, "scene key=value file");
    synth->add_option("--out-dir", s.out_dir, "output directory")->capture_default_str();
    synth->add_option("--seed", s.seed, "texture and noise seed");
    synth->add_option("--noise-sigma", s.noise_sigma, "additive intensity noise");
    synth->add_option("--threads", synth_threads, "worker threads (0 = hardware)");

    EvalOptions e;
    auto* eval = app.add_subcommand("eval", "compare a disparity map against ground truth");
    eval->add_option("--disparity", e.disparity, "estimated disparity (PFM)")->required();
    eval->add_option("--gt", e.gt, "ground-truth disparity (PFM)")->required();
    eval->add_option("--occlusion", e.occlusion, "occlusion mask (PGM, nonzero = occluded)");
    eval->add_option("--border", e.border, "ignore this many border pixels")->capture_default_str();

    BenchOptions b;
    auto* bench = app.add_subcommand("bench", "runtime sweep over block and aggregation radii");
    bench->add_option("--scene", b.scene, "scene key=value file (default: built-in 320x240 scene)");
    bench->add_option("--left", b.left, "reference image (PGM)");
    bench->add_option("--right", b.right, "target image (PGM)");
    bench->add_option("--model", b.model, "road model (default: estimated)");
    bench->add_option("--rho-block-values", b.rho_blocks, "comma-separated block radii")->capture_default_str();
    bench->add_option("--rho-agg-values", b.rho_aggs, "comma-separated aggregation radii")->capture_default_str();
    bench->add_option("--repeats", b.repeats, "runs per setting; the fastest is reported")->capture_default_str();
    bench->add_option("--out", b.out, "CSV output")->capture_default_str();
    b.config.attach(bench);

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args)
        argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& pe) {
        err << "error: " << pe.what() << '\n';
        return kUsage;
    }

    try {
        if (*transform)
            return cmd_transform(t, out);
        if (*match)
            return cmd_match(m, out);
        if (*reconstruct)
            return cmd_reconstruct(r, out);
        if (*synth) {
            s.threads = synth_threads;
            return cmd_synth(s, out);
        }
        if (*eval)
            return cmd_eval(e, out);
        if (*bench)
            return cmd_bench(b, out);
    } catch (const UsageError& ex) {
        err << "error: " << ex.what() << '\n';
        return kUsage;
    } catch (const IoError& ex) {
        err << "error: " << ex.what() << '\n';
        return kUsage;
    } catch (const ParameterError& ex) {
        err << "error: " << ex.what() << '\n';
        return kUsage;
    } catch (const DataError& ex) {
        err << "error: " << ex.what() << '\n';
        return kData;
    } catch (const Error& ex) {
        err << "error: " << ex.what() << '\n';
        return kData;
    } catch (const std::exception& ex) {
        err << "internal error: " << ex.what() << '\n';
        return kInternal;
    }
    return kInternal;
}

}  // namespace roadstereo::cli
