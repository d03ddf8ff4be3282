#include "roadstereo/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "roadstereo/disparity.hpp"
#include "roadstereo/keyvalue.hpp"

namespace roadstereo {
namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
auto timed(std::vector<StageTiming>& log, const char* stage, Fn&& fn)
{
    const auto start = Clock::now();
    auto result = fn();
    log.push_back({stage, std::chrono::duration<double>(Clock::now() - start).count()});
    return result;
}

std::string num(double v)
{
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

NccParams PipelineConfig::ncc() const
{
    const int d = d_max > 0 ? d_max : std::max(1, static_cast<int>(std::ceil(2.0 * delta_margin)));
    return {rho_block, d};
}

void PipelineConfig::validate() const
{
    if (d_max < 0)
        throw ParameterError("d_max must be positive (0 selects 2 * delta_margin)");
    ncc().validate();
    bilateral.validate();
    ransac.validate();
    sparse.validate();
    if (!(lr_tol >= 0.0))
        throw ParameterError("lr_tol must be non-negative");
    if (!(delta_margin >= 0.0))
        throw ParameterError("delta_margin must be non-negative");
    if (!(d_min > 0.0))
        throw ParameterError("d_min must be positive");
}

void PipelineConfig::apply(const KeyValueFile& kv)
{
    const std::map<std::string, std::function<void(const std::string&)>> setters{
        {"rho_block", [&](const std::string& s) { rho_block = parse_int(s, "rho_block"); }},
        {"d_max", [&](const std::string& s) { d_max = parse_int(s, "d_max"); }},
        {"rho_agg", [&](const std::string& s) { bilateral.rho_agg = parse_int(s, "rho_agg"); }},
        {"gamma_d", [&](const std::string& s) { bilateral.gamma_d = parse_double(s, "gamma_d"); }},
        {"gamma_r", [&](const std::string& s) { bilateral.gamma_r = parse_double(s, "gamma_r"); }},
        {"lr_tol", [&](const std::string& s) { lr_tol = parse_double(s, "lr_tol"); }},
        {"delta_margin", [&](const std::string& s) { delta_margin = parse_double(s, "delta_margin"); }},
        {"ransac_threshold", [&](const std::string& s) { ransac.inlier_threshold = parse_double(s, "ransac_threshold"); }},
        {"ransac_iterations", [&](const std::string& s) { ransac.iterations = parse_int(s, "ransac_iterations"); }},
        {"ransac_min_consensus",
         [&](const std::string& s) { ransac.min_consensus_fraction = parse_double(s, "ransac_min_consensus"); }},
        {"seed", [&](const std::string& s) { ransac.seed = static_cast<std::uint64_t>(parse_int(s, "seed")); }},
        {"sparse_half_window", [&](const std::string& s) { sparse.half_window = parse_int(s, "sparse_half_window"); }},
        {"sparse_grid", [&](const std::string& s) { sparse.grid_step = parse_int(s, "sparse_grid"); }},
        {"sparse_min_peak", [&](const std::string& s) { sparse.min_peak = parse_double(s, "sparse_min_peak"); }},
        {"sparse_max_disparity",
         [&](const std::string& s) { sparse.max_disparity = parse_int(s, "sparse_max_disparity"); }},
        {"sparse_min_stddev", [&](const std::string& s) { sparse.min_stddev = parse_double(s, "sparse_min_stddev"); }},
        {"d_min", [&](const std::string& s) { d_min = parse_double(s, "d_min"); }},
        {"threads",
         [&](const std::string& s) {
             const int t = parse_int(s, "threads");
             if (t < 0)
                 throw ParameterError("threads must be non-negative");
             threads = static_cast<unsigned>(t);
         }},
    };
    for (const auto& key : kv.keys()) {
        const auto it = setters.find(key);
        if (it == setters.end())
            throw FormatError("unknown config key '" + key + "'");
        it->second(*kv.get(key));
    }
}

KeyValueFile PipelineConfig::to_config() const
{
    KeyValueFile kv;
    kv.set("rho_block", std::to_string(rho_block));
    kv.set("d_max", std::to_string(d_max));
    kv.set("rho_agg", std::to_string(bilateral.rho_agg));
    kv.set("gamma_d", num(bilateral.gamma_d));
    kv.set("gamma_r", num(bilateral.gamma_r));
    kv.set("lr_tol", num(lr_tol));
    kv.set("delta_margin", num(delta_margin));
    kv.set("ransac_threshold", num(ransac.inlier_threshold));
    kv.set("ransac_iterations", std::to_string(ransac.iterations));
    kv.set("ransac_min_consensus", num(ransac.min_consensus_fraction));
    kv.set("seed", std::to_string(ransac.seed));
    kv.set("sparse_half_window", std::to_string(sparse.half_window));
    kv.set("sparse_grid", std::to_string(sparse.grid_step));
    kv.set("sparse_min_peak", num(sparse.min_peak));
    kv.set("sparse_max_disparity", std::to_string(sparse.max_disparity));
    kv.set("sparse_min_stddev", num(sparse.min_stddev));
    kv.set("d_min", num(d_min));
    kv.set("threads", std::to_string(threads));
    return kv;
}

double MatchResult::stage_seconds(const std::string& stage) const
{
    double total = 0.0;
    for (const auto& t : timings)
        if (t.stage == stage)
            total += t.seconds;
    return total;
}

MatchResult match_pair(const GrayImage& left, const GrayImage& right, const RoadModel& model,
                       const PipelineConfig& config, bool keep_volumes)
{
    config.validate();
    if (!left.same_shape(right))
        throw DimensionError("match: left and right images differ in size");
    const NccParams ncc = config.ncc();
    const unsigned threads = config.threads;

    MatchResult res;
    auto warp = timed(res.timings, "warp", [&] { return warp_target(right, model, threads); });
    res.warped = std::move(warp.image);
    res.warp_valid = std::move(warp.valid);

    const auto t0 = Clock::now();
    auto raw = timed(res.timings, "costs",
                     [&] { return compute_cost_volumes(left, res.warped, ncc, &res.warp_valid, threads); });
    CostVolumes agg;
    agg.reference = timed(res.timings, "aggregate",
                          [&] { return aggregate_volume(raw.reference, left, config.bilateral, threads); });
    agg.target = timed(res.timings, "aggregate",
                       [&] { return aggregate_volume(raw.target, res.warped, config.bilateral, threads); });
    if (keep_volumes)
        res.raw_costs = std::move(raw);
    else
        raw = {};

    res.reference_wta = timed(res.timings, "wta", [&] { return wta(agg.reference, threads); });
    res.target_wta = timed(res.timings, "wta", [&] { return wta(agg.target, threads); });
    auto consistent = timed(res.timings, "lr_check",
                            [&] { return lr_consistency(res.reference_wta, res.target_wta, config.lr_tol); });
    res.refined = timed(res.timings, "subpixel", [&] { return subpixel_refine(consistent, agg.reference, threads); });
    res.matching_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    res.disparity = timed(res.timings, "postprocess", [&] { return postprocess(res.refined, model); });
    if (keep_volumes)
        res.aggregated_costs = std::move(agg);
    return res;
}

RoadModel estimate_road_model(const GrayImage& left, const GrayImage& right,
                              const std::vector<Correspondence>* matches, const PipelineConfig& config,
                              std::vector<Correspondence>* used)
{
    config.validate();
    std::vector<Correspondence> found;
    if (!matches) {
        found = sparse_match(left, right, config.sparse, config.threads);
        matches = &found;
    }
    if (used)
        *used = *matches;
    return fit_road_model(*matches, config.ransac, left.height(), config.delta_margin);
}

}  // namespace roadstereo
