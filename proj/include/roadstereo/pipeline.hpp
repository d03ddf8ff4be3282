#pragma once

#include <optional>
#include <string>
#include <vector>

#include "roadstereo/aggregate.hpp"
#include "roadstereo/costs.hpp"
#include "roadstereo/image.hpp"
#include "roadstereo/sparse_match.hpp"
#include "roadstereo/transform.hpp"

namespace roadstereo {

class KeyValueFile;

/// Every tunable of the transform / match / reconstruct stages.
struct PipelineConfig {
    int rho_block = 3;
    int d_max = 0;  ///< 0 = 2 * delta_margin
    BilateralParams bilateral{};
    double lr_tol = 0.0;
    RansacParams ransac{};
    double delta_margin = 10.0;
    SparseMatchParams sparse{};
    double d_min = 1.0;
    unsigned threads = 0;

    NccParams ncc() const;
    void validate() const;

    /// Unknown keys are rejected with a FormatError.
    void apply(const KeyValueFile& kv);
    KeyValueFile to_config() const;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct MatchResult {
    DisparityMap disparity;      ///< post-processed, in unwarped coordinates
    DisparityMap refined;        ///< subpixel map in warped coordinates
    DisparityMap reference_wta;  ///< integer WTA maps before the LR check
    DisparityMap target_wta;
    GrayImage warped;
    Mask warp_valid;
    std::vector<StageTiming> timings;
    double matching_seconds = 0.0;  ///< costs through subpixel refinement
    std::optional<CostVolumes> raw_costs;
    std::optional<CostVolumes> aggregated_costs;

    double stage_seconds(const std::string& stage) const;
};

/// warp -> costs -> aggregate -> WTA -> LR -> subpixel -> postprocess.
MatchResult match_pair(const GrayImage& left, const GrayImage& right, const RoadModel& model,
                       const PipelineConfig& config, bool keep_volumes = false);

/// RANSAC road model from the given correspondences, or from the built-in
/// sparse matcher when none are given.
RoadModel estimate_road_model(const GrayImage& left, const GrayImage& right,
                              const std::vector<Correspondence>* matches, const PipelineConfig& config,
                              std::vector<Correspondence>* used = nullptr);

}  // namespace roadstereo
