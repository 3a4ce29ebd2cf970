#pragma once

#include <span>
#include <utility>
#include <vector>

#include "screject/data.hpp"
#include "screject/selective.hpp"

namespace screject {

struct WindowPoint {
    double center = 0.0;
    double mean = 0.0;
    double stddev = 0.0;  // population std
    long count = 0;
};

/// Sliding-window statistics split by prediction correctness.
struct WindowedStats {
    std::vector<WindowPoint> correct;
    std::vector<WindowPoint> incorrect;
};

/// Mean and population std of v_max in sliding windows over pi_max,
/// separately for correct and incorrect predictions. Centers with
/// fewer than min_count samples in a group are omitted for that group.
WindowedStats conditional_vmax_stats(std::span<const ScoredPrediction> preds, double window,
                                     double step, long min_count);

struct BinStats {
    std::pair<double, double> msp_bin;  // [lo, hi)
    std::vector<WindowPoint> points;    // v'_max given v_max, both groups pooled
    long clipped = 0;                   // samples removed by the sigma clip
};

/// Within each MSP bin, restricts to samples whose v_max lies within
/// mean +- clip_sigmas * std of the bin's v_max distribution, then
/// takes sliding-window mean +- std of v'_max as a function of v_max.
std::vector<BinStats> conditional_vprime_stats(std::span<const ScoredPrediction> preds,
                                               std::span<const std::pair<double, double>> msp_bins,
                                               double window, double clip_sigmas);

struct RankProfile {
    double mean_v = 0.0, std_v = 0.0;
    double mean_vp = 0.0, std_vp = 0.0;    // sign-preserving |v|^p * sign(v)
    double mean_exp = 0.0, std_exp = 0.0;  // exp(v)
};

/// Per-rank statistics after sorting each logit vector descending.
std::vector<RankProfile> sorted_logit_profile(std::span<const LogitRecord> records, double p);

}  // namespace screject
