#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace screject {

/// One sample ready for selective evaluation: its uncertainty, whether
/// the underlying prediction was correct, and optional auxiliary values
/// used by the conditional-statistics analyses.
struct ScoredPrediction {
    double uncertainty = 0.0;
    bool correct = false;
    long sample_id = 0;
    std::string source_tag;  // empty = in-distribution

    struct Aux {
        double v_max = 0.0;
        double pi_max = 0.0;
        double vprime_max = 0.0;
    };
    std::optional<Aux> aux;
};

struct RCPoint {
    double coverage = 0.0;
    double risk = 0.0;
    double threshold = 0.0;
};

/// Risk-coverage curve: one point per distinct uncertainty value, with
/// coverage strictly increasing and the last point at coverage 1.
struct RCCurve {
    std::vector<RCPoint> points;
};

/// Rejection rule: accept iff U <= tau.
bool accept(double uncertainty, double tau);

/// Sweeps the threshold over all distinct uncertainty values. Samples
/// sharing an uncertainty value are accepted atomically.
RCCurve rc_curve(std::span<const ScoredPrediction> preds);

/// Mean selective risk over the per-sample coverage levels n/N; within
/// a tie block every sample takes the block risk.
double aurc(const RCCurve& curve, long n_total);

/// Maximum coverage among curve points with risk <= target_risk,
/// 0 if no point qualifies.
double coverage_at_risk(const RCCurve& curve, double target_risk);

/// Risk at the smallest curve coverage >= target_cov.
double risk_at_coverage(const RCCurve& curve, double target_cov);

/// Threshold achieving coverage_at_risk on the validation curve;
/// -inf (reject everything) when no operating point qualifies.
double select_threshold(std::span<const ScoredPrediction> val_preds, double target_risk);

struct SourceStats {
    long count = 0;
    long errors = 0;
    double error_rate = 0.0;
};

/// Pools both sets, accepts the lowest-uncertainty fraction `coverage`
/// (ties accepted atomically), and reports accepted counts, errors and
/// error rates per source tag.
std::map<std::string, SourceStats> shift_mix_report(std::span<const ScoredPrediction> preds_id,
                                                    std::span<const ScoredPrediction> preds_shift,
                                                    double coverage);

}  // namespace screject
