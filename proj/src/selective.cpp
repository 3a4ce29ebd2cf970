#include "screject/selective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "screject/error.hpp"

namespace screject {

namespace {

// Canonical order: uncertainty ascending, sample_id breaking ties.
std::vector<ScoredPrediction> sorted_by_uncertainty(std::span<const ScoredPrediction> preds) {
    std::vector<ScoredPrediction> out(preds.begin(), preds.end());
    std::sort(out.begin(), out.end(), [](const ScoredPrediction& a, const ScoredPrediction& b) {
        if (a.uncertainty != b.uncertainty) {
            return a.uncertainty < b.uncertainty;
        }
        return a.sample_id < b.sample_id;
    });
    return out;
}

void check_finite(std::span<const ScoredPrediction> preds) {
    for (const auto& p : preds) {
        if (!std::isfinite(p.uncertainty)) {
            throw InvalidInput("uncertainty score is not finite");
        }
    }
}

}  // namespace

bool accept(double uncertainty, double tau) {
    return uncertainty <= tau;
}

RCCurve rc_curve(std::span<const ScoredPrediction> preds) {
    if (preds.empty()) {
        throw InvalidInput("rc_curve needs at least one prediction");
    }
    check_finite(preds);
    const auto sorted = sorted_by_uncertainty(preds);
    const double n = static_cast<double>(sorted.size());

    RCCurve curve;
    long accepted = 0;
    long errors = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        const double u = sorted[i].uncertainty;
        // Consume the whole tie block at threshold u.
        while (i < sorted.size() && sorted[i].uncertainty == u) {
            ++accepted;
            if (!sorted[i].correct) {
                ++errors;
            }
            ++i;
        }
        curve.points.push_back({static_cast<double>(accepted) / n,
                                static_cast<double>(errors) / static_cast<double>(accepted), u});
    }
    return curve;
}

double aurc(const RCCurve& curve, long n_total) {
    if (curve.points.empty() || n_total <= 0) {
        throw InvalidInput("aurc needs a nonempty curve and positive sample count");
    }
    double sum = 0.0;
    long prev_accepted = 0;
    for (const auto& pt : curve.points) {
        const long accepted = std::lround(pt.coverage * static_cast<double>(n_total));
        sum += static_cast<double>(accepted - prev_accepted) * pt.risk;
        prev_accepted = accepted;
    }
    return sum / static_cast<double>(n_total);
}

double coverage_at_risk(const RCCurve& curve, double target_risk) {
    if (target_risk < 0.0 || target_risk > 1.0) {
        throw InvalidInput("target risk must be in [0, 1]");
    }
    double best = 0.0;
    for (const auto& pt : curve.points) {
        if (pt.risk <= target_risk && pt.coverage > best) {
            best = pt.coverage;
        }
    }
    return best;
}

double risk_at_coverage(const RCCurve& curve, double target_cov) {
    if (!(target_cov > 0.0) || target_cov > 1.0) {
        throw InvalidInput("target coverage must be in (0, 1]");
    }
    for (const auto& pt : curve.points) {
        if (pt.coverage >= target_cov - 1e-12) {
            return pt.risk;
        }
    }
    return curve.points.back().risk;
}

double select_threshold(std::span<const ScoredPrediction> val_preds, double target_risk) {
    const auto curve = rc_curve(val_preds);
    double best_cov = -1.0;
    double tau = -std::numeric_limits<double>::infinity();
    for (const auto& pt : curve.points) {
        if (pt.risk <= target_risk && pt.coverage > best_cov) {
            best_cov = pt.coverage;
            tau = pt.threshold;
        }
    }
    return tau;
}

std::map<std::string, SourceStats> shift_mix_report(std::span<const ScoredPrediction> preds_id,
                                                    std::span<const ScoredPrediction> preds_shift,
                                                    double coverage) {
    if (preds_id.empty() || preds_shift.empty()) {
        throw InvalidInput("shift_mix_report needs two nonempty sets");
    }
    if (!(coverage > 0.0) || coverage > 1.0) {
        throw InvalidInput("coverage must be in (0, 1]");
    }
    std::vector<ScoredPrediction> pooled(preds_id.begin(), preds_id.end());
    for (const auto& p : preds_shift) {
        pooled.push_back(p);
        if (pooled.back().source_tag.empty()) {
            pooled.back().source_tag = "shift";
        }
    }
    check_finite(pooled);
    const auto sorted = sorted_by_uncertainty(pooled);

    const long n = static_cast<long>(sorted.size());
    long target = static_cast<long>(std::floor(coverage * static_cast<double>(n) + 1e-9));
    target = std::max<long>(1, std::min(target, n));
    // Extend through the tie block at the cut threshold.
    const double tau = sorted[static_cast<std::size_t>(target - 1)].uncertainty;
    std::map<std::string, SourceStats> report;
    for (const auto& p : sorted) {
        if (!accept(p.uncertainty, tau)) {
            break;
        }
        auto& stats = report[p.source_tag.empty() ? "id" : p.source_tag];
        ++stats.count;
        if (!p.correct) {
            ++stats.errors;
        }
    }
    for (auto& [tag, stats] : report) {
        stats.error_rate =
            stats.count > 0 ? static_cast<double>(stats.errors) / static_cast<double>(stats.count) : 0.0;
    }
    return report;
}

}  // namespace screject
