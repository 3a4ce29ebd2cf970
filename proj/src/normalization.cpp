#include "screject/normalization.hpp"

#include <algorithm>
#include <cmath>

#include "screject/error.hpp"
#include "screject/scores.hpp"
#include "screject/selective.hpp"

namespace screject {

namespace {

double p_norm(std::span<const double> v, double p) {
    // Scaled by the max absolute value so large p does not overflow.
    double amax = 0.0;
    for (double x : v) {
        amax = std::max(amax, std::abs(x));
    }
    if (amax == 0.0) {
        return 0.0;
    }
    double sum = 0.0;
    for (double x : v) {
        sum += std::pow(std::abs(x) / amax, p);
    }
    return amax * std::pow(sum, 1.0 / p);
}

}  // namespace

void NormConfig::validate() const {
    if (!(p >= 1.0)) {
        throw InvalidInput("norm order p must be >= 1");
    }
    if (p_grid.empty()) {
        throw InvalidInput("p grid must be nonempty");
    }
    if (!std::is_sorted(p_grid.begin(), p_grid.end())) {
        throw InvalidInput("p grid must be sorted ascending");
    }
    for (double q : p_grid) {
        if (!(q >= 1.0)) {
            throw InvalidInput("every grid p must be >= 1");
        }
    }
}

std::vector<double> normalise_logits(std::span<const double> v, const NormConfig& cfg) {
    cfg.validate();
    check_logits(v);
    std::vector<double> shifted(v.begin(), v.end());
    if (cfg.shift_mode == ShiftMode::MeanCentralise) {
        double mean = 0.0;
        for (double x : shifted) {
            mean += x;
        }
        mean /= static_cast<double>(shifted.size());
        for (double& x : shifted) {
            x -= mean;
        }
    }
    const double norm = p_norm(shifted, cfg.p);
    if (norm == 0.0) {
        throw InvalidInput("logit vector is zero after shift; normalisation is degenerate");
    }
    for (double& x : shifted) {
        x /= norm;
    }
    return shifted;
}

double score_maxlogit_norm(std::span<const double> v, const NormConfig& cfg) {
    const auto vprime = normalise_logits(v, cfg);
    return -*std::max_element(vprime.begin(), vprime.end());
}

bool check_result1(std::span<const double> v, double eta, double p) {
    check_logits(v);
    bool distinct = false;
    for (double x : v) {
        if (!(x > 0.0)) {
            throw InvalidInput("theorem hypothesis: all logits must be strictly positive");
        }
        if (x != v[0]) {
            distinct = true;
        }
    }
    if (!distinct) {
        throw InvalidInput("theorem hypothesis: at least two distinct values required");
    }
    if (!(eta > 0.0)) {
        throw InvalidInput("theorem hypothesis: eta must be strictly positive");
    }
    if (!(p >= 1.0)) {
        throw InvalidInput("theorem hypothesis: p must be >= 1");
    }
    std::vector<double> shifted(v.begin(), v.end());
    for (double& x : shifted) {
        x += eta;
    }
    const double lhs = *std::max_element(v.begin(), v.end()) / p_norm(v, p);
    const double rhs = *std::max_element(shifted.begin(), shifted.end()) / p_norm(shifted, p);
    return lhs > rhs;
}

PSearchResult search_p(std::span<const LogitRecord> val_records, const NormConfig& cfg) {
    cfg.validate();
    if (val_records.empty()) {
        throw InvalidInput("p search needs a nonempty validation set");
    }
    PSearchResult best;
    bool first = true;
    for (double p : cfg.p_grid) {
        NormConfig candidate = cfg;
        candidate.p = p;
        std::vector<ScoredPrediction> preds;
        preds.reserve(val_records.size());
        long id = 0;
        for (const auto& rec : val_records) {
            const auto pred = std::distance(
                rec.logits.begin(), std::max_element(rec.logits.begin(), rec.logits.end()));
            preds.push_back({score_maxlogit_norm(rec.logits, candidate),
                             static_cast<int>(pred) == rec.label, id++, rec.source_tag, {}});
        }
        const double a = aurc(rc_curve(preds), static_cast<long>(preds.size()));
        if (first || a < best.aurc) {
            best = {p, a};
            first = false;
        }
    }
    return best;
}

}  // namespace screject
