#include "screject/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "screject/error.hpp"

namespace screject {

namespace {

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;
    long count = 0;
};

Moments moments(std::span<const double> values) {
    Moments m;
    m.count = static_cast<long>(values.size());
    if (m.count == 0) {
        return m;
    }
    for (double v : values) {
        m.mean += v;
    }
    m.mean /= static_cast<double>(m.count);
    double sq = 0.0;
    for (double v : values) {
        sq += (v - m.mean) * (v - m.mean);
    }
    m.stddev = std::sqrt(sq / static_cast<double>(m.count));
    return m;
}

void require_aux(std::span<const ScoredPrediction> preds) {
    if (preds.empty()) {
        throw InvalidInput("analysis needs at least one prediction");
    }
    for (const auto& p : preds) {
        if (!p.aux) {
            throw InvalidInput("analysis needs aux fields (v_max, pi_max) on every prediction");
        }
    }
}

// Window centers as multiples of `step` covering [lo, hi].
std::vector<double> center_grid(double lo, double hi, double step) {
    std::vector<double> centers;
    const long first = static_cast<long>(std::floor(lo / step));
    const long last = static_cast<long>(std::ceil(hi / step));
    for (long j = first; j <= last; ++j) {
        centers.push_back(static_cast<double>(j) * step);
    }
    return centers;
}

std::vector<WindowPoint> window_stats(std::span<const std::pair<double, double>> xy,
                                      std::span<const double> centers, double window,
                                      long min_count) {
    std::vector<WindowPoint> out;
    for (double c : centers) {
        std::vector<double> values;
        for (const auto& [x, y] : xy) {
            if (x >= c - window / 2 && x <= c + window / 2) {
                values.push_back(y);
            }
        }
        if (static_cast<long>(values.size()) < min_count) {
            continue;
        }
        const auto m = moments(values);
        out.push_back({c, m.mean, m.stddev, m.count});
    }
    return out;
}

}  // namespace

WindowedStats conditional_vmax_stats(std::span<const ScoredPrediction> preds, double window,
                                     double step, long min_count) {
    require_aux(preds);
    if (!(window > 0.0) || !(step > 0.0) || min_count < 1) {
        throw InvalidInput("window and step must be positive, min_count >= 1");
    }
    std::vector<std::pair<double, double>> correct;
    std::vector<std::pair<double, double>> incorrect;
    double lo = preds.front().aux->pi_max;
    double hi = lo;
    for (const auto& p : preds) {
        lo = std::min(lo, p.aux->pi_max);
        hi = std::max(hi, p.aux->pi_max);
        (p.correct ? correct : incorrect).push_back({p.aux->pi_max, p.aux->v_max});
    }
    const auto centers = center_grid(lo, hi, step);
    return {window_stats(correct, centers, window, min_count),
            window_stats(incorrect, centers, window, min_count)};
}

std::vector<BinStats> conditional_vprime_stats(std::span<const ScoredPrediction> preds,
                                               std::span<const std::pair<double, double>> msp_bins,
                                               double window, double clip_sigmas) {
    require_aux(preds);
    if (!(window > 0.0) || !(clip_sigmas > 0.0)) {
        throw InvalidInput("window and clip_sigmas must be positive");
    }
    for (const auto& bin : msp_bins) {
        if (!(bin.first < bin.second)) {
            throw InvalidInput("msp bin must satisfy lo < hi");
        }
    }
    std::vector<BinStats> out;
    for (const auto& bin : msp_bins) {
        BinStats stats;
        stats.msp_bin = bin;
        std::vector<const ScoredPrediction*> members;
        std::vector<double> vmax;
        for (const auto& p : preds) {
            if (p.aux->pi_max >= bin.first && p.aux->pi_max < bin.second) {
                members.push_back(&p);
                vmax.push_back(p.aux->v_max);
            }
        }
        if (members.empty()) {
            out.push_back(std::move(stats));
            continue;
        }
        const auto m = moments(vmax);
        std::vector<std::pair<double, double>> xy;
        double lo = 0.0;
        double hi = 0.0;
        bool have = false;
        for (const auto* p : members) {
            if (std::abs(p->aux->v_max - m.mean) > clip_sigmas * m.stddev) {
                ++stats.clipped;
                continue;
            }
            if (!have) {
                lo = hi = p->aux->v_max;
                have = true;
            }
            lo = std::min(lo, p->aux->v_max);
            hi = std::max(hi, p->aux->v_max);
            xy.push_back({p->aux->v_max, p->aux->vprime_max});
        }
        if (have) {
            const auto centers = center_grid(lo, hi, window / 5);
            stats.points = window_stats(xy, centers, window, 1);
        }
        out.push_back(std::move(stats));
    }
    return out;
}

std::vector<RankProfile> sorted_logit_profile(std::span<const LogitRecord> records, double p) {
    if (records.empty()) {
        throw InvalidInput("profile needs at least one record");
    }
    const std::size_t k = records.front().logits.size();
    std::vector<std::vector<double>> v(k), vp(k), ev(k);
    for (const auto& rec : records) {
        if (rec.logits.size() != k) {
            throw InvalidInput("inconsistent K across records");
        }
        std::vector<double> sorted(rec.logits);
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        for (std::size_t r = 0; r < k; ++r) {
            const double x = sorted[r];
            v[r].push_back(x);
            vp[r].push_back(std::copysign(std::pow(std::abs(x), p), x));
            ev[r].push_back(std::exp(x));
        }
    }
    std::vector<RankProfile> out(k);
    for (std::size_t r = 0; r < k; ++r) {
        const auto mv = moments(v[r]);
        const auto mvp = moments(vp[r]);
        const auto mev = moments(ev[r]);
        out[r] = {mv.mean, mv.stddev, mvp.mean, mvp.stddev, mev.mean, mev.stddev};
    }
    return out;
}

}  // namespace screject
