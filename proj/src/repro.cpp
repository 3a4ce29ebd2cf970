#include "screject/repro.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "screject/error.hpp"
#include "screject/normalization.hpp"
#include "screject/scores.hpp"

namespace screject {

ReproConfig ReproConfig::defaults() {
    ReproConfig cfg;
    cfg.train_base.epochs = 80;
    cfg.train_base.batch_size = 60;
    cfg.train_base.learning_rate = 0.03;
    cfg.train_base.momentum = 0.9;
    // Width 28 keeps the models capacity-limited: wide nets absorb the
    // smoothing term and converge to the smoothed fixed point, whose ranking
    // matches cross-entropy; the study's effects live in the under-fit gap.
    cfg.train_base.hidden = {28, 28};
    cfg.train_base.weight_decay = 1.2e-4;
    return cfg;
}

ReproConfig ReproConfig::quick_defaults() {
    ReproConfig cfg = defaults();
    cfg.quick = true;
    cfg.seeds = 2;
    cfg.n_train = 4000;
    cfg.n_val = 800;
    cfg.n_eval = 1500;
    cfg.train_base.epochs = 6;
    return cfg;
}

bool ReproResult::all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

unsigned resolve_threads(unsigned requested) {
    unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv("SCREJECT_THREADS")) {
        const long parsed = std::strtol(cap, nullptr, 10);
        if (parsed >= 1) {
            n = std::min<unsigned>(n, static_cast<unsigned>(parsed));
        }
    }
    return n;
}

std::vector<ScoredPrediction> score_records_msp(std::span<const LogitRecord> records,
                                                double norm_p) {
    NormConfig norm;
    norm.p = norm_p;
    std::vector<ScoredPrediction> preds;
    preds.reserve(records.size());
    long id = 0;
    for (const auto& rec : records) {
        const auto pi = softmax(rec.logits);
        const auto pred = std::distance(rec.logits.begin(),
                                        std::max_element(rec.logits.begin(), rec.logits.end()));
        ScoredPrediction p;
        p.uncertainty = score_msp(pi);
        p.correct = static_cast<int>(pred) == rec.label;
        p.sample_id = id++;
        p.source_tag = rec.source_tag;
        p.aux = ScoredPrediction::Aux{rec.logits[static_cast<std::size_t>(pred)], -p.uncertainty,
                                      -score_maxlogit_norm(rec.logits, norm)};
        preds.push_back(std::move(p));
    }
    return preds;
}

namespace {

std::vector<LogitRecord> records_of(const MLPModel& model, std::span<const Sample> samples,
                                    const std::string& tag) {
    std::vector<LogitRecord> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back({forward(model, s.x), s.label, tag});
    }
    return out;
}

ModelEval evaluate_one(const ReproConfig& cfg, int seed_index, double alpha) {
    const std::uint64_t seed_base = cfg.base_seed + 1000ull * static_cast<std::uint64_t>(seed_index);
    auto spec_train = MixtureSpec::ring(cfg.num_classes, cfg.ring_radius, cfg.ring_sigma, seed_base);
    auto spec_val = spec_train;
    spec_val.seed = seed_base + 1;
    auto spec_eval = spec_train;
    spec_eval.seed = seed_base + 2;
    auto spec_shift = shift_spec(spec_train, std::vector<double>{cfg.shift_sigmas * cfg.ring_sigma, 0.0});
    spec_shift.seed = seed_base + 3;

    TrainConfig tc = cfg.train_base;
    tc.alpha = alpha;
    tc.seed = seed_base + 17;  // same init and shuffle across alphas
    const MLPModel model = train(spec_train, cfg.n_train, tc);

    const auto val_samples = sample_dataset(spec_val, cfg.n_val);
    const auto eval_samples = sample_dataset(spec_eval, cfg.n_eval);
    const auto shift_samples = sample_dataset(spec_shift, cfg.n_eval);

    const auto val_records = records_of(model, val_samples, "");
    const auto eval_records = records_of(model, eval_samples, "");
    const auto shift_records = records_of(model, shift_samples, "shift");

    ModelEval eval;
    eval.alpha = alpha;
    eval.seed_index = seed_index;

    NormConfig norm;
    const auto search = search_p(val_records, norm);
    eval.p_chosen = search.p;

    eval.eval_preds_msp = score_records_msp(eval_records, search.p);
    long errors = 0;
    for (const auto& p : eval.eval_preds_msp) {
        if (!p.correct) {
            ++errors;
        }
    }
    eval.error_rate = static_cast<double>(errors) / static_cast<double>(eval.eval_preds_msp.size());
    eval.aurc_msp = aurc(rc_curve(eval.eval_preds_msp), static_cast<long>(eval.eval_preds_msp.size()));

    // aux->vprime_max holds v'_max itself; the score is its negation.
    std::vector<ScoredPrediction> norm_preds = eval.eval_preds_msp;
    for (auto& p : norm_preds) {
        p.uncertainty = -p.aux->vprime_max;
    }
    eval.aurc_norm = aurc(rc_curve(norm_preds), static_cast<long>(norm_preds.size()));

    eval.vmax_stats = conditional_vmax_stats(eval.eval_preds_msp, 0.05, 0.01, 10);

    const auto shift_preds = score_records_msp(shift_records, search.p);
    eval.mix_report = shift_mix_report(eval.eval_preds_msp, shift_preds, cfg.mix_coverage);
    return eval;
}

// Fraction of common window centers where `pred` holds.
double center_fraction(const WindowedStats& stats,
                       const std::function<bool(const WindowPoint&, const WindowPoint&)>& pred) {
    long common = 0;
    long hits = 0;
    for (const auto& c : stats.correct) {
        const auto it = std::find_if(stats.incorrect.begin(), stats.incorrect.end(),
                                     [&](const WindowPoint& w) { return w.center == c.center; });
        if (it == stats.incorrect.end()) {
            continue;
        }
        ++common;
        if (pred(c, *it)) {
            ++hits;
        }
    }
    if (common == 0) {
        return 0.0;
    }
    return static_cast<double>(hits) / static_cast<double>(common);
}

double pooled_std(const WindowPoint& a, const WindowPoint& b) {
    const double na = static_cast<double>(a.count);
    const double nb = static_cast<double>(b.count);
    return std::sqrt((na * a.stddev * a.stddev + nb * b.stddev * b.stddev) / (na + nb));
}

std::string fmt(double x) {
    std::ostringstream ss;
    ss.precision(6);
    ss << std::fixed << x;
    return ss.str();
}

}  // namespace

ReproResult run_repro(const ReproConfig& cfg) {
    if (cfg.seeds < 1 || cfg.alphas.empty()) {
        throw InvalidInput("repro needs at least one seed and one alpha");
    }
    const std::size_t n_alphas = cfg.alphas.size();
    const std::size_t total = static_cast<std::size_t>(cfg.seeds) * n_alphas;

    ReproResult result;
    result.runs.resize(total);

    const unsigned workers = std::min<unsigned>(resolve_threads(cfg.threads),
                                                static_cast<unsigned>(total));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= total) {
                return;
            }
            try {
                const int seed_index = static_cast<int>(idx / n_alphas);
                const double alpha = cfg.alphas[idx % n_alphas];
                result.runs[idx] = evaluate_one(cfg, seed_index, alpha);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }

    // --- Verdicts -----------------------------------------------------
    const int need = std::max(1, cfg.seeds - 1);  // ">= 4 of 5" rule
    const int majority = cfg.seeds / 2 + 1;

    // AURC(MSP) means ordered CE < LS(0.1) < LS(0.2) < LS(0.3).
    {
        std::vector<double> means(n_alphas, 0.0);
        for (int s = 0; s < cfg.seeds; ++s) {
            for (std::size_t a = 0; a < n_alphas; ++a) {
                means[a] += result.run(s, a, n_alphas).aurc_msp;
            }
        }
        bool ordered = true;
        std::ostringstream detail;
        for (std::size_t a = 0; a < n_alphas; ++a) {
            means[a] /= cfg.seeds;
            if (a > 0 && !(means[a - 1] < means[a])) {
                ordered = false;
            }
            detail << (a ? " < " : "") << "aurc(a=" << cfg.alphas[a] << ")=" << fmt(means[a]);
        }
        result.verdicts.push_back({"fig3-aurc-ordering", ordered, detail.str()});
    }

    // Coverage at low risk higher for CE than every LS model.
    {
        int good_seeds = 0;
        for (int s = 0; s < cfg.seeds; ++s) {
            const auto& ce = result.run(s, 0, n_alphas);
            const double target = 0.5 * ce.error_rate;
            const double cov_ce = coverage_at_risk(rc_curve(ce.eval_preds_msp), target);
            bool ok = true;
            for (std::size_t a = 1; a < n_alphas; ++a) {
                const auto& ls = result.run(s, a, n_alphas);
                const double cov_ls = coverage_at_risk(rc_curve(ls.eval_preds_msp), target);
                if (!(cov_ce > cov_ls)) {
                    ok = false;
                }
            }
            if (ok) {
                ++good_seeds;
            }
        }
        result.verdicts.push_back({"fig3-coverage-at-low-risk", good_seeds >= need,
                                   std::to_string(good_seeds) + "/" + std::to_string(cfg.seeds) +
                                       " seeds"});
    }

    // Fig. 5 signature: incorrect v_max above correct for strong LS,
    // overlapping curves for CE.
    {
        int good_seeds = 0;
        for (int s = 0; s < cfg.seeds; ++s) {
            bool ok = true;
            for (std::size_t a = 0; a < n_alphas; ++a) {
                const auto& run = result.run(s, a, n_alphas);
                if (run.alpha >= 0.2) {
                    const double frac = center_fraction(
                        run.vmax_stats,
                        [](const WindowPoint& c, const WindowPoint& i) { return i.mean > c.mean; });
                    if (frac < 0.7) {
                        ok = false;
                    }
                } else if (run.alpha == 0.0) {
                    const double frac = center_fraction(
                        run.vmax_stats, [](const WindowPoint& c, const WindowPoint& i) {
                            return std::abs(i.mean - c.mean) < pooled_std(c, i);
                        });
                    if (frac < 0.7) {
                        ok = false;
                    }
                }
            }
            if (ok) {
                ++good_seeds;
            }
        }
        result.verdicts.push_back({"fig5-conditional-vmax", good_seeds >= majority,
                                   std::to_string(good_seeds) + "/" + std::to_string(cfg.seeds) +
                                       " seeds"});
    }

    // Logit normalisation reduces AURC for LS, barely moves CE.
    {
        int good_seeds = 0;
        for (int s = 0; s < cfg.seeds; ++s) {
            const auto& ce = result.run(s, 0, n_alphas);
            const double ce_delta = std::abs(ce.aurc_norm - ce.aurc_msp);
            bool ok = true;
            double min_improvement = std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < n_alphas; ++a) {
                const auto& run = result.run(s, a, n_alphas);
                if (run.alpha >= 0.1) {
                    const double improvement = run.aurc_msp - run.aurc_norm;
                    if (!(improvement > 0.0)) {
                        ok = false;
                    }
                    min_improvement = std::min(min_improvement, improvement);
                }
            }
            if (!(ce_delta < min_improvement)) {
                ok = false;
            }
            if (ok) {
                ++good_seeds;
            }
        }
        result.verdicts.push_back({"fig7-logit-norm-recovery", good_seeds >= need,
                                   std::to_string(good_seeds) + "/" + std::to_string(cfg.seeds) +
                                       " seeds"});
    }

    // Accepted shifted errors at 10% pooled coverage non-decreasing in
    // alpha, allowing one adjacent inversion.
    {
        int good_seeds = 0;
        for (int s = 0; s < cfg.seeds; ++s) {
            std::vector<long> shifted_errors;
            for (std::size_t a = 0; a < n_alphas; ++a) {
                const auto& report = result.run(s, a, n_alphas).mix_report;
                const auto it = report.find("shift");
                shifted_errors.push_back(it == report.end() ? 0 : it->second.errors);
            }
            int inversions = 0;
            for (std::size_t a = 1; a < shifted_errors.size(); ++a) {
                if (shifted_errors[a] < shifted_errors[a - 1]) {
                    ++inversions;
                }
            }
            if (inversions <= 1) {
                ++good_seeds;
            }
        }
        result.verdicts.push_back({"fig6-shift-errors-monotone", good_seeds >= need,
                                   std::to_string(good_seeds) + "/" + std::to_string(cfg.seeds) +
                                       " seeds"});
    }

    return result;
}

void write_verdicts(const std::filesystem::path& path, const ReproResult& result, bool advisory) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    for (const auto& v : result.verdicts) {
        out << v.name << ": " << (v.pass ? "PASS" : "FAIL");
        if (advisory) {
            out << " (advisory)";
        }
        out << " -- " << v.detail << "\n";
    }
}

}  // namespace screject
