#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "screject/analysis.hpp"
#include "screject/data.hpp"
#include "screject/selective.hpp"
#include "screject/trainer.hpp"

namespace screject {

/// Configuration for the end-to-end synthetic reproduction: train CE
/// and LS models over several seeds, evaluate MSP and the normalised
/// max logit, and check the directional claims.
struct ReproConfig {
    std::vector<double> alphas = {0.0, 0.1, 0.2, 0.3};
    int seeds = 5;
    long n_train = 20000;
    long n_val = 2000;
    long n_eval = 5000;
    TrainConfig train_base;  // alpha and seed filled in per run
    double ring_radius = 2.0;
    double ring_sigma = 0.6;
    int num_classes = 8;
    double shift_sigmas = 2.0;      // shift magnitude in units of sigma
    double mix_coverage = 0.1;      // pooled coverage for the shift-mix table
    std::uint64_t base_seed = 1;
    unsigned threads = 0;           // 0 = hardware, capped by SCREJECT_THREADS
    bool quick = false;             // reduced sizes, advisory verdicts

    static ReproConfig defaults();
    static ReproConfig quick_defaults();
};

/// Everything measured for one (seed, alpha) model.
struct ModelEval {
    double alpha = 0.0;
    int seed_index = 0;
    double error_rate = 0.0;  // full coverage
    double aurc_msp = 0.0;
    double aurc_norm = 0.0;
    double p_chosen = 1.0;
    WindowedStats vmax_stats;
    std::map<std::string, SourceStats> mix_report;
    std::vector<ScoredPrediction> eval_preds_msp;  // kept for operating points
};

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ReproResult {
    std::vector<ModelEval> runs;  // seeds-major, alphas-minor
    std::vector<Verdict> verdicts;

    const ModelEval& run(int seed_index, std::size_t alpha_index, std::size_t n_alphas) const {
        return runs[static_cast<std::size_t>(seed_index) * n_alphas + alpha_index];
    }
    bool all_pass() const;
};

/// Scores one logit record set with MSP, attaching the aux fields
/// needed by the conditional analyses (vprime from norm_p).
std::vector<ScoredPrediction> score_records_msp(std::span<const LogitRecord> records,
                                                double norm_p);

/// Trains and evaluates all (seed, alpha) models, then evaluates the
/// directional verdicts. Model trainings run in a worker pool; results
/// do not depend on the thread count.
ReproResult run_repro(const ReproConfig& cfg);

/// One line per verdict: "<name>: PASS|FAIL <detail>".
void write_verdicts(const std::filesystem::path& path, const ReproResult& result, bool advisory);

/// Worker count: min(requested or hardware, SCREJECT_THREADS when set).
unsigned resolve_threads(unsigned requested);

}  // namespace screject
