#pragma once

#include <span>
#include <vector>

#include "screject/data.hpp"

namespace screject {

enum class ShiftMode {
    MeanCentralise,  // s = -mean(v), the default
    None,
};

struct NormConfig {
    double p = 2.0;
    ShiftMode shift_mode = ShiftMode::MeanCentralise;
    std::vector<double> p_grid = {1, 2, 3, 4, 5, 6, 7, 8};

    void validate() const;
};

/// v' = (v + s) / ||v + s||_p with s = -mean(v) under mean-centralisation.
/// Throws on a vector that is identically zero after the shift.
std::vector<double> normalise_logits(std::span<const double> v, const NormConfig& cfg);

/// U = -max_k v'_k, the normalised-max-logit uncertainty.
double score_maxlogit_norm(std::span<const double> v, const NormConfig& cfg);

/// Executable form of the norm-ratio theorem: for strictly positive v
/// with at least two distinct values, eta > 0 and p >= 1, checks
/// ||v||_inf / ||v||_p > ||v + eta 1||_inf / ||v + eta 1||_p.
/// Hypothesis violations throw InvalidInput.
bool check_result1(std::span<const double> v, double eta, double p);

struct PSearchResult {
    double p = 1.0;
    double aurc = 0.0;
};

/// Grid search over cfg.p_grid minimising AURC of the normalised-max-
/// logit score on the validation records; ties broken by smaller p.
PSearchResult search_p(std::span<const LogitRecord> val_records, const NormConfig& cfg);

}  // namespace screject
