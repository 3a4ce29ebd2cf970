#pragma once

#include <span>
#include <vector>

namespace screject {

/// Throws InvalidInput unless v has K >= 2 finite entries.
void check_logits(std::span<const double> v);

/// Throws InvalidInput unless pi is a categorical distribution
/// (entries >= 0, sum within 1e-12 of 1).
void check_probs(std::span<const double> pi);

/// log(sum_k exp(v_k)), stabilised by max subtraction.
double log_sum_exp(std::span<const double> v);

/// pi_k = exp(v_k) / sum_i exp(v_i), stabilised by max subtraction.
std::vector<double> softmax(std::span<const double> v);

// Scalar uncertainty scores. All follow the convention
// "higher = more uncertain"; MSP and DOCTOR are negated accordingly.

/// U = -max_k pi_k.
double score_msp(std::span<const double> pi);

/// Shannon entropy U = -sum_k pi_k log pi_k (natural log, 0 log 0 := 0).
double score_entropy(std::span<const double> pi);

/// DOCTOR score U = -||pi||_2.
double score_doctor(std::span<const double> pi);

/// Energy score U = -log sum_k exp(v_k).
double score_energy(std::span<const double> v);

}  // namespace screject
