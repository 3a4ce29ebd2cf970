#pragma once

#include <span>
#include <vector>

namespace screject {

/// Smoothing coefficient alpha in (-inf, 1] over K classes. Negative
/// values sharpen the target beyond one-hot instead of smoothing it.
struct SmoothingConfig {
    double alpha = 0.0;
    int num_classes = 2;

    /// Throws InvalidInput if alpha > 1 or num_classes < 2.
    void validate() const;
};

/// (1 - alpha) * t + alpha/K. Sums to 1 for any alpha <= 1; entries may
/// leave [0, 1] when alpha < 0.
std::vector<double> smooth_target(std::span<const double> t, const SmoothingConfig& cfg);

/// Cross entropy -sum_k t_k log pi_k. Returns +inf when some pi_k = 0
/// has nonzero target mass.
double loss_ce(std::span<const double> pi, std::span<const double> t);

/// Cross entropy against the smoothed target.
double loss_ls(std::span<const double> pi, std::span<const double> t,
               const SmoothingConfig& cfg);

/// KL(u || pi) for the uniform distribution over pi.size() classes.
double kl_uniform(std::span<const double> pi);

/// d loss_ce / d v_k = pi_k - t_k, where pi = softmax(v).
std::vector<double> grad_ce_logits(std::span<const double> pi, std::span<const double> t);

/// d loss_ls / d v_k = pi_k - [(1 - alpha) t_k + alpha/K].
std::vector<double> grad_ls_logits(std::span<const double> pi, std::span<const double> t,
                                   const SmoothingConfig& cfg);

/// Componentwise difference between the LS and CE logit gradients:
/// alpha * t_k - alpha/K. Depends only on the target.
std::vector<double> grad_suppression(std::span<const double> t, const SmoothingConfig& cfg);

/// Suppression on the max logit as a function of the true error
/// probability: alpha * (1 - p_error) - alpha/K.
double suppression_at_max(double p_error, const SmoothingConfig& cfg);

/// One-hot (empirical loss) suppression on the max logit:
/// alpha - alpha/K when the prediction is correct, -alpha/K otherwise.
double grad_suppression_onehot(bool correct, const SmoothingConfig& cfg);

}  // namespace screject
