#include "screject/losses.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "screject/error.hpp"

namespace screject {

void SmoothingConfig::validate() const {
    if (!(alpha <= 1.0)) {
        throw InvalidInput("smoothing alpha must be <= 1, got " + std::to_string(alpha));
    }
    if (num_classes < 2) {
        throw InvalidInput("smoothing needs K >= 2 classes");
    }
}

std::vector<double> smooth_target(std::span<const double> t, const SmoothingConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(t.size()) != cfg.num_classes) {
        throw InvalidInput("target length does not match num_classes");
    }
    std::vector<double> out(t.size());
    const double uniform = cfg.alpha / cfg.num_classes;
    for (std::size_t k = 0; k < t.size(); ++k) {
        out[k] = (1.0 - cfg.alpha) * t[k] + uniform;
    }
    return out;
}

double loss_ce(std::span<const double> pi, std::span<const double> t) {
    if (pi.size() != t.size()) {
        throw InvalidInput("pi and target lengths differ");
    }
    double loss = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) {
        if (t[k] == 0.0) {
            continue;
        }
        if (pi[k] <= 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        loss -= t[k] * std::log(pi[k]);
    }
    return loss;
}

double loss_ls(std::span<const double> pi, std::span<const double> t,
               const SmoothingConfig& cfg) {
    const auto smoothed = smooth_target(t, cfg);
    return loss_ce(pi, smoothed);
}

double kl_uniform(std::span<const double> pi) {
    const double u = 1.0 / static_cast<double>(pi.size());
    double kl = 0.0;
    for (double p : pi) {
        if (p <= 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        kl += u * (std::log(u) - std::log(p));
    }
    return kl;
}

std::vector<double> grad_ce_logits(std::span<const double> pi, std::span<const double> t) {
    if (pi.size() != t.size()) {
        throw InvalidInput("pi and target lengths differ");
    }
    std::vector<double> g(pi.size());
    for (std::size_t k = 0; k < pi.size(); ++k) {
        g[k] = pi[k] - t[k];
    }
    return g;
}

std::vector<double> grad_ls_logits(std::span<const double> pi, std::span<const double> t,
                                   const SmoothingConfig& cfg) {
    const auto smoothed = smooth_target(t, cfg);
    return grad_ce_logits(pi, smoothed);
}

std::vector<double> grad_suppression(std::span<const double> t, const SmoothingConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(t.size()) != cfg.num_classes) {
        throw InvalidInput("target length does not match num_classes");
    }
    std::vector<double> g(t.size());
    const double uniform = cfg.alpha / cfg.num_classes;
    for (std::size_t k = 0; k < t.size(); ++k) {
        g[k] = cfg.alpha * t[k] - uniform;
    }
    return g;
}

double suppression_at_max(double p_error, const SmoothingConfig& cfg) {
    cfg.validate();
    if (p_error < 0.0 || p_error > 1.0) {
        throw InvalidInput("p_error must be in [0, 1]");
    }
    return cfg.alpha * (1.0 - p_error) - cfg.alpha / cfg.num_classes;
}

double grad_suppression_onehot(bool correct, const SmoothingConfig& cfg) {
    cfg.validate();
    const double uniform = cfg.alpha / cfg.num_classes;
    return correct ? cfg.alpha - uniform : -uniform;
}

}  // namespace screject
