#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace screject {

/// Deterministic random stream: mt19937_64 driving 53-bit uniform
/// doubles and Box-Muller normals (two uniforms per normal, no cache).
/// The algorithm identifier below is written into run manifests.
class Rng {
public:
    static constexpr const char* kAlgorithm = "mt19937_64/boxmuller-v1";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform in (0, 1); never returns 0.
    double uniform_open();

    /// Standard normal via Box-Muller.
    double normal();

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

/// K-component isotropic Gaussian mixture in R^D with known priors,
/// hence a closed-form Bayes conditional pibar(x).
struct MixtureSpec {
    int num_classes = 2;
    int dim = 2;
    std::vector<std::vector<double>> means;  // K points in R^D
    double sigma = 1.0;
    std::vector<double> priors;  // K, sums to 1
    std::uint64_t seed = 0;

    void validate() const;

    /// Default desk-scale spec: K means on a circle of the given radius.
    static MixtureSpec ring(int num_classes, double radius, double sigma, std::uint64_t seed);

    /// FNV-1a hash over the full parameterisation, for run manifests.
    std::uint64_t hash() const;
};

struct Sample {
    std::vector<double> x;
    int label = 0;
    std::vector<double> pibar;  // exact Bayes conditional at x
};

/// Exact class posterior pibar_k(x) proportional to
/// prior_k * exp(-||x - mu_k||^2 / (2 sigma^2)).
std::vector<double> bayes_posterior(const MixtureSpec& spec, std::span<const double> x);

/// Draws y ~ priors, x ~ N(mu_y, sigma^2 I); deterministic given spec.seed.
std::vector<Sample> sample_dataset(const MixtureSpec& spec, long n);

/// Same mixture with every mean translated by delta.
MixtureSpec shift_spec(const MixtureSpec& spec, std::span<const double> delta);

/// P_error = 1 - pibar_predicted.
double p_error_of(std::span<const double> pibar, int predicted);

struct LogitRecord {
    std::vector<double> logits;
    int label = 0;
    std::string source_tag;
};

/// Text interchange format: header "# screject-logits v1 K=<K>", then
/// one comma-separated row per sample with K logits (17 significant
/// digits), the label, and an optional source tag.
std::vector<LogitRecord> load_logit_records(const std::filesystem::path& path);
void write_logit_records(const std::filesystem::path& path, std::span<const LogitRecord> records);

}  // namespace screject
