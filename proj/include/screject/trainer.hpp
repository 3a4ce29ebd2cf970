#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "screject/data.hpp"
#include "screject/losses.hpp"

namespace screject {

/// Fully connected ReLU network. weights[l] is row-major
/// (sizes[l+1] x sizes[l]); the final layer is linear.
struct MLPModel {
    std::vector<int> sizes;  // input D, hidden widths, output K
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    int input_dim() const { return sizes.front(); }
    int output_dim() const { return sizes.back(); }
};

struct TrainConfig {
    double alpha = 0.0;
    int epochs = 20;
    int batch_size = 128;
    double learning_rate = 0.05;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    double weight_decay = 0.0;
    std::vector<int> hidden = {64, 64};

    void validate() const;
};

/// Fan-in-scaled uniform initialisation from the seeded stream.
MLPModel init_model(std::span<const int> sizes, std::uint64_t seed);

std::vector<double> forward(const MLPModel& model, std::span<const double> x);

struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

/// Gradients of loss_ls(softmax(forward(x)), target, cfg) with respect
/// to every parameter; the logit-level seed equals grad_ls_logits.
Gradients backward(const MLPModel& model, std::span<const double> x,
                   std::span<const double> target, const SmoothingConfig& cfg);

/// Mini-batch SGD with momentum over n_train samples from the mixture.
/// Deterministic given the seeds; keeps the last state (no model
/// selection). Throws TrainingDiverged on a non-finite loss.
MLPModel train(const MixtureSpec& spec, long n_train, const TrainConfig& cfg);

/// Mean training loss per epoch of the preceding train() call is
/// exposed through this overload for smoke checks.
MLPModel train(const MixtureSpec& spec, long n_train, const TrainConfig& cfg,
               std::vector<double>* epoch_losses);

/// Writes the logit-record file for every sample; returns the count.
long dump_logits(const MLPModel& model, std::span<const Sample> samples,
                 const std::filesystem::path& path, const std::string& source_tag = "");

/// Flat key=value manifest written next to every logit dump.
void write_manifest(const std::filesystem::path& path,
                    const std::map<std::string, std::string>& entries);

/// Manifest contents for a training run.
std::map<std::string, std::string> run_manifest(const MixtureSpec& spec, const TrainConfig& cfg);

}  // namespace screject
