#pragma once

#include "vesselgen/rvnn.hpp"
#include "vesselgen/tree_io.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace vesselgen {

struct TrainConfig {
    int batch_size = 4;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double alpha = 0.3;
    double gamma = 0.001;
    int epochs = 20000;
    Weighting weighting = Weighting::Subtree;
    int max_height = 10;
    double epsilon = 0.2;
    std::uint64_t seed = 1;
    int checkpoint_interval = 1000;
};

// Key-value config document ("key = value" lines, '#' comments). Keys the
// document does not mention keep their values from `base`.
TrainConfig parse_train_config(const std::string& text, const TrainConfig& base = TrainConfig{});
std::string format_train_config(const TrainConfig& c);

std::string to_string(Weighting w);
Weighting weighting_from_string(const std::string& s);

struct EpochRecord {
    int epoch;
    double recon;
    double topo;
    double kl;
    double total;
};

// Everything a run needs to resume: model, optimizer state (inside the
// store), training RNG stream, and epoch counter.
struct TrainState {
    ModelConfig mcfg;
    TrainConfig tcfg;
    NormParams norm;
    RvnnModel<float> model;
    Rng rng{0};
    int epoch = 0;
};

TrainState init_training(const TrainConfig& tcfg, const ModelConfig& mcfg, const NormParams& norm);

// Runs `epochs` additional epochs of teacher-forced training over the
// normalized corpus. Appends one record per epoch to `curve` when given and
// invokes `after_epoch` after each epoch (checkpoint hooks).
void train_epochs(TrainState& state, const std::vector<CorpusEntry>& corpus, int epochs,
                  std::vector<EpochRecord>* curve = nullptr,
                  const std::function<void(const TrainState&)>& after_epoch = {});

// Versioned text checkpoint; parameters and Adam moments are stored as hex
// floats so save -> load -> save reproduces the bytes exactly. Writes are
// atomic (temp file + rename).
void save_checkpoint(const std::filesystem::path& path, const TrainState& state);
TrainState load_checkpoint(const std::filesystem::path& path);

// Deterministic teacher-forced evaluation at z = mu (no sampling noise).
struct TeacherEval {
    double recon = 0.0;        // mean squared-L2 per node
    int correct_nodes = 0;     // argmax class == true class
    int total_nodes = 0;
};
TeacherEval evaluate_teacher_at_mu(const RvnnModel<float>& model, const VesselTree& tree);

// Mu vector of a tree under the current model (used for decode probes).
Tensor<float> tree_mu(const RvnnModel<float>& model, const VesselTree& tree);

} // namespace vesselgen
