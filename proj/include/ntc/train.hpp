#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ntc/metrics.hpp"
#include "ntc/model.hpp"
#include "ntc/params.hpp"
#include "ntc/text.hpp"

namespace ntc {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction:
//   t += 1; m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g^2
//   theta -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
// Moment slots mirror the trainable parameters of the set the optimizer was
// built for. A non-finite gradient entry throws std::runtime_error naming
// the parameter.
class Adam {
 public:
  Adam(const ParamSet& params, const AdamConfig& config);
  void step(ParamSet& params);
  std::int64_t timestep() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::vector<Tensor> m_, v_;  // one per trainable parameter, in order
  std::int64_t t_ = 0;
};

struct StepRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t step = 0;   // 1-based, global across epochs
  double loss = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean over the epoch's optimizer steps
  double precision = 0.0;   // macro, on the eval set
  double recall = 0.0;
  double f1 = 0.0;
};

struct LossTrace {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
};

// CSV "epoch,step,loss" / "epoch,train_loss,precision,recall,f1", full
// precision so traces compare byte-identically across reruns.
void write_step_trace(const std::string& path, const LossTrace& trace);
void write_epoch_trace(const std::string& path, const LossTrace& trace);
// Throws std::runtime_error naming the 1-based line on malformed input.
std::vector<StepRecord> parse_step_trace(const std::string& path);

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  std::string checkpoint_path;   // empty: no checkpointing
  std::string trace_path;        // empty: step trace kept in memory only
  std::string epoch_trace_path;  // empty: epoch trace kept in memory only
};

// Raised when a batch loss goes non-finite; the checkpoint of the best
// epoch so far (if any) is left on disk.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& message, std::string last_good)
      : std::runtime_error(message), last_good_checkpoint(std::move(last_good)) {}
  std::string last_good_checkpoint;  // empty if no epoch completed
};

struct TrainResult {
  LossTrace trace;
  std::size_t best_epoch = 0;  // 1-based
  double best_f1 = 0.0;
  MetricsReport final_eval;    // metrics of the last epoch
};

// Per epoch: seeded shuffle (seed + epoch index), train-mode forward /
// backward / Adam step per batch, then eval-mode metrics on eval_set. The
// checkpoint is written whenever the eval macro-F1 strictly improves, so the
// file left behind belongs to the best epoch (ties keep the earlier one).
// Trace files are written incrementally when paths are given.
TrainResult train(Model& model, const std::vector<Example>& train_set,
                  const std::vector<Example>& eval_set, const TrainConfig& config,
                  const AdamConfig& adam_config, const Vocabulary& vocab,
                  const std::vector<std::string>& class_names);

// Eval-mode predictions for a whole set, in input order.
std::vector<int> predict_labels(Model& model, const std::vector<Example>& examples,
                                std::size_t batch_size = 64);

MetricsReport evaluate(Model& model, const std::vector<Example>& examples,
                       std::size_t num_classes);

}  // namespace ntc
