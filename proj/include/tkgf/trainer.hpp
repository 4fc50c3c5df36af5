#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "tkgf/transformer.hpp"

namespace tkgf {

struct TrainConfig {
  std::size_t batch_size = 48;
  std::size_t epochs = 30;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t lr_halving_patience = 5;
  std::size_t early_stopping_patience = 10;
  // Share of the latest training steps held out when no validation set exists.
  double valid_fraction = 0.1;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  void validate() const;
};

template <class T>
class Adam {
 public:
  Adam(std::size_t n, double beta1, double beta2, double eps);
  void step(std::vector<T>& params, const std::vector<T>& grad, double lr);
  std::size_t steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<double> m_, v_;
};

// Halves the learning rate after `halving_patience` consecutive epochs
// without a strictly lower validation loss, and signals a stop once
// `stop_patience` epochs have passed since the best one.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, std::size_t halving_patience, std::size_t stop_patience);

  struct Outcome {
    bool improved = false;
    bool halved = false;
    bool stop = false;
  };

  Outcome observe(double valid_loss);
  double lr() const { return lr_; }
  double best() const { return best_; }
  std::size_t best_epoch() const { return best_epoch_; }  // 1-based, 0 before any improvement

 private:
  double lr_;
  std::size_t halving_patience_;
  std::size_t stop_patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t best_epoch_ = 0;
  std::size_t epoch_ = 0;
  std::size_t stagnant_ = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0;
  double valid_loss = 0;
  double lr = 0;  // rate used during the epoch

  bool operator==(const EpochLog&) const = default;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
  bool validation_from_train = false;

  void write_jsonl(std::ostream& out) const;
  bool operator==(const TrainLog&) const = default;
};

template <class T>
struct TrainResult {
  ModelParams<T> params;  // parameters of the best validation epoch
  TrainLog log;
};

struct TimedSample {
  Sample sample;
  Step step = 0;
};

// Replaces the measured validation loss of an epoch (1-based); used to drive
// the schedule from a fixed trace.
using ValidLossHook = std::function<double(std::size_t epoch, double measured)>;

// Throws std::invalid_argument on an empty training set. An empty validation
// set is replaced by the samples of the latest valid_fraction of training
// steps (at least one step); those samples then leave the training set.
template <class T>
TrainResult<T> train(std::vector<TimedSample> train_set, std::vector<TimedSample> valid_set,
                     const ModelConfig& model_cfg, const TrainConfig& cfg, const ValidLossHook& hook = nullptr);

}  // namespace tkgf
