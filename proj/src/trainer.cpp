#include "tkgf/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "tkgf/hashing.hpp"
#include "tkgf/rng.hpp"

namespace tkgf {

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (!(lr > 0)) throw std::invalid_argument("learning rate must be positive");
  if (!(beta1 > 0 && beta1 < 1 && beta2 > 0 && beta2 < 1 && eps > 0))
    throw std::invalid_argument("Adam coefficients out of range");
  if (lr_halving_patience == 0 || early_stopping_patience == 0)
    throw std::invalid_argument("patience values must be positive");
  if (!(valid_fraction > 0 && valid_fraction < 1)) throw std::invalid_argument("valid_fraction must lie in (0, 1)");
}

template <class T>
Adam<T>::Adam(std::size_t n, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

template <class T>
void Adam<T>::step(std::vector<T>& params, const std::vector<T>& grad, double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw std::invalid_argument("optimizer state does not match parameter count");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = static_cast<double>(grad[i]);
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] = static_cast<T>(static_cast<double>(params[i]) - lr * mhat / (std::sqrt(vhat) + eps_));
  }
}

PlateauScheduler::PlateauScheduler(double lr, std::size_t halving_patience, std::size_t stop_patience)
    : lr_(lr), halving_patience_(halving_patience), stop_patience_(stop_patience) {}

PlateauScheduler::Outcome PlateauScheduler::observe(double valid_loss) {
  ++epoch_;
  Outcome out;
  if (valid_loss < best_) {
    best_ = valid_loss;
    best_epoch_ = epoch_;
    stagnant_ = 0;
    out.improved = true;
  } else if (++stagnant_ >= halving_patience_) {
    lr_ /= 2;
    stagnant_ = 0;
    out.halved = true;
  }
  out.stop = epoch_ - best_epoch_ >= stop_patience_;
  return out;
}

void TrainLog::write_jsonl(std::ostream& out) const {
  for (const auto& e : epochs) {
    nlohmann::json j{{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"valid_loss", e.valid_loss}, {"lr", e.lr}};
    out << j.dump() << '\n';
  }
}

namespace {

std::vector<Sample> samples_of(const std::vector<TimedSample>& v) {
  std::vector<Sample> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.sample);
  return out;
}

}  // namespace

template <class T>
TrainResult<T> train(std::vector<TimedSample> train_set, std::vector<TimedSample> valid_set,
                     const ModelConfig& model_cfg, const TrainConfig& cfg, const ValidLossHook& hook) {
  cfg.validate();
  model_cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("empty training set");

  TrainResult<T> result;
  if (valid_set.empty()) {
    std::set<Step> steps;
    for (const auto& s : train_set) steps.insert(s.step);
    if (steps.size() == 1) {
      valid_set = train_set;
    } else {
      const auto held = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(cfg.valid_fraction * static_cast<double>(steps.size()))));
      const Step cutoff = *std::next(steps.begin(), static_cast<std::ptrdiff_t>(steps.size() - held));
      std::vector<TimedSample> kept;
      for (auto& s : train_set) (s.step >= cutoff ? valid_set : kept).push_back(std::move(s));
      train_set = std::move(kept);
    }
    result.log.validation_from_train = true;
  }

  const std::vector<Sample> train_samples = samples_of(train_set);
  const std::vector<Sample> valid_samples = samples_of(valid_set);

  ModelParams<T> params = ModelParams<T>::init(model_cfg, derive_seed(cfg.seed, "model.init"));
  result.params = params;
  Adam<T> adam(params.values.size(), cfg.beta1, cfg.beta2, cfg.eps);
  PlateauScheduler sched(cfg.lr, cfg.lr_halving_patience, cfg.early_stopping_patience);
  Rng rng(derive_seed(cfg.seed, "train.shuffle"));
  std::vector<std::size_t> order(train_samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<T> grad;
  std::vector<Sample> batch;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = sched.lr();
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_samples[order[i]]);
      const double loss = gradients(params, std::span<const Sample>(batch), grad, cfg.jobs);
      loss_sum += loss * static_cast<double>(batch.size());
      adam.step(params.values, grad, lr);
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.lr = lr;
    entry.train_loss = loss_sum / static_cast<double>(order.size());
    entry.valid_loss = mean_loss(params, std::span<const Sample>(valid_samples));
    if (hook) entry.valid_loss = hook(epoch, entry.valid_loss);
    result.log.epochs.push_back(entry);
    const auto outcome = sched.observe(entry.valid_loss);
    if (outcome.improved) {
      result.params = params;
      result.log.best_epoch = epoch;
    }
    if (outcome.stop && epoch < cfg.epochs) {
      result.log.stopped_early = true;
      break;
    }
  }
  return result;
}

template class Adam<float>;
template class Adam<double>;
template TrainResult<float> train(std::vector<TimedSample>, std::vector<TimedSample>, const ModelConfig&,
                                  const TrainConfig&, const ValidLossHook&);
template TrainResult<double> train(std::vector<TimedSample>, std::vector<TimedSample>, const ModelConfig&,
                                   const TrainConfig&, const ValidLossHook&);

}  // namespace tkgf
