#include "softlex/train.hpp"

#include <chrono>
#include <cmath>

#include "softlex/errors.hpp"
#include "softlex/infer.hpp"
#include "softlex/log.hpp"

namespace softlex {

Adamax::Adamax(std::vector<net::Parameter*> params, double lr, double beta1, double beta2,
               double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (lr_ < 0.0 || beta1_ < 0.0 || beta1_ >= 1.0 || beta2_ < 0.0 || beta2_ >= 1.0 || eps_ <= 0.0)
    throw ConfigError("adamax: invalid hyperparameters");
  m_.reserve(params_.size());
  u_.reserve(params_.size());
  for (auto* p : params_) {
    m_.push_back(Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols()));
    u_.push_back(Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adamax::step() {
  ++t_;
  const double bias = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    net::Parameter& p = *params_[i];
    if (!p.grad.allFinite())
      throw IntegrityError("adamax: non-finite gradient in " + p.name + " at step " +
                           std::to_string(t_));
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
    u_[i] = (beta2_ * u_[i]).cwiseMax(p.grad.cwiseAbs());
    p.value.array() -= (lr_ / bias) * m_[i].array() / (u_[i].array() + eps_);
  }
}

void Adamax::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

double clip_gradients(const std::vector<net::Parameter*>& params, double clip) {
  double sq = 0.0;
  for (auto* p : params) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (clip > 0.0 && norm > clip) {
    const double scale = clip / norm;
    for (auto* p : params) p->grad *= scale;
  }
  return norm;
}

EvalResult evaluate(TaggerModel& model, const std::vector<EncodedSentence>& data, int batch_size,
                    int threads) {
  EvalResult result;
  if (data.empty()) return result;
  std::vector<const EncodedSentence*> ptrs;
  ptrs.reserve(data.size());
  for (const auto& s : data) ptrs.push_back(&s);

  InferenceEngine<double> engine(model);
  const auto t0 = std::chrono::steady_clock::now();
  auto paths = engine.decode(ptrs, batch_size, threads);
  const auto t1 = std::chrono::steady_clock::now();

  const LabelVocab& labels = model.labels();
  for (size_t i = 0; i < data.size(); ++i) {
    std::vector<std::string> pred;
    pred.reserve(paths[i].size());
    for (int id : paths[i]) pred.push_back(labels.tag(id));
    result.add(data[i].tags, pred);
  }
  const double secs = std::chrono::duration<double>(t1 - t0).count();
  result.sentences_per_sec = secs > 0.0 ? static_cast<double>(data.size()) / secs : 0.0;
  return result;
}

FitResult fit(TaggerModel& model, const std::vector<EncodedSentence>& train,
              const std::vector<EncodedSentence>& dev, const TrainConfig& cfg, Rng& rng,
              const std::function<void(const EpochRecord&)>& on_epoch) {
  if (train.empty()) throw ConfigError("fit: empty training set");
  if (cfg.epochs < 1 || cfg.batch_size < 1 || cfg.patience < 0)
    throw ConfigError("fit: invalid epoch/batch/patience settings");

  auto params = model.parameters();
  Adamax opt(params, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);

  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  FitResult result;
  std::vector<Eigen::MatrixXd> best;
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (size_t first = 0; first < order.size(); first += static_cast<size_t>(cfg.batch_size)) {
      const size_t last = std::min(order.size(), first + static_cast<size_t>(cfg.batch_size));
      std::vector<const EncodedSentence*> batch;
      batch.reserve(last - first);
      for (size_t k = first; k < last; ++k) batch.push_back(&train[order[k]]);

      net::Tape tape;
      net::Var loss = model.batch_loss(tape, batch, &rng);
      const double value = tape.value(loss)(0, 0);
      if (!std::isfinite(value))
        throw IntegrityError("fit: non-finite loss at epoch " + std::to_string(epoch));
      loss_sum += value * static_cast<double>(last - first);
      opt.zero_grad();
      tape.backward(loss);
      clip_gradients(params, cfg.clip_norm);
      opt.step();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    if (!dev.empty()) {
      EvalResult ev = evaluate(model, dev, cfg.eval_batch_size, cfg.eval_threads);
      rec.dev_precision = ev.overall.precision();
      rec.dev_recall = ev.overall.recall();
      rec.dev_f1 = ev.overall.f1();
    }
    result.log.push_back(rec);

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // wall time goes to stderr only, keeping persisted logs byte-reproducible
    log_info("epoch " + std::to_string(epoch) + " loss " + std::to_string(rec.train_loss) +
             " dev_f1 " + std::to_string(rec.dev_f1) + " (" + std::to_string(secs) + "s)");
    if (on_epoch) on_epoch(rec);

    // Without a dev set every epoch counts as an improvement: training runs
    // the full budget and keeps the final parameters.
    if (result.log.size() == 1 || dev.empty() || rec.dev_f1 > result.best_dev_f1) {
      result.best_dev_f1 = rec.dev_f1;
      result.best_epoch = epoch;
      since_best = 0;
      best.clear();
      best.reserve(params.size());
      for (auto* p : params) best.push_back(p->value);
    } else if (++since_best >= cfg.patience && cfg.patience > 0) {
      log_info("early stop after epoch " + std::to_string(epoch) + " (best epoch " +
               std::to_string(result.best_epoch) + ")");
      break;
    }
  }

  for (size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
  return result;
}

}  // namespace softlex
