#pragma once

#include <functional>
#include <vector>

#include "softlex/data.hpp"
#include "softlex/model.hpp"
#include "softlex/rng.hpp"
#include "softlex/tape.hpp"

namespace softlex {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 1;
  double lr = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;  // global L2 gradient clip per batch; <= 0 disables
  int patience = 10;       // epochs without a new best dev F1 before stopping; 0 disables
  int eval_batch_size = 8;
  int eval_threads = 1;
};

// Adamax over a fixed parameter list. Per coordinate:
//   m <- b1*m + (1-b1)*g;  u <- max(b2*u, |g|);
//   theta <- theta - (lr/(1-b1^t)) * m/(u+eps).
class Adamax {
 public:
  Adamax(std::vector<net::Parameter*> params, double lr, double beta1, double beta2, double eps);

  // Applies one update from the gradients currently in the parameters.
  // A non-finite gradient aborts with a diagnostic naming the parameter.
  void step();
  void zero_grad();
  long long steps_taken() const { return t_; }

 private:
  std::vector<net::Parameter*> params_;
  std::vector<Eigen::MatrixXd> m_, u_;
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
};

// Scales all gradients by clip/norm when their joint L2 norm exceeds clip.
// Returns the pre-clip norm.
double clip_gradients(const std::vector<net::Parameter*>& params, double clip);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_precision = 0.0;
  double dev_recall = 0.0;
  double dev_f1 = 0.0;
};

struct FitResult {
  std::vector<EpochRecord> log;
  int best_epoch = 0;
  double best_dev_f1 = 0.0;
};

// Entity-level scores of the model on encoded sentences carrying gold tags.
EvalResult evaluate(TaggerModel& model, const std::vector<EncodedSentence>& data, int batch_size,
                    int threads = 1);

// Mini-batch training with dev-F1 early stopping. The model ends up holding
// the best-dev parameters. rng drives shuffling and dropout; together with
// the model's initialization seed it fully determines the run. on_epoch, when
// set, fires after each epoch's dev evaluation.
FitResult fit(TaggerModel& model, const std::vector<EncodedSentence>& train,
              const std::vector<EncodedSentence>& dev, const TrainConfig& cfg, Rng& rng,
              const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace softlex
