#pragma once

#include <map>
#include <string>
#include <vector>

#include "mofkit/autodiff.hpp"

namespace mofkit::ad {

enum class OptimKind { Adam, AdamW };

// Adam / AdamW with bias correction; AdamW applies decoupled weight decay.
struct OptimState {
  OptimKind kind = OptimKind::Adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  long step_count = 0;
  std::map<std::string, Tensor> m;  // first moments, keyed by parameter name
  std::map<std::string, Tensor> v;  // second moments

  static OptimState adam(double lr, double b1 = 0.9, double b2 = 0.999) {
    OptimState s;
    s.kind = OptimKind::Adam;
    s.lr = lr;
    s.beta1 = b1;
    s.beta2 = b2;
    return s;
  }
  static OptimState adamw(double lr, double wd, double b1 = 0.9, double b2 = 0.999) {
    OptimState s;
    s.kind = OptimKind::AdamW;
    s.lr = lr;
    s.beta1 = b1;
    s.beta2 = b2;
    s.weight_decay = wd;
    return s;
  }
};

void adam_step(OptimState& opt, const std::vector<Parameter*>& params);
void zero_grads(const std::vector<Parameter*>& params);

// Scales all gradients uniformly so the global L2 norm is at most max_norm.
// Returns the scale that was applied.
double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm);

// Reduce-on-plateau: lr <- lr * factor after patience+1 consecutive
// non-improving metric observations.
struct LRScheduler {
  double factor = 0.6;
  int patience = 10;
  double best = 0.0;
  bool has_best = false;
  int wait = 0;

  LRScheduler() = default;
  LRScheduler(double f, int p) : factor(f), patience(p) {}

  // returns true when the lr was reduced
  bool step(double metric, OptimState& opt) {
    if (!has_best || metric < best) {
      best = metric;
      has_best = true;
      wait = 0;
      return false;
    }
    ++wait;
    if (wait >= patience + 1) {
      opt.lr *= factor;
      wait = 0;
      return true;
    }
    return false;
  }
};

// Exponential moving average of parameters: shadow <- d*shadow + (1-d)*p.
struct EMAState {
  double decay = 0.999;
  std::map<std::string, Tensor> shadow;

  explicit EMAState(double d = 0.999) : decay(d) {}

  void init(const std::vector<Parameter*>& params) {
    for (const Parameter* p : params) shadow[p->name] = p->value;
  }
  void update(const std::vector<Parameter*>& params) {
    for (const Parameter* p : params) {
      Tensor& s = shadow.at(p->name);
      for (int k = 0; k < s.size(); ++k)
        s[k] = decay * s[k] + (1.0 - decay) * p->value[k];
    }
  }
  // exchange parameter values with shadow values (call again to restore)
  void swap(const std::vector<Parameter*>& params) {
    for (Parameter* p : params) std::swap(shadow.at(p->name).data, p->value.data);
  }
};

}  // namespace mofkit::ad
