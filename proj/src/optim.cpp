#include "mofkit/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace mofkit::ad {

void zero_grads(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->zero_grad();
}

void adam_step(OptimState& opt, const std::vector<Parameter*>& params) {
  ++opt.step_count;
  const double bc1 = 1.0 - std::pow(opt.beta1, opt.step_count);
  const double bc2 = 1.0 - std::pow(opt.beta2, opt.step_count);
  for (Parameter* p : params) {
    auto it_m = opt.m.find(p->name);
    if (it_m == opt.m.end()) {
      it_m = opt.m.emplace(p->name, Tensor(p->value.rows, p->value.cols)).first;
      opt.v.emplace(p->name, Tensor(p->value.rows, p->value.cols));
    }
    Tensor& m = it_m->second;
    Tensor& v = opt.v.at(p->name);
    if (!m.same_shape(p->value)) throw std::invalid_argument("adam_step: stale moment shape");
    for (int k = 0; k < p->value.size(); ++k) {
      const double g = p->grad[k];
      m[k] = opt.beta1 * m[k] + (1.0 - opt.beta1) * g;
      v[k] = opt.beta2 * v[k] + (1.0 - opt.beta2) * g * g;
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      double upd = opt.lr * mhat / (std::sqrt(vhat) + opt.eps);
      if (opt.kind == OptimKind::AdamW && opt.weight_decay > 0.0)
        upd += opt.lr * opt.weight_decay * p->value[k];
      p->value[k] -= upd;
    }
    if (!p->value.all_finite())
      throw NumericalError("adam_step produced non-finite values in '" + p->name + "'");
  }
}

double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm) {
  double total = 0.0;
  for (const Parameter* p : params)
    for (int k = 0; k < p->grad.size(); ++k) total += p->grad[k] * p->grad[k];
  total = std::sqrt(total);
  if (total <= max_norm || total == 0.0) return 1.0;
  const double scale = max_norm / total;
  for (Parameter* p : params)
    for (int k = 0; k < p->grad.size(); ++k) p->grad[k] *= scale;
  return scale;
}

}  // namespace mofkit::ad
