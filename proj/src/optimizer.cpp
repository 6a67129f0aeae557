#include <cmath>

#include "ognn/train.hpp"

namespace ognn::train {

Adam::Adam(const model::FilterModel& m, AdamSettings settings) : settings_(settings) {
  alpha_.first.assign(m.alpha.size(), 0.0);
  alpha_.second.assign(m.alpha.size(), 0.0);
  for (const auto& t : m.theta) theta_.push_back({std::vector<double>(t.size(), 0.0), std::vector<double>(t.size(), 0.0)});
  ab_.first.assign(2, 0.0);
  ab_.second.assign(2, 0.0);
}

void Adam::update(std::span<double> params, std::span<const double> grads, Moments& mom, double lr) {
  if (params.size() != grads.size() || params.size() != mom.first.size())
    throw std::invalid_argument("Adam: parameter and gradient shapes differ");
  const double t = static_cast<double>(steps_);
  const double bc1 = 1.0 - std::pow(settings_.beta1, t);
  const double bc2 = 1.0 - std::pow(settings_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    mom.first[i] = settings_.beta1 * mom.first[i] + (1.0 - settings_.beta1) * g;
    mom.second[i] = settings_.beta2 * mom.second[i] + (1.0 - settings_.beta2) * g * g;
    const double m_hat = mom.first[i] / bc1;
    const double v_hat = mom.second[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + settings_.eps);
  }
}

void Adam::step(model::FilterModel& m, const model::Gradients& g) {
  if (!g.all_finite()) throw NumericError("Adam: non-finite gradient");
  if (g.d_theta.size() != m.theta.size()) throw std::invalid_argument("Adam: theta group count mismatch");
  ++steps_;
  if (!m.freeze_alpha) update(m.alpha.flat(), g.d_alpha.flat(), alpha_, settings_.lr_main);
  for (std::size_t t = 0; t < m.theta.size(); ++t)
    update(m.theta[t].flat(), g.d_theta[t].flat(), theta_[t], settings_.lr_main);
  if (m.train_ab) {
    double ab[2] = {m.basis.a, m.basis.b};
    const double gab[2] = {g.d_a, g.d_b};
    update(ab, gab, ab_, settings_.lr_ab);
    m.basis.a = ab[0];
    m.basis.b = ab[1];
    m.basis.project();
  }
  m.touch();
}

double regularized_loss(const model::FilterModel& m, double data_loss, double wd) {
  return data_loss + wd * model::parameter_penalty(m);
}

}  // namespace ognn::train
