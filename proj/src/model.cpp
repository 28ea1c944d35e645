#include "sscb/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sscb/error.hpp"

namespace sscb {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::size_t mlp_param_count(const Mlp& m) {
  std::size_t count = 0;
  std::size_t fan_in = m.context_dim;
  for (std::size_t width : m.hidden) {
    count += width * fan_in + width;
    fan_in = width;
  }
  return count + m.actions * fan_in + m.actions;
}

// Toy model pieces shared by predict and the gradient.
struct ToyTerms {
  double sin2, gauss, dsin2, dgauss;  // values and derivatives w.r.t. x
};

ToyTerms toy_terms(double d, double x) {
  const double u = d * x;
  const double s = std::sin(u);
  const double c = std::cos(u);
  const double g = std::exp(-u * u);
  return {s * s, g, 2.0 * s * c * d, -2.0 * u * d * g};
}

// Forward pass of the MLP, keeping each hidden layer's activations.
struct MlpForward {
  std::vector<std::vector<double>> activations;  // activations[0] is the input
  std::vector<double> logits;
};

MlpForward mlp_forward(const Mlp& m, std::span<const double> x, std::span<const double> d) {
  MlpForward fwd;
  fwd.activations.emplace_back(d.begin(), d.end());
  std::size_t offset = 0;
  for (std::size_t width : m.hidden) {
    const auto& in = fwd.activations.back();
    std::vector<double> out(width);
    const double* w = x.data() + offset;
    const double* b = w + width * in.size();
    for (std::size_t j = 0; j < width; ++j) {
      double z = b[j];
      for (std::size_t i = 0; i < in.size(); ++i) z += w[j * in.size() + i] * in[i];
      out[j] = std::tanh(z);
    }
    offset += width * in.size() + width;
    fwd.activations.push_back(std::move(out));
  }
  const auto& in = fwd.activations.back();
  const double* w = x.data() + offset;
  const double* b = w + m.actions * in.size();
  fwd.logits.resize(m.actions);
  for (std::size_t a = 0; a < m.actions; ++a) {
    double z = b[a];
    for (std::size_t i = 0; i < in.size(); ++i) z += w[a * in.size() + i] * in[i];
    fwd.logits[a] = z;
  }
  return fwd;
}

}  // namespace

bool ParamVector::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ParamVector::norm() const noexcept {
  return std::sqrt(std::inner_product(values_.begin(), values_.end(), values_.begin(), 0.0));
}

double ParamVector::squared_distance(const ParamVector& other) const {
  if (other.size() != size()) throw ShapeError("parameter vectors differ in length");
  double acc = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const double diff = values_[i] - other.values_[i];
    acc += diff * diff;
  }
  return acc;
}

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::kToyTrig: return "toy-trig";
    case ModelFamily::kLinear: return "linear";
    case ModelFamily::kMlp: return "mlp";
  }
  return "?";
}

ModelFamily parse_model_family(const std::string& name) {
  if (name == "toy-trig") return ModelFamily::kToyTrig;
  if (name == "linear") return ModelFamily::kLinear;
  if (name == "mlp") return ModelFamily::kMlp;
  throw ValidationError("unknown model family '" + name + "'");
}

RewardModel::RewardModel(Arch arch) : arch_(std::move(arch)) {
  num_params_ = std::visit(Overloaded{
                               [](const ToyTrig&) -> std::size_t { return 1; },
                               [](const Linear& m) { return m.actions * (m.context_dim + 1); },
                               [](const Mlp& m) { return mlp_param_count(m); },
                           },
                           arch_);
}

RewardModel RewardModel::toy_trig() { return RewardModel(ToyTrig{}); }

RewardModel RewardModel::linear(std::size_t actions, std::size_t context_dim,
                                OutputSquash output) {
  if (actions < 2 || context_dim == 0) throw ValidationError("linear model needs K >= 2, n_d >= 1");
  return RewardModel(Linear{actions, context_dim, output});
}

RewardModel RewardModel::mlp(std::size_t actions, std::size_t context_dim,
                             std::vector<std::size_t> hidden) {
  if (actions < 2 || context_dim == 0) throw ValidationError("mlp model needs K >= 2, n_d >= 1");
  if (std::any_of(hidden.begin(), hidden.end(), [](std::size_t w) { return w == 0; }))
    throw ValidationError("mlp hidden widths must be positive");
  return RewardModel(Mlp{actions, context_dim, std::move(hidden)});
}

ModelFamily RewardModel::family() const noexcept {
  return std::visit(Overloaded{
                        [](const ToyTrig&) { return ModelFamily::kToyTrig; },
                        [](const Linear&) { return ModelFamily::kLinear; },
                        [](const Mlp&) { return ModelFamily::kMlp; },
                    },
                    arch_);
}

std::size_t RewardModel::num_actions() const noexcept {
  return std::visit(Overloaded{
                        [](const ToyTrig&) { return ToyTrig::kActions; },
                        [](const auto& m) { return m.actions; },
                    },
                    arch_);
}

std::size_t RewardModel::context_dim() const noexcept {
  return std::visit(Overloaded{
                        [](const ToyTrig&) -> std::size_t { return 1; },
                        [](const auto& m) { return m.context_dim; },
                    },
                    arch_);
}

std::size_t RewardModel::num_params() const noexcept { return num_params_; }

bool RewardModel::bounded_output() const noexcept {
  const auto* lin = std::get_if<Linear>(&arch_);
  return lin == nullptr || lin->output == OutputSquash::kLogistic;
}

std::string RewardModel::describe() const {
  std::ostringstream out;
  out << to_string(family()) << "(K=" << num_actions() << ", n_d=" << context_dim()
      << ", n_x=" << num_params();
  if (const auto* m = std::get_if<Mlp>(&arch_)) {
    out << ", hidden=";
    for (std::size_t i = 0; i < m->hidden.size(); ++i) out << (i ? "," : "") << m->hidden[i];
  }
  if (!bounded_output()) out << ", output=identity";
  out << ")";
  return out.str();
}

void RewardModel::check_shapes(const ParamVector& x, std::span<const double> d) const {
  if (x.size() != num_params_)
    throw ShapeError("parameter vector has " + std::to_string(x.size()) + " entries, model expects " +
                     std::to_string(num_params_));
  if (d.size() != context_dim())
    throw ShapeError("context has " + std::to_string(d.size()) + " entries, model expects " +
                     std::to_string(context_dim()));
}

void RewardModel::check_action(std::size_t a) const {
  if (a >= num_actions())
    throw IndexError("action " + std::to_string(a) + " out of range for K=" +
                     std::to_string(num_actions()));
}

std::vector<double> RewardModel::predict(const ParamVector& x, std::span<const double> d) const {
  check_shapes(x, d);
  return std::visit(
      Overloaded{
          [&](const ToyTrig&) {
            const ToyTerms t = toy_terms(d[0], x[0]);
            return std::vector<double>{0.2 * t.sin2 + 0.8 * t.gauss, 0.8 * t.sin2 + 0.2 * t.gauss};
          },
          [&](const Linear& m) {
            std::vector<double> out(m.actions);
            const std::size_t stride = m.context_dim + 1;
            for (std::size_t a = 0; a < m.actions; ++a) {
              double z = x[a * stride + m.context_dim];
              for (std::size_t i = 0; i < m.context_dim; ++i) z += x[a * stride + i] * d[i];
              out[a] = m.output == OutputSquash::kLogistic ? logistic(z) : z;
            }
            return out;
          },
          [&](const Mlp& m) {
            MlpForward fwd = mlp_forward(m, x.view(), d);
            for (double& z : fwd.logits) z = logistic(z);
            return fwd.logits;
          },
      },
      arch_);
}

double RewardModel::output_gradient(const ParamVector& x, std::span<const double> d,
                                    std::size_t a, std::span<double> grad) const {
  check_shapes(x, d);
  check_action(a);
  if (grad.size() != num_params_) throw ShapeError("gradient buffer has wrong length");
  std::fill(grad.begin(), grad.end(), 0.0);
  return std::visit(
      Overloaded{
          [&](const ToyTrig&) {
            const ToyTerms t = toy_terms(d[0], x[0]);
            const double ws = a == 0 ? 0.2 : 0.8;
            const double wg = 1.0 - ws;
            grad[0] = ws * t.dsin2 + wg * t.dgauss;
            return ws * t.sin2 + wg * t.gauss;
          },
          [&](const Linear& m) {
            const std::size_t stride = m.context_dim + 1;
            const std::size_t row = a * stride;
            double z = x[row + m.context_dim];
            for (std::size_t i = 0; i < m.context_dim; ++i) z += x[row + i] * d[i];
            double f = z;
            double dfdz = 1.0;
            if (m.output == OutputSquash::kLogistic) {
              f = logistic(z);
              dfdz = f * (1.0 - f);
            }
            for (std::size_t i = 0; i < m.context_dim; ++i) grad[row + i] = dfdz * d[i];
            grad[row + m.context_dim] = dfdz;
            return f;
          },
          [&](const Mlp& m) {
            const MlpForward fwd = mlp_forward(m, x.view(), d);
            const double f = logistic(fwd.logits[a]);

            // Offsets of each layer's weight block.
            std::vector<std::size_t> offsets;
            std::size_t offset = 0;
            for (std::size_t l = 0; l < m.hidden.size(); ++l) {
              offsets.push_back(offset);
              offset += m.hidden[l] * fwd.activations[l].size() + m.hidden[l];
            }
            const std::size_t out_offset = offset;

            // Output layer: only row a contributes to f_a.
            const auto& last = fwd.activations.back();
            const double dz = f * (1.0 - f);
            const std::size_t out_w = out_offset + a * last.size();
            const std::size_t out_b = out_offset + m.actions * last.size() + a;
            std::vector<double> delta(last.size());
            for (std::size_t i = 0; i < last.size(); ++i) {
              grad[out_w + i] = dz * last[i];
              delta[i] = dz * x[out_w + i];
            }
            grad[out_b] = dz;

            for (std::size_t l = m.hidden.size(); l-- > 0;) {
              const auto& in = fwd.activations[l];
              const auto& out = fwd.activations[l + 1];
              const std::size_t width = m.hidden[l];
              const std::size_t w0 = offsets[l];
              const std::size_t b0 = w0 + width * in.size();
              std::vector<double> next(in.size(), 0.0);
              for (std::size_t j = 0; j < width; ++j) {
                const double dj = delta[j] * (1.0 - out[j] * out[j]);
                grad[b0 + j] = dj;
                for (std::size_t i = 0; i < in.size(); ++i) {
                  grad[w0 + j * in.size() + i] = dj * in[i];
                  next[i] += dj * x[w0 + j * in.size() + i];
                }
              }
              delta = std::move(next);
            }
            return f;
          },
      },
      arch_);
}

double RewardModel::loss(const ParamVector& x, std::span<const double> d, std::size_t a,
                         double r) const {
  check_action(a);
  const double diff = predict(x, d)[a] - r;
  return diff * diff;
}

ParamVector RewardModel::loss_gradient(const ParamVector& x, std::span<const double> d,
                                       std::size_t a, double r) const {
  ParamVector grad(num_params_);
  const double f = output_gradient(x, d, a, grad.view());
  const double scale = 2.0 * (f - r);
  for (double& g : grad.view()) g *= scale;
  return grad;
}

ParamVector RewardModel::initial_params(Rng& init, double toy_start) const {
  return std::visit(Overloaded{
                        [&](const ToyTrig&) { return ParamVector(1, toy_start); },
                        [&](const Linear&) { return ParamVector(num_params_); },
                        [&](const Mlp& m) {
                          ParamVector x(num_params_);
                          std::size_t offset = 0;
                          std::size_t fan_in = m.context_dim;
                          auto fill = [&](std::size_t count, std::size_t fan) {
                            const double bound = 1.0 / std::sqrt(static_cast<double>(fan));
                            for (std::size_t i = 0; i < count; ++i)
                              x[offset + i] = bound * (2.0 * init.uniform() - 1.0);
                            offset += count;
                          };
                          for (std::size_t width : m.hidden) {
                            fill(width * fan_in + width, fan_in);
                            fan_in = width;
                          }
                          fill(m.actions * fan_in + m.actions, fan_in);
                          return x;
                        },
                    },
                    arch_);
}

ParamVector fd_loss_gradient(const RewardModel& model, const ParamVector& x,
                             std::span<const double> d, std::size_t a, double r, double h) {
  if (!(h > 0.0)) throw ValidationError("finite-difference step must be positive");
  ParamVector grad(x.size());
  ParamVector probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = model.loss(probe, d, a, r);
    probe[i] = x[i] - h;
    const double down = model.loss(probe, d, a, r);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace sscb
