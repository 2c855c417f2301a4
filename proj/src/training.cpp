#include "qbm/training.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qbm {

ParameterGradient ParameterGradient::zeros(const ModelParameters& p) {
  ParameterGradient g;
  g.bias = Eigen::VectorXd::Zero(p.qubits());
  g.coupling = Eigen::VectorXd::Zero(p.pair_count());
  g.gamma = Eigen::VectorXd::Zero(p.qubits());
  return g;
}

double ParameterGradient::inf_norm() const {
  double m = 0.0;
  if (bias.size()) m = std::max(m, bias.cwiseAbs().maxCoeff());
  if (coupling.size()) m = std::max(m, coupling.cwiseAbs().maxCoeff());
  if (gamma.size()) m = std::max(m, gamma.cwiseAbs().maxCoeff());
  return m;
}

namespace {

void check_data(const ModelParameters& p, const VisibleDistribution& data, const char* where) {
  if (data.variable_count() != p.n_visible) {
    throw std::invalid_argument(std::string(where) + ": data covers " + std::to_string(data.variable_count()) +
                                " variables, model has " + std::to_string(p.n_visible) + " visible qubits");
  }
}

void zero_masked(const ModelParameters& p, ParameterGradient& g) {
  for (int k = 0; k < p.pair_count(); ++k) {
    if (!p.coupling_mask[static_cast<std::size_t>(k)]) g.coupling(k) = 0.0;
  }
}

double log_2cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a));
}

}  // namespace

bool hidden_layer_factorized(const ModelParameters& p) {
  const int n = p.qubits();
  for (int a = p.n_visible; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (p.coupling_mask[static_cast<std::size_t>(p.pair_index(a, b))]) return false;
    }
  }
  return true;
}

namespace {

// Clamped averages sum_v P_data(v) <O>_v and sum_v P_data(v) log Tr e^{-H_v}.
struct PositivePhaseSums {
  Eigen::VectorXd z;
  Eigen::VectorXd zz;
  Eigen::VectorXd x;
  double log_clamped = 0.0;
};

enum class HiddenSolver { diagonalize, analytic_quantum, analytic_classical };

PositivePhaseSums positive_phase(const ModelParameters& p, const VisibleDistribution& data, HiddenSolver solver,
                                 bool with_gradient, bool with_gamma) {
  const int n = p.qubits();
  const int nv = p.n_visible;
  const int nh = p.n_hidden;
  PositivePhaseSums s;
  s.z = Eigen::VectorXd::Zero(n);
  s.zz = Eigen::VectorXd::Zero(p.pair_count());
  s.x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd hz(nh), hzz(nh * (nh - 1) / 2), hx(nh);
  for (Eigen::Index v = 0; v < data.size(); ++v) {
    const double pd = data.probabilities()(v);
    if (pd == 0.0) continue;
    const SpinVector spins = SpinVector::from_index(static_cast<BasisIndex>(v), nv);
    const ClampedModel clamped = clamp_visible(p, spins);
    const ModelParameters& h = clamped.hidden;
    double log_hidden = 0.0;
    hz.setZero();
    hzz.setZero();
    hx.setZero();
    if (nh > 0 && solver == HiddenSolver::diagonalize) {
      const GibbsState hs(h);
      log_hidden = hs.log_partition();
      if (with_gradient) {
        z_moments(hs.probabilities(), nh, hz, hzz);
        if (with_gamma && !hs.classical()) hx = hs.x_expectations();
      }
    } else if (nh > 0) {
      const PositivePhase mode =
          solver == HiddenSolver::analytic_quantum ? PositivePhase::quantum : PositivePhase::classical;
      for (int i = 0; i < nh; ++i) {
        const double b = h.bias(i);
        const double g = mode == PositivePhase::quantum ? h.gamma(i) : 0.0;
        const double d = std::hypot(g, b);
        log_hidden += log_2cosh(d);
        hz(i) = rqbm_hidden_expectation(h.gamma(i), b, mode);
        hx(i) = d == 0.0 ? 0.0 : g / d * std::tanh(d);
      }
      int k = 0;
      for (int i = 0; i < nh; ++i) {
        for (int j = i + 1; j < nh; ++j) hzz(k++) = hz(i) * hz(j);
      }
    }
    s.log_clamped += pd * (log_hidden - clamped.offset);
    if (!with_gradient) continue;
    for (int a = 0; a < n; ++a) {
      const double za = a < nv ? spins[a] : hz(a - nv);
      s.z(a) += pd * za;
      for (int b = a + 1; b < n; ++b) {
        double zab;
        if (b < nv) {
          zab = spins[a] * spins[b];
        } else if (a < nv) {
          zab = spins[a] * hz(b - nv);
        } else {
          zab = hzz(h.pair_index(a - nv, b - nv));
        }
        s.zz(p.pair_index(a, b)) += pd * zab;
      }
    }
    for (int i = 0; i < nh; ++i) s.x(nv + i) += pd * hx(i);
  }
  return s;
}

// dL/dtheta = -<O>_clamped + <O> for dH/dtheta = -O.
LossAndGradient bound_from_phases(const ModelParameters& p, const GibbsState& state, const PositivePhaseSums& pos,
                                  bool with_gradient, bool with_gamma) {
  LossAndGradient out;
  out.loss = state.log_partition() - pos.log_clamped;
  if (!std::isfinite(out.loss)) throw NumericalError("bound loss is not finite");
  out.gradient = ParameterGradient::zeros(p);
  if (!with_gradient) return out;
  Eigen::VectorXd z, zz;
  z_moments(state.probabilities(), p.qubits(), z, zz);
  out.gradient.bias = z - pos.z;
  out.gradient.coupling = zz - pos.zz;
  if (with_gamma) {
    out.gradient.gamma = state.x_expectations() - pos.x;
  }
  zero_masked(p, out.gradient);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

LossAndGradient evaluate_exact(const ModelParameters& p, const VisibleDistribution& data, const GibbsState& state,
                               bool with_gradient) {
  check_data(p, data, "nll_exact");
  const int n = p.qubits();
  const int nh = p.n_hidden;
  const Eigen::VectorXd marginal = state.leading_marginal(p.n_visible);
  const Eigen::VectorXd& pd = data.probabilities();
  LossAndGradient out;
  Eigen::VectorXd ratio = Eigen::VectorXd::Zero(pd.size());
  for (Eigen::Index v = 0; v < pd.size(); ++v) {
    if (pd(v) == 0.0) continue;
    if (!(marginal(v) >= 1e-300)) {
      throw NumericalError("nll_exact: model probability of a data state underflows");
    }
    out.loss -= pd(v) * std::log(marginal(v));
    ratio(v) = pd(v) / marginal(v);
  }
  out.gradient = ParameterGradient::zeros(p);
  if (!with_gradient) return out;

  const Eigen::Index d = state.probabilities().size();
  Eigen::VectorXd zd, zzd, z, zz;
  z_moments(state.probabilities(), n, z, zz);
  if (state.classical()) {
    Eigen::VectorXd clamped(d);
    for (Eigen::Index i = 0; i < d; ++i) clamped(i) = ratio(i >> nh) * state.probabilities()(i);
    z_moments(clamped, n, zd, zzd);
    out.gradient.bias = z - zd;
    out.gradient.coupling = zz - zzd;
    zero_masked(p, out.gradient);
    return out;
  }

  // With W = diag(r_i / sum(w)), G = V ((V^T W V) o K) V^T and dH = -O the
  // positive term is -Tr[G O]; only diag(G) and the bit-flip entries
  // G(i, i ^ m) are needed.
  const Eigen::MatrixXd& vec = state.eigenvectors();
  const Eigen::VectorXd& w = state.weights();
  const double total = w.sum();
  Eigen::MatrixXd scaled(d, d);
  for (Eigen::Index i = 0; i < d; ++i) scaled.row(i) = std::sqrt(ratio(i >> nh) / total) * vec.row(i);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  a.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  scaled = a.selfadjointView<Eigen::Lower>();
  a = scaled.cwiseProduct(gibbs_loewner_kernel(state.energies(), w));
  scaled.resize(0, 0);
  Eigen::MatrixXd b(d, d);
  b.noalias() = vec * a;
  a.resize(0, 0);
  const Eigen::VectorXd g_diag = b.cwiseProduct(vec).rowwise().sum();
  z_moments(g_diag, n, zd, zzd);
  out.gradient.bias = zd + z;
  out.gradient.coupling = zzd + zz;
  const Eigen::VectorXd x = state.x_expectations();
  for (int q = 0; q < n; ++q) {
    const auto m = static_cast<Eigen::Index>(qubit_mask(q, n));
    double acc = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double* bk = b.col(k).data();
      const double* vk = vec.col(k).data();
      for (Eigen::Index i = 0; i < d; ++i) acc += bk[i] * vk[i ^ m];
    }
    out.gradient.gamma(q) = acc + x(q);
  }
  zero_masked(p, out.gradient);
  return out;
}

double nll_exact(const ModelParameters& p, const VisibleDistribution& data) {
  check_data(p, data, "nll_exact");
  return evaluate_exact(p, data, GibbsState(p), false).loss;
}

ParameterGradient grad_exact(const ModelParameters& p, const VisibleDistribution& data) {
  check_data(p, data, "grad_exact");
  return evaluate_exact(p, data, GibbsState(p), true).gradient;
}

LossAndGradient evaluate_bound(const ModelParameters& p, const VisibleDistribution& data, const GibbsState& state,
                               bool with_gradient, bool with_gamma) {
  check_data(p, data, "nll_bound");
  const auto pos = positive_phase(p, data, HiddenSolver::diagonalize, with_gradient, with_gamma);
  return bound_from_phases(p, state, pos, with_gradient, with_gamma);
}

double nll_bound(const ModelParameters& p, const VisibleDistribution& data) {
  check_data(p, data, "nll_bound");
  return evaluate_bound(p, data, GibbsState(p), false).loss;
}

ParameterGradient grad_bound(const ModelParameters& p, const VisibleDistribution& data, bool with_gamma) {
  check_data(p, data, "grad_bound");
  return evaluate_bound(p, data, GibbsState(p), true, with_gamma).gradient;
}

double rqbm_hidden_expectation(double gamma, double b_eff, PositivePhase mode) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("rqbm_hidden_expectation: transverse field must be non-negative");
  if (mode == PositivePhase::classical) return std::tanh(b_eff);
  const double d = std::hypot(gamma, b_eff);
  if (d == 0.0) return 0.0;
  return b_eff / d * std::tanh(d);
}

LossAndGradient evaluate_bound_semirestricted(const ModelParameters& p, const VisibleDistribution& data,
                                              const GibbsState& state, PositivePhase mode, bool with_gradient,
                                              bool with_gamma) {
  check_data(p, data, "grad_bound_semirestricted");
  if (!hidden_layer_factorized(p)) {
    throw std::invalid_argument("grad_bound_semirestricted: model enables hidden-hidden couplings");
  }
  const auto solver = mode == PositivePhase::quantum ? HiddenSolver::analytic_quantum
                                                     : HiddenSolver::analytic_classical;
  const auto pos = positive_phase(p, data, solver, with_gradient, with_gamma);
  return bound_from_phases(p, state, pos, with_gradient, with_gamma);
}

ParameterGradient grad_bound_semirestricted(const ModelParameters& p, const VisibleDistribution& data,
                                            PositivePhase mode, bool with_gamma) {
  return evaluate_bound_semirestricted(p, data, GibbsState(p), mode, true, with_gamma).gradient;
}

double nll_bound_semirestricted(const ModelParameters& p, const VisibleDistribution& data, PositivePhase mode) {
  return evaluate_bound_semirestricted(p, data, GibbsState(p), mode, false).loss;
}

double kl_divergence(const VisibleDistribution& model, const VisibleDistribution& data) {
  if (model.variable_count() != data.variable_count()) {
    throw std::invalid_argument("kl_divergence: variable counts differ");
  }
  double kl = 0.0;
  for (Eigen::Index v = 0; v < data.size(); ++v) {
    const double pd = data.probabilities()(v);
    if (pd == 0.0) continue;
    const double pm = model.probabilities()(v);
    if (!(pm > 0.0)) throw std::invalid_argument("kl_divergence: model assigns zero probability to a data state");
    kl += pd * std::log(pd / pm);
  }
  return std::max(kl, 0.0);
}

ParameterGradient finite_difference_gradient(const std::function<double(const ModelParameters&)>& loss,
                                             const ModelParameters& p, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite_difference_gradient: eps must be positive");
  ParameterGradient g = ParameterGradient::zeros(p);
  ModelParameters probe = p;
  probe.shared_gamma = false;
  auto central = [&](double& slot) {
    const double saved = slot;
    slot = saved + eps;
    const double up = loss(probe);
    slot = saved - eps;
    const double down = loss(probe);
    slot = saved;
    return (up - down) / (2.0 * eps);
  };
  for (int a = 0; a < p.qubits(); ++a) g.bias(a) = central(probe.bias(a));
  for (int k = 0; k < p.pair_count(); ++k) {
    if (p.coupling_mask[static_cast<std::size_t>(k)]) g.coupling(k) = central(probe.coupling(k));
  }
  for (int a = 0; a < p.qubits(); ++a) {
    if (p.gamma(a) >= eps) g.gamma(a) = central(probe.gamma(a));
  }
  return g;
}

// ---------------------------------------------------------------------------

double generative_supervised_loss(const ModelParameters& p, const VisibleDistribution& joint) {
  return nll_exact(p, joint);
}

namespace {

void check_inputs(const ModelParameters& p, int n_inputs, const VisibleDistribution& joint) {
  check_data(p, joint, "conditional_nll");
  if (n_inputs < 0 || n_inputs >= p.n_visible) {
    throw std::invalid_argument("conditional_nll: input count must leave at least one visible output");
  }
}

}  // namespace

double conditional_nll(const ModelParameters& p, const GibbsState& state, int n_inputs,
                       const VisibleDistribution& joint, ConditionalKind kind) {
  check_inputs(p, n_inputs, joint);
  const int n_out = p.n_visible - n_inputs;
  const auto width = static_cast<Eigen::Index>(basis_dimension(n_out));
  const Eigen::VectorXd& pd = joint.probabilities();
  const Eigen::VectorXd model = kind == ConditionalKind::exact ? state.leading_marginal(p.n_visible)
                                                               : Eigen::VectorXd();
  double loss = 0.0;
  for (Eigen::Index xi = 0; xi < pd.size() / width; ++xi) {
    const auto rows = pd.segment(xi * width, width);
    if (rows.sum() == 0.0) continue;
    Eigen::VectorXd cond;
    if (kind == ConditionalKind::exact) {
      cond = model.segment(xi * width, width);
      const double px = cond.sum();
      if (!(px >= 1e-300)) throw NumericalError("conditional_nll: P(x) is numerically zero");
      cond /= px;
    } else {
      cond = clamped_conditional_distribution(p, n_inputs, SpinVector::from_index(static_cast<BasisIndex>(xi), n_inputs))
                 .probabilities();
    }
    for (Eigen::Index y = 0; y < width; ++y) {
      if (rows(y) == 0.0) continue;
      if (!(cond(y) >= 1e-300)) throw NumericalError("conditional_nll: conditional probability underflows");
      loss -= rows(y) * std::log(cond(y));
    }
  }
  return loss;
}

double conditional_nll(const ModelParameters& p, int n_inputs, const VisibleDistribution& joint,
                       ConditionalKind kind) {
  check_inputs(p, n_inputs, joint);
  return conditional_nll(p, GibbsState(p), n_inputs, joint, kind);
}

double conditional_entropy(const VisibleDistribution& joint, int n_inputs) {
  if (n_inputs < 0 || n_inputs > joint.variable_count()) {
    throw std::invalid_argument("conditional_entropy: input count out of range");
  }
  const auto width = static_cast<Eigen::Index>(basis_dimension(joint.variable_count() - n_inputs));
  const Eigen::VectorXd& pd = joint.probabilities();
  double h = 0.0;
  for (Eigen::Index xi = 0; xi < pd.size() / width; ++xi) {
    const auto rows = pd.segment(xi * width, width);
    const double px = rows.sum();
    for (Eigen::Index y = 0; y < width; ++y) {
      if (rows(y) > 0.0) h -= rows(y) * std::log(rows(y) / px);
    }
  }
  return h;
}

// ---------------------------------------------------------------------------

ParameterPacking::ParameterPacking(ModelParameters reference, GammaMode mode)
    : reference_(std::move(reference)), mode_(mode) {
  reference_.validate();
  for (int k = 0; k < reference_.pair_count(); ++k) {
    if (reference_.coupling_mask[static_cast<std::size_t>(k)]) enabled_pairs_.push_back(k);
  }
  const int n = reference_.qubits();
  if (mode_ == GammaMode::shared) {
    reference_.shared_gamma = true;
    if (n > 0 && reference_.gamma.maxCoeff() != reference_.gamma.minCoeff()) {
      throw std::invalid_argument("ParameterPacking: shared mode needs equal transverse fields");
    }
  } else if (mode_ == GammaMode::per_qubit) {
    reference_.shared_gamma = false;
  }
  const Eigen::Index gammas = mode_ == GammaMode::fixed ? 0 : (mode_ == GammaMode::shared ? (n > 0 ? 1 : 0) : n);
  size_ = n + static_cast<Eigen::Index>(enabled_pairs_.size()) + gammas;
}

Eigen::VectorXd ParameterPacking::pack(const ModelParameters& p) const {
  const int n = reference_.qubits();
  if (p.qubits() != n) throw std::invalid_argument("ParameterPacking::pack: qubit count mismatch");
  Eigen::VectorXd theta(size_);
  theta.head(n) = p.bias;
  Eigen::Index k = n;
  for (int pair : enabled_pairs_) theta(k++) = p.coupling(pair);
  if (mode_ == GammaMode::shared && n > 0) theta(k) = p.gamma(0);
  if (mode_ == GammaMode::per_qubit) theta.tail(n) = p.gamma;
  return theta;
}

ModelParameters ParameterPacking::unpack(const Eigen::VectorXd& theta) const {
  if (theta.size() != size_) throw std::invalid_argument("ParameterPacking::unpack: vector size mismatch");
  const int n = reference_.qubits();
  ModelParameters p = reference_;
  p.bias = theta.head(n);
  Eigen::Index k = n;
  for (int pair : enabled_pairs_) p.coupling(pair) = theta(k++);
  if (mode_ == GammaMode::shared && n > 0) p.gamma.setConstant(std::abs(theta(k)));
  if (mode_ == GammaMode::per_qubit) p.gamma = theta.tail(n).cwiseAbs();
  return p;
}

Eigen::VectorXd ParameterPacking::pack_gradient(const ParameterGradient& g, const Eigen::VectorXd& theta) const {
  const int n = reference_.qubits();
  Eigen::VectorXd out(size_);
  out.head(n) = g.bias;
  Eigen::Index k = n;
  for (int pair : enabled_pairs_) out(k++) = g.coupling(pair);
  auto sign = [](double t) { return t < 0.0 ? -1.0 : 1.0; };
  if (mode_ == GammaMode::shared && n > 0) out(k) = g.shared_gamma() * sign(theta(k));
  if (mode_ == GammaMode::per_qubit) {
    for (int a = 0; a < n; ++a) out(k + a) = g.gamma(a) * sign(theta(k + a));
  }
  return out;
}

}  // namespace qbm
