#include "rws/reach.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rws/error.hpp"

namespace rws {

namespace {

double clamped_logit(const ReachabilityClassifier& c, double q) {
  return std::clamp(c.slope * q + c.intercept, -kLogitClamp, kLogitClamp);
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double mean_neg_log(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s -= std::log(x);
  return s / static_cast<double>(v.size());
}

double mean_neg_log1m(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s -= std::log1p(-x);
  return s / static_cast<double>(v.size());
}

// Which side of the max contributes: the unlabeled-minus-positive negative
// risk for the standard form, its negation for the literal one.
bool negative_term_active(double inner, PuVariant variant) {
  return variant == PuVariant::StandardNnpu ? inner > 0.0 : inner < 0.0;
}

}  // namespace

std::string_view pu_variant_name(PuVariant v) noexcept {
  return v == PuVariant::StandardNnpu ? "standard_nnpu" : "paper_literal";
}

PuVariant parse_pu_variant(std::string_view name) {
  if (name == "standard_nnpu") return PuVariant::StandardNnpu;
  if (name == "paper_literal") return PuVariant::Literal;
  throw ValidationError("unknown PU variant '" + std::string(name) + "'");
}

void validate(const ReachabilityClassifier& c) {
  if (!(c.eta_p > 0.0 && c.eta_p < 1.0)) throw ValidationError("eta_p must lie in (0, 1)");
  if (!std::isfinite(c.slope) || !std::isfinite(c.intercept)) {
    throw ValidationError("classifier parameters must be finite");
  }
}

double score(const ReachabilityClassifier& c, double q) {
  if (!std::isfinite(q)) throw ValidationError("cannot score a non-finite Q-value");
  return sigmoid(clamped_logit(c, q));
}

double pu_loss(std::span<const double> pos_scores, std::span<const double> unl_scores,
               double eta_p, PuVariant variant) {
  if (pos_scores.empty() || unl_scores.empty()) {
    throw ValidationError("PU loss needs nonempty positive and unlabeled batches");
  }
  const double positive_risk = eta_p * mean_neg_log(pos_scores);
  // E_U[-log(1-c)] - eta_p E_P[-log(1-c)]
  const double inner = mean_neg_log1m(unl_scores) - eta_p * mean_neg_log1m(pos_scores);
  return variant == PuVariant::StandardNnpu ? positive_risk + std::max(0.0, inner)
                                            : positive_risk + std::min(0.0, inner);
}

PuGradient pu_gradient(const ReachabilityClassifier& c, std::span<const double> q_pos,
                       std::span<const double> q_unl) {
  if (q_pos.empty() || q_unl.empty()) {
    throw ValidationError("PU gradient needs nonempty positive and unlabeled batches");
  }
  std::vector<double> pos(q_pos.size());
  std::vector<double> unl(q_unl.size());
  for (std::size_t i = 0; i < q_pos.size(); ++i) pos[i] = score(c, q_pos[i]);
  for (std::size_t i = 0; i < q_unl.size(); ++i) unl[i] = score(c, q_unl[i]);

  const double inner = mean_neg_log1m(unl) - c.eta_p * mean_neg_log1m(pos);
  const bool active = negative_term_active(inner, c.variant);

  PuGradient g;
  g.loss = pu_loss(pos, unl, c.eta_p, c.variant);
  auto in_clamp = [&](double q) { return std::abs(c.slope * q + c.intercept) < kLogitClamp; };

  const double np = static_cast<double>(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (!in_clamp(q_pos[i])) continue;
    // d(-log s)/dz = s - 1;  d(-log(1-s))/dz = s.
    double dz = c.eta_p * (pos[i] - 1.0);
    if (active) dz -= c.eta_p * pos[i];
    dz /= np;
    g.d_slope += dz * q_pos[i];
    g.d_intercept += dz;
  }
  if (active) {
    const double nu = static_cast<double>(unl.size());
    for (std::size_t i = 0; i < unl.size(); ++i) {
      if (!in_clamp(q_unl[i])) continue;
      const double dz = unl[i] / nu;
      g.d_slope += dz * q_unl[i];
      g.d_intercept += dz;
    }
  }
  return g;
}

ReachabilityClassifier classifier_update(const ReachabilityClassifier& c,
                                         std::span<const double> q_pos,
                                         std::span<const double> q_unl, double lr) {
  const PuGradient g = pu_gradient(c, q_pos, q_unl);
  ReachabilityClassifier out = c;
  out.slope -= lr * g.d_slope;
  out.intercept -= lr * g.d_intercept;
  return out;
}

}  // namespace rws
