#pragma once

// Logistic reachability classifier over scalar Q-values, trained from
// positive (hindsight) and unlabeled (uniform-goal) examples.

#include <span>
#include <string_view>

namespace rws {

enum class PuVariant {
  // eta_p E_P[-log c] + max(0, E_U[-log(1-c)] - eta_p E_P[-log(1-c)])
  StandardNnpu,
  // The same risk with the max argument negated:
  // eta_p E_P[-log c] - max(0, E_U[log(1-c)] - eta_p E_P[log(1-c)]).
  // Unbounded below once positives and unlabeled data separate.
  Literal,
};

// Config spellings: "standard_nnpu", "paper_literal".
std::string_view pu_variant_name(PuVariant v) noexcept;
PuVariant parse_pu_variant(std::string_view name);

inline constexpr double kDefaultEtaP = 0.5;
inline constexpr double kLogitClamp = 30.0;

struct ReachabilityClassifier {
  double slope = 0.0;
  double intercept = 0.0;
  double eta_p = kDefaultEtaP;
  PuVariant variant = PuVariant::StandardNnpu;

  friend bool operator==(const ReachabilityClassifier&, const ReachabilityClassifier&) = default;
};

// Throws ValidationError unless eta_p is in (0, 1) and both parameters are finite.
void validate(const ReachabilityClassifier& c);

// sigmoid(clamp(slope * q + intercept, -30, 30)). Throws on non-finite q.
double score(const ReachabilityClassifier& c, double q);

// PU risk from classifier outputs. Throws ValidationError when a list is empty.
double pu_loss(std::span<const double> pos_scores, std::span<const double> unl_scores,
               double eta_p, PuVariant variant);

struct PuGradient {
  double loss = 0.0;
  double d_slope = 0.0;
  double d_intercept = 0.0;
};

// Loss and gradient with respect to (slope, intercept); Q-values are
// constants. Where the max is clamped the clamped term contributes nothing;
// so does any pre-activation outside the +-30 clamp.
PuGradient pu_gradient(const ReachabilityClassifier& c, std::span<const double> q_pos,
                       std::span<const double> q_unl);

// One gradient-descent step; returns the updated classifier.
ReachabilityClassifier classifier_update(const ReachabilityClassifier& c,
                                         std::span<const double> q_pos,
                                         std::span<const double> q_unl, double lr);

}  // namespace rws
