#pragma once

#include <array>
#include <string>
#include <vector>

#include "squall/errors.hpp"

namespace squall {

// One multiplicative term of a nonlinearity: coeff * s1^a * s2^b * |xi1|^c * |xi2|^d.
// coeff must be positive; gradient exponents must be nonnegative.
struct Term {
  double coeff = 1.0;
  double pow_s1 = 0.0;
  double pow_s2 = 0.0;
  double pow_xi1 = 0.0;
  double pow_xi2 = 0.0;
};

bool operator==(const Term& a, const Term& b);

// Sum of positive terms. Grammar (whitespace-insensitive):
//   expr   := term ('+' term)*
//   term   := factor ('*' factor)*
//   factor := atom ('^' signed-number)?
//   atom   := 's1' | 's2' | '|xi1|' | '|xi2|' | number
// Constant atoms fold into the term coefficient. Repeated atoms in a term
// accumulate their exponents.
struct NonlinearityRule {
  std::vector<Term> terms;

  // xi arguments are magnitudes; signs are ignored.
  double operator()(double s1, double s2, double xi1, double xi2) const;

  // True when some term carries no gradient factor, which makes the rule
  // strictly positive for positive s1, s2.
  bool has_gradient_free_term() const;

  std::string str() const;
};

bool operator==(const NonlinearityRule& a, const NonlinearityRule& b);

NonlinearityRule parse_rule(const std::string& text);

// Full problem description: two quasilinear equations with exponents p,
// singularity exponents alpha/beta, gradient growth gamma/theta, envelope
// constants m <= M, integrability exponents r, and the two nonlinearities.
// Index 0 is the first equation, index 1 the second.
struct SystemSpec {
  int N = 2;
  std::array<double, 2> p{2.0, 2.0};
  std::array<double, 2> alpha{0.0, 0.0};
  std::array<double, 2> beta{0.0, 0.0};
  std::array<double, 2> gamma{0.0, 0.0};
  std::array<double, 2> theta{0.0, 0.0};
  std::array<double, 2> m{1.0, 1.0};
  std::array<double, 2> M{1.0, 1.0};
  std::array<double, 2> r{3.0, 3.0};
  std::array<NonlinearityRule, 2> f;
  // Marks rules written as `expr = auto`; such rules are regenerated from
  // m, alpha, beta whenever those change (parameter sweeps mutate them).
  std::array<bool, 2> f_is_auto{true, true};
};

// Rebuilds every auto rule as m_i * s1^alpha_i * s2^beta_i.
void apply_auto_rules(SystemSpec& spec);

// Throws ConfigError when structural requirements fail: p_i > 1,
// gamma/theta >= 0, 0 < m_i <= M_i, N in {1, 2}, r_i > 0, and each rule has a
// gradient-free term (strict positivity) with positive coefficients.
void validate_spec_shape(const SystemSpec& spec);

// Evaluates f_i at (s1, s2, |xi1|, |xi2|); i is 0-based.
// Throws DomainError when s1 <= 0 or s2 <= 0.
double eval_f(const SystemSpec& spec, int i, double s1, double s2, double xi1,
              double xi2);

// One admissibility condition. margin measures how far inside the feasible
// region the parameters sit; negative means violated by that amount. Rows
// with a closed end pass at margin == 0, strict rows require margin > 0.
struct ConditionCheck {
  std::string name;
  bool pass = false;
  double margin = 0.0;
};

struct AdmissibilityReport {
  std::vector<ConditionCheck> checks;
  bool admissible = false;
};

// Checks, per equation i: r_i > N; -1/r_i <= alpha_i+beta_i < (p_i-1)/r_i;
// max(gamma_i, theta_i) < (p_i-1)/r_i; and the derived gradient-growth
// bounds max_i(gamma_i * p_i') < p_1, max_i(theta_i * p_i') < p_2 with
// p' = p/(p-1). Report-only; never throws.
AdmissibilityReport validate_cdt(const SystemSpec& spec);

struct EnvelopeReport {
  int samples = 0;
  // Worst slack of f_i - m_i*s1^a*s2^b (lower) and bound - f_i (upper)
  // over all sampled tuples, per equation.
  std::array<double, 2> worst_lower{0.0, 0.0};
  std::array<double, 2> worst_upper{0.0, 0.0};
};

// Samples random tuples (s1, s2 log-uniform in [1e-3, 1e3]; |xi| uniform in
// [0, 100]) and checks m_i*s1^a*s2^b <= f_i <= M_i*s1^a*s2^b +
// |xi1|^gamma_i + |xi2|^theta_i. Throws EnvelopeViolation naming the first
// violating tuple.
EnvelopeReport check_envelope(const SystemSpec& spec, int samples,
                              unsigned seed = 20260814u);

// Config round-trip. Sections: [domain] N; [exponents] p1 p2 alpha1 alpha2
// beta1 beta2 gamma1 gamma2 theta1 theta2 r1 r2; [envelope] m1 m2 M1 M2;
// [f1]/[f2] expr = <rule text> | auto. Numbers print with enough digits to
// reparse to the identical double.
SystemSpec parse_spec_config(const std::string& text);
std::string write_spec_config(const SystemSpec& spec);
SystemSpec load_spec_config(const std::string& path);
void save_spec_config(const SystemSpec& spec, const std::string& path);

}  // namespace squall
