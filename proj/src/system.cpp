#include "squall/system.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace squall {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

// --- rule parser ----------------------------------------------------------

enum class TokKind { Number, S1, S2, Xi1, Xi2, Plus, Star, Caret, End };

struct Token {
  TokKind kind;
  double value = 0.0;
  size_t pos = 0;
};

class RuleLexer {
 public:
  explicit RuleLexer(const std::string& text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    const size_t at = pos_;
    if (pos_ >= text_.size()) return {TokKind::End, 0.0, at};
    const char c = text_[pos_];
    if (c == '+') { ++pos_; return {TokKind::Plus, 0.0, at}; }
    if (c == '*') { ++pos_; return {TokKind::Star, 0.0, at}; }
    if (c == '^') { ++pos_; return {TokKind::Caret, 0.0, at}; }
    if (c == '|') return lex_abs(at);
    if (c == 's') return lex_state(at);
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return lex_number(at, false);
    fail(at, std::string("unexpected character '") + c + "'");
  }

  // Exponents may carry a sign; ordinary atoms may not.
  Token next_signed_number() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    const size_t at = pos_;
    bool neg = false;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      neg = text_[pos_] == '-';
      ++pos_;
    }
    Token t = lex_number(at, true);
    if (neg) t.value = -t.value;
    return t;
  }

  [[noreturn]] void fail(size_t at, const std::string& what) const {
    throw ConfigError("rule parse error at position " + std::to_string(at) +
                      ": " + what + " in \"" + text_ + "\"");
  }

 private:
  Token lex_abs(size_t at) {
    const auto close = text_.find('|', pos_ + 1);
    if (close == std::string::npos) fail(at, "unterminated '|'");
    const std::string inner = text_.substr(pos_ + 1, close - pos_ - 1);
    pos_ = close + 1;
    if (inner == "xi1") return {TokKind::Xi1, 0.0, at};
    if (inner == "xi2") return {TokKind::Xi2, 0.0, at};
    fail(at, "unknown gradient atom |" + inner + "|");
  }

  Token lex_state(size_t at) {
    if (text_.compare(pos_, 2, "s1") == 0) { pos_ += 2; return {TokKind::S1, 0.0, at}; }
    if (text_.compare(pos_, 2, "s2") == 0) { pos_ += 2; return {TokKind::S2, 0.0, at}; }
    fail(at, "unknown identifier");
  }

  Token lex_number(size_t at, bool after_sign) {
    const size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
    }
    if (pos_ == start) fail(at, after_sign ? "expected number after sign" : "expected number");
    try {
      size_t used = 0;
      const std::string chunk = text_.substr(start, pos_ - start);
      const double v = std::stod(chunk, &used);
      if (used != chunk.size()) fail(at, "malformed number \"" + chunk + "\"");
      return {TokKind::Number, v, at};
    } catch (const std::exception&) {
      fail(at, "malformed number");
    }
  }

  const std::string& text_;
  size_t pos_ = 0;
};

class RuleParser {
 public:
  explicit RuleParser(const std::string& text) : lex_(text) { advance(); }

  NonlinearityRule parse() {
    NonlinearityRule rule;
    rule.terms.push_back(parse_term());
    while (cur_.kind == TokKind::Plus) {
      advance();
      rule.terms.push_back(parse_term());
    }
    if (cur_.kind != TokKind::End)
      lex_.fail(cur_.pos, "trailing input");
    return rule;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  Term parse_term() {
    Term t;
    parse_factor(t);
    while (cur_.kind == TokKind::Star) {
      advance();
      parse_factor(t);
    }
    if (t.coeff <= 0.0 || !std::isfinite(t.coeff))
      lex_.fail(cur_.pos, "term coefficient must be positive and finite");
    if (t.pow_xi1 < 0.0 || t.pow_xi2 < 0.0)
      lex_.fail(cur_.pos, "gradient exponent must be nonnegative");
    return t;
  }

  void parse_factor(Term& t) {
    const Token atom = cur_;
    switch (atom.kind) {
      case TokKind::Number:
      case TokKind::S1:
      case TokKind::S2:
      case TokKind::Xi1:
      case TokKind::Xi2:
        break;
      default:
        lex_.fail(atom.pos, "expected an atom (number, s1, s2, |xi1|, |xi2|)");
    }
    advance();
    double expo = 1.0;
    if (cur_.kind == TokKind::Caret) {
      cur_ = lex_.next_signed_number();
      expo = cur_.value;
      advance();
    }
    switch (atom.kind) {
      case TokKind::Number: t.coeff *= std::pow(atom.value, expo); break;
      case TokKind::S1: t.pow_s1 += expo; break;
      case TokKind::S2: t.pow_s2 += expo; break;
      case TokKind::Xi1: t.pow_xi1 += expo; break;
      case TokKind::Xi2: t.pow_xi2 += expo; break;
      default: break;
    }
  }

  RuleLexer lex_;
  Token cur_{TokKind::End, 0.0, 0};
};

void append_factor(std::string& out, const char* name, double expo) {
  if (expo == 0.0) return;
  if (!out.empty()) out += " * ";
  out += name;
  if (expo != 1.0) out += "^" + fmt17(expo);
}

}  // namespace

bool operator==(const Term& a, const Term& b) {
  return a.coeff == b.coeff && a.pow_s1 == b.pow_s1 && a.pow_s2 == b.pow_s2 &&
         a.pow_xi1 == b.pow_xi1 && a.pow_xi2 == b.pow_xi2;
}

bool operator==(const NonlinearityRule& a, const NonlinearityRule& b) {
  return a.terms == b.terms;
}

double NonlinearityRule::operator()(double s1, double s2, double xi1,
                                    double xi2) const {
  double total = 0.0;
  for (const Term& t : terms) {
    double v = t.coeff;
    if (t.pow_s1 != 0.0) v *= std::pow(s1, t.pow_s1);
    if (t.pow_s2 != 0.0) v *= std::pow(s2, t.pow_s2);
    if (t.pow_xi1 != 0.0) v *= std::pow(std::abs(xi1), t.pow_xi1);
    if (t.pow_xi2 != 0.0) v *= std::pow(std::abs(xi2), t.pow_xi2);
    total += v;
  }
  return total;
}

bool NonlinearityRule::has_gradient_free_term() const {
  for (const Term& t : terms)
    if (t.pow_xi1 == 0.0 && t.pow_xi2 == 0.0) return true;
  return false;
}

std::string NonlinearityRule::str() const {
  std::string out;
  for (const Term& t : terms) {
    std::string factors;
    append_factor(factors, "s1", t.pow_s1);
    append_factor(factors, "s2", t.pow_s2);
    append_factor(factors, "|xi1|", t.pow_xi1);
    append_factor(factors, "|xi2|", t.pow_xi2);
    std::string piece;
    if (factors.empty()) {
      piece = fmt17(t.coeff);
    } else if (t.coeff == 1.0) {
      piece = factors;
    } else {
      piece = fmt17(t.coeff) + " * " + factors;
    }
    if (!out.empty()) out += " + ";
    out += piece;
  }
  return out;
}

NonlinearityRule parse_rule(const std::string& text) {
  return RuleParser(text).parse();
}

void apply_auto_rules(SystemSpec& spec) {
  for (int i = 0; i < 2; ++i) {
    if (!spec.f_is_auto[i]) continue;
    spec.f[i].terms = {Term{spec.m[i], spec.alpha[i], spec.beta[i], 0.0, 0.0}};
  }
}

void validate_spec_shape(const SystemSpec& spec) {
  if (spec.N != 1 && spec.N != 2)
    throw ConfigError("N must be 1 or 2, got " + std::to_string(spec.N));
  for (int i = 0; i < 2; ++i) {
    const std::string tag = std::to_string(i + 1);
    if (!(spec.p[i] > 1.0))
      throw ConfigError("p" + tag + " must exceed 1, got " + fmt17(spec.p[i]));
    if (spec.gamma[i] < 0.0 || spec.theta[i] < 0.0)
      throw ConfigError("gamma" + tag + " and theta" + tag + " must be nonnegative");
    if (!(spec.m[i] > 0.0) || !(spec.M[i] > 0.0))
      throw ConfigError("envelope constants m" + tag + ", M" + tag + " must be positive");
    if (spec.m[i] > spec.M[i])
      throw ConfigError("m" + tag + " must not exceed M" + tag);
    if (!(spec.r[i] > 0.0))
      throw ConfigError("r" + tag + " must be positive");
    if (spec.f[i].terms.empty())
      throw ConfigError("f" + tag + " has no terms");
    if (!spec.f[i].has_gradient_free_term())
      throw ConfigError("f" + tag + " needs a gradient-free term to stay positive");
    for (const Term& t : spec.f[i].terms)
      if (!(t.coeff > 0.0))
        throw ConfigError("f" + tag + " has a nonpositive term coefficient");
  }
}

double eval_f(const SystemSpec& spec, int i, double s1, double s2, double xi1,
              double xi2) {
  if (i < 0 || i > 1) throw ConfigError("equation index must be 0 or 1");
  if (!(s1 > 0.0) || !(s2 > 0.0))
    throw DomainError("f" + std::to_string(i + 1) + " evaluated at nonpositive state (" +
                      fmt17(s1) + ", " + fmt17(s2) + ")");
  return spec.f[i](s1, s2, xi1, xi2);
}

AdmissibilityReport validate_cdt(const SystemSpec& spec) {
  AdmissibilityReport rep;
  auto strict = [&rep](const std::string& name, double margin) {
    rep.checks.push_back({name, margin > 0.0, margin});
  };
  auto closed = [&rep](const std::string& name, double margin) {
    rep.checks.push_back({name, margin >= 0.0, margin});
  };
  for (int i = 0; i < 2; ++i) {
    const std::string t = std::to_string(i + 1);
    const double sum = spec.alpha[i] + spec.beta[i];
    const double cap = (spec.p[i] - 1.0) / spec.r[i];
    strict("r" + t + " > N", spec.r[i] - spec.N);
    closed("alpha" + t + "+beta" + t + " >= -1/r" + t, sum + 1.0 / spec.r[i]);
    strict("alpha" + t + "+beta" + t + " < (p" + t + "-1)/r" + t, cap - sum);
    strict("max(gamma" + t + ",theta" + t + ") < (p" + t + "-1)/r" + t,
           cap - std::max(spec.gamma[i], spec.theta[i]));
  }
  const auto pconj = [&spec](int i) { return spec.p[i] / (spec.p[i] - 1.0); };
  strict("max_i gamma_i*p_i' < p1",
         spec.p[0] - std::max(spec.gamma[0] * pconj(0), spec.gamma[1] * pconj(1)));
  strict("max_i theta_i*p_i' < p2",
         spec.p[1] - std::max(spec.theta[0] * pconj(0), spec.theta[1] * pconj(1)));
  rep.admissible = true;
  for (const auto& c : rep.checks) rep.admissible = rep.admissible && c.pass;
  return rep;
}

EnvelopeReport check_envelope(const SystemSpec& spec, int samples,
                              unsigned seed) {
  validate_spec_shape(spec);
  if (samples <= 0) throw ConfigError("sample count must be positive");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> log10s(-3.0, 3.0);
  std::uniform_real_distribution<double> ximag(0.0, 100.0);
  EnvelopeReport rep;
  rep.samples = samples;
  rep.worst_lower = {std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity()};
  rep.worst_upper = rep.worst_lower;
  for (int k = 0; k < samples; ++k) {
    const double s1 = std::pow(10.0, log10s(rng));
    const double s2 = std::pow(10.0, log10s(rng));
    const double x1 = ximag(rng);
    const double x2 = ximag(rng);
    for (int i = 0; i < 2; ++i) {
      const double base = std::pow(s1, spec.alpha[i]) * std::pow(s2, spec.beta[i]);
      const double fv = spec.f[i](s1, s2, x1, x2);
      const double lo = spec.m[i] * base;
      const double up = spec.M[i] * base + std::pow(x1, spec.gamma[i]) +
                        std::pow(x2, spec.theta[i]);
      const double lower_slack = fv - lo;
      const double upper_slack = up - fv;
      const double scale = std::max({1.0, std::abs(fv), lo, up});
      if (lower_slack < -1e-12 * scale || upper_slack < -1e-12 * scale) {
        std::ostringstream msg;
        msg << "f" << (i + 1) << " escaped its envelope at (s1=" << fmt17(s1)
            << ", s2=" << fmt17(s2) << ", |xi1|=" << fmt17(x1)
            << ", |xi2|=" << fmt17(x2) << "): f=" << fmt17(fv)
            << ", lower=" << fmt17(lo) << ", upper=" << fmt17(up);
        throw EnvelopeViolation(msg.str());
      }
      rep.worst_lower[i] = std::min(rep.worst_lower[i], lower_slack);
      rep.worst_upper[i] = std::min(rep.worst_upper[i], upper_slack);
    }
  }
  return rep;
}

// --- config round-trip ------------------------------------------------------

namespace {

struct IniData {
  // section -> key -> value, remembering which pairs were consumed
  std::map<std::string, std::map<std::string, std::string>> sections;
};

std::string strip(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

IniData parse_ini(const std::string& text) {
  IniData ini;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": unterminated section header");
      section = strip(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
      ini.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value, got \"" + line + "\"");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": key outside any section");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!ini.sections[section].emplace(key, value).second)
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key \"" +
                        key + "\" in [" + section + "]");
  }
  return ini;
}

double parse_double(const std::string& value, const std::string& where) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size())
      throw ConfigError("config value " + where + ": malformed number \"" + value + "\"");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("config value " + where + ": malformed number \"" + value + "\"");
  }
}

}  // namespace

SystemSpec parse_spec_config(const std::string& text) {
  IniData ini = parse_ini(text);
  SystemSpec spec;

  static const std::map<std::string, std::vector<std::string>> known = {
      {"domain", {"N"}},
      {"exponents",
       {"p1", "p2", "alpha1", "alpha2", "beta1", "beta2", "gamma1", "gamma2",
        "theta1", "theta2", "r1", "r2"}},
      {"envelope", {"m1", "m2", "M1", "M2"}},
      {"f1", {"expr"}},
      {"f2", {"expr"}},
  };
  for (const auto& [section, pairs] : ini.sections) {
    const auto it = known.find(section);
    if (it == known.end())
      throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, value] : pairs) {
      (void)value;
      bool ok = false;
      for (const auto& k : it->second) ok = ok || k == key;
      if (!ok)
        throw ConfigError("unknown key \"" + key + "\" in section [" + section + "]");
    }
  }

  auto lookup = [&ini](const std::string& section, const std::string& key,
                       std::string* out) {
    const auto s = ini.sections.find(section);
    if (s == ini.sections.end()) return false;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return false;
    *out = k->second;
    return true;
  };
  auto read_double = [&lookup](const std::string& section, const std::string& key,
                               double* slot) {
    std::string v;
    if (lookup(section, key, &v)) *slot = parse_double(v, "[" + section + "] " + key);
  };

  std::string nval;
  if (lookup("domain", "N", &nval)) {
    const double n = parse_double(nval, "[domain] N");
    spec.N = static_cast<int>(n);
    if (spec.N != n) throw ConfigError("[domain] N must be an integer");
  }
  const std::array<std::pair<const char*, std::array<double, 2>*>, 6> exps = {{
      {"p", &spec.p}, {"alpha", &spec.alpha}, {"beta", &spec.beta},
      {"gamma", &spec.gamma}, {"theta", &spec.theta}, {"r", &spec.r},
  }};
  for (const auto& [name, slot] : exps) {
    read_double("exponents", std::string(name) + "1", &(*slot)[0]);
    read_double("exponents", std::string(name) + "2", &(*slot)[1]);
  }
  read_double("envelope", "m1", &spec.m[0]);
  read_double("envelope", "m2", &spec.m[1]);
  read_double("envelope", "M1", &spec.M[0]);
  read_double("envelope", "M2", &spec.M[1]);

  for (int i = 0; i < 2; ++i) {
    std::string expr;
    if (lookup(i == 0 ? "f1" : "f2", "expr", &expr)) {
      if (strip(expr) == "auto") {
        spec.f_is_auto[i] = true;
      } else {
        spec.f_is_auto[i] = false;
        spec.f[i] = parse_rule(expr);
      }
    }
  }
  apply_auto_rules(spec);
  validate_spec_shape(spec);
  return spec;
}

std::string write_spec_config(const SystemSpec& spec) {
  std::ostringstream out;
  out << "[domain]\n";
  out << "N = " << spec.N << "\n\n";
  out << "[exponents]\n";
  const std::array<std::pair<const char*, const std::array<double, 2>*>, 6> exps = {{
      {"p", &spec.p}, {"alpha", &spec.alpha}, {"beta", &spec.beta},
      {"gamma", &spec.gamma}, {"theta", &spec.theta}, {"r", &spec.r},
  }};
  for (const auto& [name, slot] : exps)
    for (int i = 0; i < 2; ++i)
      out << name << (i + 1) << " = " << fmt17((*slot)[i]) << "\n";
  out << "\n[envelope]\n";
  out << "m1 = " << fmt17(spec.m[0]) << "\n";
  out << "m2 = " << fmt17(spec.m[1]) << "\n";
  out << "M1 = " << fmt17(spec.M[0]) << "\n";
  out << "M2 = " << fmt17(spec.M[1]) << "\n";
  for (int i = 0; i < 2; ++i) {
    out << "\n[f" << (i + 1) << "]\n";
    out << "expr = " << (spec.f_is_auto[i] ? std::string("auto") : spec.f[i].str())
        << "\n";
  }
  return out.str();
}

SystemSpec load_spec_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_config(buf.str());
}

void save_spec_config(const SystemSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << write_spec_config(spec);
}

}  // namespace squall
