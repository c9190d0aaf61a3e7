#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ciid/diagnostics.hpp"
#include "ciid/errors.hpp"
#include "ciid/extreme_value.hpp"
#include "ciid/lack_of_memory.hpp"
#include "ciid/mixing_law.hpp"
#include "ciid/moments.hpp"
#include "ciid/shock_models.hpp"

namespace ciid::io {

using nlohmann::json;

// ---- scalars ----

inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline double parse_real(const std::string& s) {
  if (s == "inf" || s == "+inf" || s == "Infinity") return kInf;
  if (s == "-inf" || s == "-Infinity") return -kInf;
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\r')) --e;
  if (b < e && *b == '+') ++b;
  auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) throw ValidationError("not a real number: '" + s + "'");
  return v;
}

// JSON numbers, or the strings "inf"/"-inf".
inline double real(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_real(j.get<std::string>());
  throw ValidationError("expected a number, got " + j.dump());
}

inline json real_json(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

inline double real_at(const json& j, const char* key, double dflt) { return j.contains(key) ? real(j.at(key)) : dflt; }

inline double real_at(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  return real(j.at(key));
}

inline std::vector<double> reals(const json& j) {
  if (!j.is_array()) throw ValidationError("expected an array, got " + j.dump());
  std::vector<double> v;
  for (const auto& e : j) v.push_back(real(e));
  return v;
}

inline json reals_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(real_json(x));
  return a;
}

inline std::string tag(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_string())
    throw ValidationError(std::string("spec needs a string field '") + key + "': " + j.dump());
  return j.at(key).get<std::string>();
}

// ---- mixing laws ----

inline MixingLawSpec mixing_law_from_json(const json& j) {
  std::string f = tag(j, "family");
  MixingLawSpec M;
  if (f == "point_mass") M = law::PointMass{real_at(j, "m", 1.0)};
  else if (f == "finite_discrete") M = law::FiniteDiscrete{reals(j.at("atoms")), reals(j.at("weights"))};
  else if (f == "gamma") M = law::Gamma{real_at(j, "shape", 1.0)};
  else if (f == "beta") M = law::Beta{real_at(j, "p", 1.0), real_at(j, "q", 1.0)};
  else if (f == "pareto") M = law::Pareto{real_at(j, "alpha", 1.0)};
  else if (f == "stable") M = law::PositiveStable{real_at(j, "theta", 0.5)};
  else if (f == "log_series") M = law::LogSeries{real_at(j, "theta", 1.0)};
  else throw ValidationError("unknown mixing law family '" + f + "'");
  validate(M);
  return M;
}

inline json to_json(const MixingLawSpec& M) {
  return std::visit(detail::overloaded{
                        [](const law::PointMass& l) { return json{{"family", "point_mass"}, {"m", real_json(l.m)}}; },
                        [](const law::FiniteDiscrete& l) {
                          return json{{"family", "finite_discrete"}, {"atoms", reals_json(l.atoms)}, {"weights", reals_json(l.weights)}};
                        },
                        [](const law::Gamma& l) { return json{{"family", "gamma"}, {"shape", l.shape}}; },
                        [](const law::Beta& l) { return json{{"family", "beta"}, {"p", l.p}, {"q", l.q}}; },
                        [](const law::Pareto& l) { return json{{"family", "pareto"}, {"alpha", l.alpha}}; },
                        [](const law::PositiveStable& l) { return json{{"family", "stable"}, {"theta", l.theta}}; },
                        [](const law::LogSeries& l) { return json{{"family", "log_series"}, {"theta", l.theta}}; },
                    },
                    M);
}

// ---- sequences and verdicts ----

inline json to_json(const MonotoneSequence& s) { return reals_json(s.values); }

inline json to_json(const ExtendibilityVerdict& v) {
  json j{{"extendible", v.extendible}, {"hankel_values", reals_json(v.hankel_values)}, {"min_hankel", real_json(v.min_hankel)}};
  if (v.witness) j["witness"] = to_json(MixingLawSpec{*v.witness});
  return j;
}

// ---- shocks and subordinators ----

// "1,3" -> subset {1,3} (1-based); "" is the empty set.
inline SubsetMask subset_from_string(const std::string& s, int d) {
  SubsetMask m = 0;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.find_first_not_of(' ') == std::string::npos) continue;
    int k = 0;
    try {
      k = std::stoi(tok);
    } catch (const std::exception&) {
      throw ValidationError("bad subset label '" + s + "'");
    }
    require(k >= 1 && k <= d, "subset index out of range in '" + s + "'");
    m |= SubsetMask(1) << (k - 1);
  }
  return m;
}

inline std::string subset_to_string(SubsetMask m) {
  std::string s;
  for (int k = 0; k < 32; ++k)
    if (m & (SubsetMask(1) << k)) s += (s.empty() ? "" : ",") + std::to_string(k + 1);
  return s;
}

inline ShockRateSpec shock_rates_from_json(const json& j, int d) {
  ShockRateSpec s;
  s.d = d;
  if (j.contains("cardinality_rates")) s.cardinality_rates = reals(j.at("cardinality_rates"));
  if (j.contains("subsets"))
    for (auto it = j.at("subsets").begin(); it != j.at("subsets").end(); ++it) {
      SubsetMask m = subset_from_string(it.key(), d);
      require(m != 0, "shock subsets must be non-empty");
      s.subsets[m] = real(it.value());
    }
  validate(s);
  return s;
}

inline json to_json(const ShockRateSpec& s) {
  if (!s.full_map()) return json{{"cardinality_rates", reals_json(s.cardinality_rates)}};
  json m = json::object();
  for (auto [k, v] : s.subsets) m[subset_to_string(k)] = v;
  return json{{"subsets", m}};
}

inline ShockProbSpec shock_probs_from_json(const json& j, int d) {
  ShockProbSpec s;
  s.d = d;
  if (j.contains("cardinality_probs")) s.cardinality_probs = reals(j.at("cardinality_probs"));
  if (j.contains("subsets"))
    for (auto it = j.at("subsets").begin(); it != j.at("subsets").end(); ++it)
      s.subsets[subset_from_string(it.key(), d)] = real(it.value());
  validate(s);
  return s;
}

inline json to_json(const ShockProbSpec& s) {
  if (!s.full_map()) return json{{"cardinality_probs", reals_json(s.cardinality_probs)}};
  json m = json::object();
  for (auto [k, v] : s.subsets) m[subset_to_string(k)] = v;
  return json{{"subsets", m}};
}

inline CompoundPoissonSubordinatorSpec subordinator_from_json(const json& j) {
  CompoundPoissonSubordinatorSpec s;
  s.drift = real_at(j, "drift", 0.0);
  s.kill = real_at(j, "kill", 0.0);
  if (j.contains("jumps"))
    for (const auto& e : j.at("jumps")) s.jumps.push_back({real_at(e, "size"), real_at(e, "rate")});
  validate(s);
  return s;
}

inline json to_json(const CompoundPoissonSubordinatorSpec& s) {
  json jumps = json::array();
  for (const auto& e : s.jumps) jumps.push_back({{"size", real_json(e.size)}, {"rate", e.rate}});
  return json{{"drift", s.drift}, {"kill", s.kill}, {"jumps", jumps}};
}

// ---- extreme value ----

inline GSpec g_from_json(const json& j) {
  std::string k = tag(j, "kind");
  GSpec G;
  if (k == "frechet") G = gspec::Frechet{real_at(j, "theta", 0.5)};
  else if (k == "weibull") G = gspec::Weibull{real_at(j, "theta", 1.0)};
  else if (k == "mo_atom") G = gspec::MOAtom{mixing_law_from_json(j.at("M"))};
  else if (k == "step") G = gspec::StepFunction{reals(j.at("breakpoints")), reals(j.at("values"))};
  else throw ValidationError("unknown G kind '" + k + "'");
  validate(G);
  return G;
}

inline json to_json(const GSpec& G) {
  return std::visit(detail::overloaded{
                        [](const gspec::Frechet& g) { return json{{"kind", "frechet"}, {"theta", g.theta}}; },
                        [](const gspec::Weibull& g) { return json{{"kind", "weibull"}, {"theta", g.theta}}; },
                        [](const gspec::MOAtom& g) { return json{{"kind", "mo_atom"}, {"M", to_json(g.M)}}; },
                        [](const gspec::StepFunction& g) {
                          return json{{"kind", "step"}, {"breakpoints", reals_json(g.breakpoints)}, {"values", reals_json(g.values)}};
                        },
                    },
                    G);
}

inline StdfSpec stdf_from_json(const json& j) {
  std::string k = tag(j, "kind");
  StdfSpec s;
  if (k == "independence") s = stdf::Independence{};
  else if (k == "logistic") s = stdf::Logistic{real_at(j, "theta", 0.5)};
  else if (k == "negative_logistic") s = stdf::NegativeLogistic{real_at(j, "theta", 1.0)};
  else if (k == "lf") s = stdf::LF{g_from_json(j.at("G"))};
  else if (k == "triplet") {
    stdf::Triplet t;
    t.b = real_at(j, "b", 0.0);
    t.c = real_at(j, "c", 0.0);
    if (j.contains("atoms"))
      for (const auto& a : j.at("atoms")) t.atoms.emplace_back(g_from_json(a.at("G")), real_at(a, "weight"));
    s = t;
  } else {
    throw ValidationError("unknown stdf kind '" + k + "'");
  }
  validate(s);
  return s;
}

inline json to_json(const StdfSpec& s) {
  return std::visit(detail::overloaded{
                        [](const stdf::Independence&) { return json{{"kind", "independence"}}; },
                        [](const stdf::Logistic& l) { return json{{"kind", "logistic"}, {"theta", l.theta}}; },
                        [](const stdf::NegativeLogistic& l) { return json{{"kind", "negative_logistic"}, {"theta", l.theta}}; },
                        [](const stdf::LF& l) { return json{{"kind", "lf"}, {"G", to_json(l.G)}}; },
                        [](const stdf::Triplet& t) {
                          json atoms = json::array();
                          for (const auto& [g, w] : t.atoms) atoms.push_back({{"G", to_json(g)}, {"weight", w}});
                          return json{{"kind", "triplet"}, {"b", t.b}, {"c", t.c}, {"atoms", atoms}};
                        },
                    },
                    s);
}

// ---- shock models ----

inline ShockLaw shock_law_from_json(const json& j) {
  std::string k = tag(j, "kind");
  ShockLaw h;
  if (k == "exponential") h = shock::Exponential{real_at(j, "rate", 1.0)};
  else if (k == "weibull") h = shock::Weibull{real_at(j, "scale", 1.0), real_at(j, "shape", 1.0)};
  else if (k == "pareto") h = shock::Pareto{real_at(j, "alpha", 1.0)};
  else if (k == "step") h = shock::Step{reals(j.at("points")), reals(j.at("values"))};
  else throw ValidationError("unknown shock law kind '" + k + "'");
  validate(h);
  return h;
}

inline json to_json(const ShockLaw& h) {
  return std::visit(detail::overloaded{
                        [](const shock::Exponential& e) { return json{{"kind", "exponential"}, {"rate", e.rate}}; },
                        [](const shock::Weibull& w) { return json{{"kind", "weibull"}, {"scale", w.scale}, {"shape", w.shape}}; },
                        [](const shock::Pareto& p) { return json{{"kind", "pareto"}, {"alpha", p.alpha}}; },
                        [](const shock::Step& s) {
                          return json{{"kind", "step"}, {"points", reals_json(s.points)}, {"values", reals_json(s.values)}};
                        },
                    },
                    h);
}

inline ShockSurvivalSpec shock_survival_from_json(const json& j) {
  ShockSurvivalSpec s;
  const json& a = j.is_array() ? j : j.at("shocks");
  for (const auto& e : a) s.hbar.push_back(shock_law_from_json(e));
  validate(s);
  return s;
}

inline BaseDf base_from_json(const json& j) {
  std::string k = tag(j, "kind");
  BaseDf g;
  if (k == "uniform") g = base::Uniform{real_at(j, "lo", 0.0), real_at(j, "hi", 1.0)};
  else if (k == "exponential") g = base::Exponential{real_at(j, "rate", 1.0)};
  else if (k == "normal") g = base::Normal{real_at(j, "mu", 0.0), real_at(j, "sigma", 1.0)};
  else throw ValidationError("unknown base distribution kind '" + k + "'");
  validate(g);
  return g;
}

inline json to_json(const BaseDf& g) {
  return std::visit(detail::overloaded{
                        [](const base::Uniform& u) { return json{{"kind", "uniform"}, {"lo", u.lo}, {"hi", u.hi}}; },
                        [](const base::Exponential& e) { return json{{"kind", "exponential"}, {"rate", e.rate}}; },
                        [](const base::Normal& n) { return json{{"kind", "normal"}, {"mu", n.mu}, {"sigma", n.sigma}}; },
                    },
                    g);
}

inline AdditiveFamilySpec additive_from_json(const json& j) {
  std::string k = tag(j, "kind");
  AdditiveFamilySpec s;
  if (k == "piecewise_levy") {
    additive::PiecewiseLevy p;
    if (j.contains("breakpoints")) p.breakpoints = reals(j.at("breakpoints"));
    for (const auto& e : j.at("pieces")) p.pieces.push_back(subordinator_from_json(e));
    s = p;
  } else if (k == "dirichlet_prior") {
    s = additive::DirichletPrior{real_at(j, "c", 1.0), j.contains("base") ? base_from_json(j.at("base")) : BaseDf{base::Uniform{}}};
  } else if (k == "sato") {
    s = additive::Sato{real_at(j, "alpha", 1.0)};
  } else {
    throw ValidationError("unknown additive family kind '" + k + "'");
  }
  validate(s);
  return s;
}

inline BernsteinSpec bernstein_from_json(const json& j) {
  std::string k = tag(j, "kind");
  if (k == "compound_poisson") return subordinator_from_json(j);
  if (k == "gamma") return bernstein::Gamma{real_at(j, "alpha", 1.0)};
  if (k == "stable") return bernstein::Stable{real_at(j, "theta", 0.5)};
  throw ValidationError("unknown Bernstein function kind '" + k + "'");
}

// ---- reports ----

inline json to_json(const McReport& r) {
  json pts = json::array();
  for (std::size_t i = 0; i < r.grid.size(); ++i)
    pts.push_back({{"x", reals_json(r.grid[i])},
                   {"closed", real_json(r.closed[i])},
                   {"empirical", real_json(r.empirical[i])},
                   {"stderr", real_json(r.stderr[i])}});
  return json{{"kind", r.kind == ProbabilityKind::survival ? "survival" : "cdf"},
              {"n", r.n},
              {"seed", r.seed},
              {"abs_floor", kMcAbsFloor},
              {"sigmas", kMcSigmas},
              {"pass", r.pass},
              {"points", pts}};
}

inline void write_report_csv(const McReport& r, std::ostream& os) {
  std::size_t d = r.grid.empty() ? 0 : r.grid[0].size();
  for (std::size_t k = 0; k < d; ++k) os << 'x' << k + 1 << ',';
  os << "closed,empirical,stderr\n";
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    for (double v : r.grid[i]) os << format_real(v) << ',';
    os << format_real(r.closed[i]) << ',' << format_real(r.empirical[i]) << ',' << format_real(r.stderr[i]) << '\n';
  }
}

// ---- sample CSV ----

inline void write_csv(const SampleMatrix& s, std::ostream& os) {
  for (std::size_t k = 0; k < s.d; ++k) os << (k ? "," : "") << 'x' << k + 1;
  os << '\n';
  for (std::size_t i = 0; i < s.n; ++i) {
    for (std::size_t k = 0; k < s.d; ++k) os << (k ? "," : "") << format_real(s(i, k));
    os << '\n';
  }
}

inline SampleMatrix read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream hs(line);
  std::string tok;
  std::size_t d = 0;
  while (std::getline(hs, tok, ',')) require(tok == "x" + std::to_string(++d), "CSV header must be x1,...,xd");
  require(d >= 1, "CSV header must be x1,...,xd");
  std::vector<double> data;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::size_t c = 0;
    while (std::getline(ss, tok, ',')) {
      data.push_back(parse_real(tok));
      ++c;
    }
    require(c == d, "CSV row " + std::to_string(n + 1) + " has " + std::to_string(c) + " fields, expected " + std::to_string(d));
    ++n;
  }
  SampleMatrix m(n, d);
  m.data = std::move(data);
  return m;
}

inline SampleMatrix read_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "'");
  return read_csv(f);
}

}  // namespace ciid::io
