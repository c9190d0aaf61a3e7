#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ciid/diagnostics.hpp"
#include "ciid/extreme_value.hpp"
#include "ciid/io.hpp"
#include "ciid/lack_of_memory.hpp"
#include "ciid/mixtures.hpp"
#include "ciid/moments.hpp"
#include "ciid/shock_models.hpp"

namespace ciid::cli {

using nlohmann::json;

enum Exit : int { kOk = 0, kValidation = 1, kVerifyFailed = 2, kIo = 3 };

inline const std::vector<std::string>& families() {
  static const std::vector<std::string> f{"exch_normal", "spherical",    "l1",     "linf",         "archimedean",
                                          "marshall_olkin", "geometric", "minstable", "exshock", "dirichlet_prior",
                                          "sato",        "binary"};
  return f;
}

// A parsed, validated model: sampler, closed-form evaluators by kind, and an
// optional extendibility check.
struct ModelSpec {
  std::string family;
  int d = 0;
  json params;
  RowSampler sampler;
  std::map<std::string, Evaluator> eval;
  ProbabilityKind verify_kind = ProbabilityKind::survival;
  std::function<ExtendibilityVerdict()> check;
  // set when only `check` is meaningful (a binary b that is not d-monotone)
  std::string rejected;

  bool has(const std::string& kind) const { return eval.count(kind) > 0; }
};

namespace detail {

inline CompoundPoissonSubordinatorSpec default_subordinator() {
  CompoundPoissonSubordinatorSpec s;
  s.drift = 1.0;
  s.kill = 0.1;
  s.jumps = {{1.0, 1.0}};
  return s;
}

inline MixingLawSpec law_or(const json& p, const char* key, MixingLawSpec dflt) {
  return p.contains(key) ? io::mixing_law_from_json(p.at(key)) : dflt;
}

inline void set_dim(int& d, int implied, const std::string& what) {
  if (d == 0) d = implied;
  else require(d == implied, "d = " + std::to_string(d) + " conflicts with " + what + " (dimension " + std::to_string(implied) + ")");
}

inline std::vector<double> vec(std::span<const double> x) { return {x.begin(), x.end()}; }

// Exchangeable binary law by its pattern probabilities: number of ones, then
// a uniformly random pattern with that many ones.
inline RowSampler pattern_sampler(const BinaryExchangeableLaw& law) {
  int d = law.d();
  std::vector<double> cum(d + 1);
  double s = 0.0;
  for (int k = 0; k <= d; ++k) cum[k] = (s += num::binom(d, k) * law.p[k]);
  return {static_cast<std::size_t>(d),
          [cum, d](Rng& rng, std::span<double> x) {
            double u = rng.uniform() * cum.back();
            int k = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
            k = std::min(k, d);
            std::vector<int> idx(d);
            std::iota(idx.begin(), idx.end(), 0);
            for (int i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(d - i)]);
            std::fill(x.begin(), x.end(), 0.0);
            for (int i = 0; i < k; ++i) x[idx[i]] = 1.0;
          },
          "binary patterns"};
}

// P(X > x) for a binary vector with moment sequence b.
inline double binary_survival(const MonotoneSequence& b, std::span<const double> x) {
  int need = 0;
  for (double v : x) {
    if (v >= 1.0) return 0.0;
    if (v >= 0.0) ++need;
  }
  return b[need];
}

inline Evaluator reflect(Evaluator surv) {
  return [surv](std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    for (double& v : y) v = -v;
    return surv(y);
  };
}

}  // namespace detail

inline ModelSpec parse_model(const json& spec) {
  require(spec.is_object(), "model spec must be a JSON object");
  ModelSpec m;
  m.family = io::tag(spec, "family");
  m.params = spec;
  const json& p = spec;
  int d = 0;
  if (p.contains("d")) {
    require(p.at("d").is_number_integer(), "d must be an integer");
    d = p.at("d").get<int>();
    require(d >= 1, "d must be >= 1");
  }
  const std::string& f = m.family;

  if (f == "exch_normal") {
    double mu = io::real_at(p, "mu", 0.0), sigma = io::real_at(p, "sigma", 1.0), rho = io::real_at(p, "rho", 0.5);
    if (!d) d = 3;
    m.sampler = exch_normal_sampler(mu, sigma, rho, d);
    Evaluator s = [=](std::span<const double> x) { return exch_normal_survival(mu, sigma, rho, x); };
    m.eval["survival"] = s;
    m.eval["cdf"] = [=](std::span<const double> x) {
      auto y = detail::vec(x);
      for (double& v : y) v = -v;
      return exch_normal_survival(-mu, sigma, rho, y);
    };
  } else if (f == "spherical") {
    auto M = detail::law_or(p, "M", law::Gamma{2.0});
    if (!d) d = 3;
    m.sampler = spherical_ciid_sampler(M, d);
    Evaluator s = [M](std::span<const double> x) { return spherical_survival(M, x); };
    m.eval["survival"] = s;
    m.eval["cdf"] = detail::reflect(s);
  } else if (f == "l1") {
    auto M = detail::law_or(p, "M", law::Gamma{3.0});
    if (!d) d = 3;
    m.sampler = l1_ciid_sampler(M, d);
    m.eval["survival"] = [M](std::span<const double> x) { return l1_ciid_survival(M, x); };
  } else if (f == "linf") {
    auto M = detail::law_or(p, "M", law::Pareto{3.0});
    if (!d) d = 3;
    m.sampler = linf_ciid_sampler(M, d);
    m.eval["survival"] = [M](std::span<const double> x) { return linf_survival(M, x); };
  } else if (f == "archimedean") {
    ArchimedeanGeneratorSpec gen{detail::law_or(p, "M", law::Gamma{1.0})};
    if (!d) d = 3;
    m.sampler = archimedean_sampler(gen, d);
    Evaluator c = [gen](std::span<const double> u) {
      std::vector<double> v;
      for (double x : u) v.push_back(std::clamp(x, 0.0, 1.0));
      return archimedean_copula_eval(gen, v);
    };
    m.eval["copula"] = c;
    m.eval["cdf"] = c;
    m.verify_kind = ProbabilityKind::cdf;
  } else if (f == "marshall_olkin") {
    std::optional<LomParameterSeq> lom;
    if (p.contains("b")) {
      auto b = io::reals(p.at("b"));
      detail::set_dim(d, static_cast<int>(b.size()) - 1, "b");
      lom = make_lom(b, LomFlavor::continuous);
      m.sampler = mo_shock_sampler(shock_rates_from_lom(*lom));
    } else if (p.contains("cardinality_rates") || p.contains("subsets")) {
      if (p.contains("cardinality_rates")) detail::set_dim(d, static_cast<int>(p.at("cardinality_rates").size()), "cardinality_rates");
      require(d >= 1, "shock rates given by subsets need d");
      auto rates = io::shock_rates_from_json(p, d);
      m.sampler = mo_shock_sampler(rates);
      if (rates.exchangeable()) lom = b_from_lambda(rates);
      else throw ValidationError("marshall_olkin shock rates must be exchangeable");
    } else {
      auto sub = p.contains("subordinator") ? io::subordinator_from_json(p.at("subordinator")) : detail::default_subordinator();
      if (!d) d = 3;
      lom = lom_from_subordinator(sub, d);
      m.sampler = mo_ciid_sampler(sub, d);
    }
    auto L = *lom;
    m.eval["survival"] = [L](std::span<const double> x) { return mo_survival(L, x); };
    m.check = [L] { return is_ciid_extendible(L); };
  } else if (f == "geometric") {
    std::optional<LomParameterSeq> lom;
    if (p.contains("b")) {
      auto b = io::reals(p.at("b"));
      detail::set_dim(d, static_cast<int>(b.size()) - 1, "b");
      lom = make_lom(b, LomFlavor::discrete);
      m.sampler = geo_shock_sampler(shock_probs_from_lom(*lom));
    } else if (p.contains("p") || p.contains("subsets")) {
      if (p.contains("p")) detail::set_dim(d, static_cast<int>(p.at("p").size()) - 1, "p");
      require(d >= 1, "shock probabilities given by subsets need d");
      json q = p;
      if (p.contains("p")) q["cardinality_probs"] = p.at("p");
      auto probs = io::shock_probs_from_json(q, d);
      require(probs.exchangeable(), "geometric shock probabilities must be exchangeable");
      lom = b_from_p(probs);
      m.sampler = geo_shock_sampler(probs);
    } else {
      GeoWalkLaw Y;
      if (p.contains("y_law")) {
        Y.law = io::mixing_law_from_json(p.at("y_law"));
        Y.negative_log = p.value("negative_log", false);
      } else {
        json bp = p.value("beta", json{{"p", 1.0}, {"q", 2.0}});
        Y.law = law::Beta{io::real_at(bp, "p", 1.0), io::real_at(bp, "q", 2.0)};
        Y.negative_log = true;
      }
      if (!d) d = 3;
      lom = lom_from_walk(Y, d);
      m.sampler = geo_ciid_sampler(Y, d);
    }
    auto L = *lom;
    m.eval["survival"] = [L](std::span<const double> x) { return geo_survival_real(L, x); };
    m.check = [L] { return is_ciid_extendible(L); };
  } else if (f == "minstable") {
    StdfSpec s = p.contains("stdf") ? io::stdf_from_json(p.at("stdf")) : StdfSpec{stdf::Logistic{0.5}};
    double rate = io::real_at(p, "rate", 1.0);
    require(rate > 0.0 && std::isfinite(rate), "rate must be > 0");
    if (!d) d = 3;
    std::string how = p.value("sampler", std::string("auto"));
    auto* lg = std::get_if<stdf::Logistic>(&s);
    if (how == "direct" || (how == "auto" && lg && lg->theta < 1.0)) {
      require(lg && lg->theta < 1.0, "the direct sampler needs a logistic stdf with theta < 1");
      m.sampler = logistic_direct_sampler(lg->theta, rate, d);
    } else {
      require(how == "auto" || how == "series", "sampler must be auto, direct or series");
      auto base = minstable_sampler(s, d);
      m.sampler = {base.d,
                   [base, rate](Rng& rng, std::span<double> x) {
                     base.draw(rng, x);
                     for (double& v : x) v /= rate;
                   },
                   base.meta};
    }
    m.eval["survival"] = [s, rate](std::span<const double> x) {
      auto y = detail::vec(x);
      for (double& v : y) v = std::max(v, 0.0);
      return minstable_survival(s, rate, y);
    };
    m.eval["stdf"] = [s](std::span<const double> x) { return stdf_eval(s, x); };
    m.eval["copula"] = [s](std::span<const double> u) { return extreme_value_copula_eval(s, u); };
  } else if (f == "exshock") {
    ShockSurvivalSpec spec;
    if (p.contains("shocks")) {
      spec = io::shock_survival_from_json(p.at("shocks"));
      detail::set_dim(d, spec.d(), "shocks");
    } else {
      if (!d) d = 3;
      auto rates = shock_rates_from_lom(lom_from_subordinator(detail::default_subordinator(), d)).exchangeable_rates();
      for (double r : rates) spec.hbar.push_back(shock::Exponential{r});
      validate(spec);
    }
    m.sampler = exshock_sampler(spec);
    m.eval["survival"] = [spec](std::span<const double> x) {
      auto y = detail::vec(x);
      for (double& v : y) v = std::max(v, 0.0);
      return exshock_survival(spec, y);
    };
    m.eval["copula"] = [spec](std::span<const double> u) { return exshock_copula_eval(spec, u); };
  } else if (f == "dirichlet_prior") {
    double c = io::real_at(p, "c", 1.0);
    BaseDf G = p.contains("base") ? io::base_from_json(p.at("base")) : BaseDf{base::Uniform{}};
    AdditiveFamilySpec add = additive::DirichletPrior{c, G};
    validate(add);
    if (!d) d = 3;
    m.sampler = dp_sampler(c, G, d);
    m.eval["copula"] = [c](std::span<const double> u) { return dp_copula_eval(c, u); };
    m.eval["cdf"] = [c, G](std::span<const double> x) {
      std::vector<double> u;
      for (double v : x) u.push_back(base_cdf(G, v));
      return dp_copula_eval(c, u);
    };
    m.eval["survival"] = [add](std::span<const double> x) {
      auto y = detail::vec(x);
      for (double& v : y) v = std::max(v, 0.0);
      return additive_survival(add, y);
    };
    m.verify_kind = ProbabilityKind::cdf;
  } else if (f == "sato") {
    double alpha = io::real_at(p, "alpha", 3.0);
    require(alpha > 0.0 && std::isfinite(alpha), "alpha must be > 0");
    if (!d) d = 3;
    Evaluator s = [alpha](std::span<const double> x) {
      auto y = detail::vec(x);
      for (double& v : y) v = std::max(v, 0.0);
      return sato_survival(alpha, y);
    };
    m.eval["survival"] = s;
    if (d <= 3) m.sampler = conditional_inversion_sampler(s, d);
  } else if (f == "binary") {
    std::optional<MonotoneSequence> b;
    if (p.contains("b")) {
      b = MonotoneSequence(io::reals(p.at("b")));
      detail::set_dim(d, b->d(), "b");
      if (!is_d_monotone(*b)) {
        m.d = d;
        m.rejected = "binary moment sequence must be d-monotone";
        m.check = [] { return ExtendibilityVerdict{}; };
        return m;
      }
      m.sampler = detail::pattern_sampler(p_from_b(*b));
    } else if (p.contains("p")) {
      BinaryExchangeableLaw law(io::reals(p.at("p")));
      detail::set_dim(d, law.d(), "p");
      b = b_from_p(law);
      m.sampler = detail::pattern_sampler(law);
    } else if (p.contains("polya")) {
      const json& u = p.at("polya");
      require(u.contains("r") && u.contains("b") && u.at("r").is_number_integer() && u.at("b").is_number_integer(),
              "polya needs integer r and b");
      int r = u.at("r").get<int>(), bb = u.at("b").get<int>();
      require(r >= 1 && bb >= 1, "polya needs r, b >= 1");
      if (!d) d = 3;
      m.sampler = polya_urn_sampler(r, bb, d);
      b = moment_sequence(law::Beta{static_cast<double>(r), static_cast<double>(bb)}, d);
    } else {
      auto M = detail::law_or(p, "mixing", law::Beta{1.0, 1.0});
      if (!d) d = 3;
      m.sampler = binary_mixture_sampler(M, d);
      b = moment_sequence(M, d);
    }
    auto B = *b;
    m.eval["survival"] = [B](std::span<const double> x) { return detail::binary_survival(B, x); };
    m.check = [B] { return hausdorff_extendible(B); };
  } else {
    throw ValidationError("unknown family '" + f + "'");
  }
  m.d = d;
  if (m.sampler.draw) require(static_cast<int>(m.sampler.d) == d, "internal dimension mismatch");
  return m;
}

// ---- model loading ----

// --model is a path or inline JSON (starts with '{'); --param key=value adds
// fields and clashes with an existing key are an error.
inline json load_model_json(const std::string& model, const std::vector<std::string>& params) {
  json j = json::object();
  if (!model.empty()) {
    std::string text;
    if (model.front() == '{') {
      text = model;
    } else {
      std::ifstream f(model);
      if (!f) throw IoError("cannot open model file '" + model + "'");
      std::stringstream ss;
      ss << f.rdbuf();
      text = ss.str();
    }
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ValidationError(std::string("model JSON: ") + e.what());
    }
    require(j.is_object(), "model spec must be a JSON object");
  }
  for (const auto& kv : params) {
    auto eq = kv.find('=');
    require(eq != std::string::npos && eq > 0, "--param expects key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    require(!j.contains(key), "--param " + key + " conflicts with the model JSON");
    json v = json::parse(val, nullptr, false);
    j[key] = v.is_discarded() ? json(val) : v;
  }
  return j;
}

inline Grid parse_grid(const std::string& s, int d) {
  Grid g;
  std::stringstream ss(s);
  std::string pt;
  while (std::getline(ss, pt, ';')) {
    if (pt.empty()) continue;
    std::vector<double> x;
    std::stringstream ps(pt);
    std::string v;
    while (std::getline(ps, v, ',')) x.push_back(io::parse_real(v));
    require(static_cast<int>(x.size()) == d, "grid point '" + pt + "' must have " + std::to_string(d) + " coordinates");
    g.push_back(std::move(x));
  }
  require(!g.empty(), "empty grid");
  return g;
}

inline std::vector<double> parse_point(const std::string& s) {
  std::vector<double> x;
  std::stringstream ss(s);
  std::string v;
  while (std::getline(ss, v, ',')) x.push_back(io::parse_real(v));
  return x;
}

inline std::string format_12(double v) {
  if (!std::isfinite(v)) return io::format_real(v);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// ---- commands ----

inline int cmd_sample(const ModelSpec& m, std::size_t n, std::uint64_t seed, const std::string& out_path, std::ostream& out,
                      unsigned threads = 1) {
  if (!m.rejected.empty()) throw ValidationError(m.rejected);
  if (!m.sampler.draw) throw UnsupportedError("family '" + m.family + "' has no sampler for d = " + std::to_string(m.d));
  auto s = draw_matrix_parallel(m.sampler, n, seed, threads);
  if (out_path.empty()) {
    io::write_csv(s, out);
    return kOk;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + out_path + "'");
  io::write_csv(s, f);
  if (!f) throw IoError("write to '" + out_path + "' failed");
  return kOk;
}

inline int cmd_eval(const ModelSpec& m, const std::vector<double>& point, const std::string& kind, std::ostream& out) {
  if (!m.rejected.empty()) throw ValidationError(m.rejected);
  auto it = m.eval.find(kind);
  if (it == m.eval.end()) throw UnsupportedError("family '" + m.family + "' does not support kind '" + kind + "'");
  require(static_cast<int>(point.size()) == m.d, "point must have d = " + std::to_string(m.d) + " coordinates");
  out << format_12(it->second(point)) << '\n';
  return kOk;
}

inline int cmd_check(const ModelSpec& m, std::ostream& out) {
  if (!m.check) throw UnsupportedError("family '" + m.family + "' is not sequence-parameterized (use binary, marshall_olkin or geometric)");
  auto v = m.check();
  out << io::to_json(v).dump() << '\n';
  return kOk;
}

inline McReport run_verify(const ModelSpec& m, std::size_t n, std::uint64_t seed, const std::optional<Grid>& grid,
                           unsigned threads = 1) {
  if (!m.sampler.draw) throw UnsupportedError("family '" + m.family + "' has no sampler for d = " + std::to_string(m.d));
  const char* kind = m.verify_kind == ProbabilityKind::survival ? "survival" : "cdf";
  auto it = m.eval.find(kind);
  if (it == m.eval.end()) throw UnsupportedError("family '" + m.family + "' has no closed form to verify against");
  auto s = draw_matrix_parallel(m.sampler, n, seed, threads);
  Grid g = grid ? *grid : empirical_quantile_grid(s);
  return mc_report(s, it->second, g, m.verify_kind);
}

inline int cmd_verify(const ModelSpec& m, std::size_t n, std::uint64_t seed, const std::optional<Grid>& grid,
                      const std::string& out_path, std::ostream& out, unsigned threads = 1) {
  if (!m.rejected.empty()) throw ValidationError(m.rejected);
  auto r = run_verify(m, n, seed, grid, threads);
  json j = io::to_json(r);
  j["family"] = m.family;
  j["d"] = m.d;
  out << j.dump(2) << '\n';
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + out_path + "'");
    io::write_report_csv(r, f);
  }
  return r.pass ? kOk : kVerifyFailed;
}

inline json diagnose(const SampleMatrix& s, const std::vector<std::string>& tests, std::optional<double> mu = std::nullopt) {
  json j{{"n", s.n}, {"d", s.d}};
  auto med = pooled_quantile(s)(0.5);
  for (const auto& t : tests) {
    if (t == "kendall") {
      require(s.d >= 2, "kendall needs d >= 2");
      auto a = s.column(0), b = s.column(1);
      double tau = empirical_kendall_tau(a, b), se = kendall_tau_stderr(s.n);
      j["kendall"] = {{"tau", tau}, {"stderr", se}, {"pass", tau >= -3.0 * se}};
    } else if (t == "correlation") {
      require(s.d >= 2, "correlation needs d >= 2");
      auto a = s.column(0), b = s.column(1);
      auto c = empirical_correlation(a, b);
      j["correlation"] = {{"r", c.r}, {"stderr", c.stderr}, {"n", c.n}, {"pass", c.r >= -3.0 * c.stderr}};
    } else if (t == "majorization") {
      auto r = majorization_report(s, med);
      j["majorization"] = {{"x", r.x}, {"p", r.p}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"stderr", r.stderr}, {"pass", r.pass}};
    } else if (t == "radial") {
      double m0 = mu.value_or(med);
      auto r = radial_symmetry_report(s, m0);
      j["radial"] = {{"mu", m0}, {"max_abs_z", io::real_json(r.max_abs_z)}, {"critical", r.critical}, {"tests", r.tests}, {"pass", r.pass}};
    } else if (t == "ties") {
      j["ties"] = {{"frequency", tie_frequency(s)}};
    } else {
      throw ValidationError("unknown diagnostic '" + t + "' (kendall, correlation, majorization, radial, ties)");
    }
  }
  return j;
}

inline int cmd_diagnose(const std::string& csv_path, const std::vector<std::string>& tests, std::ostream& out,
                        std::optional<double> mu = std::nullopt) {
  auto s = io::read_csv_file(csv_path);
  require(s.n >= 2, "need at least two rows");
  out << diagnose(s, tests, mu).dump(2) << '\n';
  return kOk;
}

// ---- entry point ----

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conditionally iid models: sampling, evaluation and checks", "ciid"};
  app.require_subcommand(1);
  std::string model, out_path, grid_s, point_s, kind = "survival", csv;
  std::vector<std::string> params, tests;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double mu = 0.0;

  auto add_model = [&](CLI::App* c) {
    c->add_option("--model", model, "model JSON file or inline JSON");
    c->add_option("--param", params, "extra model field key=value")->take_all();
  };
  auto* sample = app.add_subcommand("sample", "draw n rows as CSV");
  add_model(sample);
  sample->add_option("--n", n)->required();
  sample->add_option("--seed", seed)->required();
  sample->add_option("--out", out_path);
  sample->add_option("--threads", threads);

  auto* eval = app.add_subcommand("eval", "closed-form value at a point");
  add_model(eval);
  eval->add_option("--point", point_s, "x1,...,xd")->required();
  eval->add_option("--kind", kind)->check(CLI::IsMember({"survival", "cdf", "copula", "stdf"}));

  auto* check = app.add_subcommand("check", "extendibility of a sequence-parameterized model");
  add_model(check);

  auto* verify = app.add_subcommand("verify", "Monte Carlo check of sampler against closed form");
  add_model(verify);
  verify->add_option("--n", n)->default_val(100000);
  verify->add_option("--seed", seed)->required();
  verify->add_option("--grid", grid_s, "x,y;x,y");
  verify->add_option("--out", out_path, "CSV dump of the report");
  verify->add_option("--threads", threads);

  auto* diag = app.add_subcommand("diagnose", "necessary-condition diagnostics on a CSV sample");
  diag->add_option("csv", csv)->required();
  diag->add_option("--tests", tests)->delimiter(',')->default_val(std::vector<std::string>{"kendall", "correlation", "majorization", "radial", "ties"});
  auto* mu_opt = diag->add_option("--mu", mu, "centre for the radial symmetry test");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::stringstream o, e2;
    int rc = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*diag) return cmd_diagnose(csv, tests, out, mu_opt->count() ? std::optional<double>(mu) : std::nullopt);
    auto m = parse_model(load_model_json(model, params));
    if (*sample) return cmd_sample(m, n, seed, out_path, out, threads);
    if (*eval) return cmd_eval(m, parse_point(point_s), kind, out);
    if (*check) return cmd_check(m, out);
    if (*verify) {
      std::optional<Grid> g;
      if (!grid_s.empty()) g = parse_grid(grid_s, m.d);
      return cmd_verify(m, n, seed, g, out_path, out, threads);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kValidation;
}

}  // namespace ciid::cli
