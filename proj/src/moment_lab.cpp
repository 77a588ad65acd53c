#include "projlab/moment_lab.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "projlab/csv.hpp"
#include "projlab/spectral.hpp"
#include "projlab/stream_tags.hpp"

namespace projlab {

namespace {

void draw_columns(const DistributionSpec& spec, Stream& s, Matrix& z) {
  Vector v(spec.dim());
  for (Index c = 0; c < z.cols(); ++c) {
    sample_one(spec, s, v);
    z.col(c) = v;
  }
}

Matrix deviation_of(const Matrix& z) {
  Matrix e = z.transpose() * z / static_cast<double>(z.rows());
  e.diagonal().array() -= 1.0;
  return e;
}

// Valid index lists j_1 < ... < j_m with j_0 = 0, j_{i-1}+1 < j_i, j_m <= k, m >= 1.
void enumerate_open(int k, int prev, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  for (int j = prev + 2; j <= k; ++j) {
    cur.push_back(j);
    out.push_back(cur);
    enumerate_open(k, j, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::optional<double> t1a_analytic(const DistributionSpec& spec, const MonomialSpec& h) {
  // All catalogued laws satisfy Z ~ -Z: flipping Z_a negates H when an odd
  // number of off-diagonal factors touch a.
  std::map<int, int> off_degree;
  for (auto [i, j] : h.factors()) {
    if (i != j) {
      ++off_degree[i];
      ++off_degree[j];
    }
  }
  for (const auto& [idx, deg] : off_degree) {
    if (deg % 2 == 1) return 0.0;
  }
  // Connected components over indices are independent.
  std::vector<int> parent(h.k());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (auto [i, j] : h.factors()) parent[find(i)] = find(j);
  std::map<int, std::vector<MonomialSpec::Pair>> groups;
  for (const auto& f : h.factors()) groups[find(f.first)].push_back(f);
  double value = 1.0;
  const auto cm = spec.component_moments();
  for (const auto& [root, factors] : groups) {
    const bool single_pair = std::all_of(factors.begin(), factors.end(),
                                         [&](const auto& f) { return f == factors.front(); });
    if (!single_pair) return std::nullopt;
    const auto [i, j] = factors.front();
    if (factors.size() == 1) {
      value *= 0.0;  // E (S - I)_{ij} = 0
    } else if (factors.size() == 2 && i != j) {
      value *= 1.0;  // d E[(Z_1'Z_2)^2] / d^2
    } else if (factors.size() == 2 && cm) {
      value *= cm->m4 - 1.0;  // Var[Z'Z] / d
    } else {
      return std::nullopt;
    }
  }
  return value;
}

T1aResult t1a_diagnostic(const DistributionSpec& spec, const MonomialSpec& h, const Stream& stream,
                         const FunctionalOptions& opts) {
  const int k = h.k();
  const int d = spec.dim();
  if (h.degree() > 2 * k) throw InvalidArgument("t1a: requires deg H <= 2k");
  const double scale = std::pow(static_cast<double>(d), 0.5 * h.degree());
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  const auto est = mc_run(opts.reps, 2, stream, opts.workers, [&](Stream& s, double* out) {
    Matrix z(d, k);
    draw_columns(spec, s, z);
    const Matrix e = deviation_of(z);
    out[0] = scale * h.evaluate(e);
    out[1] = std::pow(sqrt_d * spectral_norm(e), 2 * k + 1);
  });
  return {est[0], est[1], t1a_analytic(spec, h)};
}

void validate_t1b(int g, const MonomialSpec& h) {
  const int k = h.k();
  if (!(2 <= h.degree())) throw InvalidArgument("t1b: requires 2 <= deg H");
  if (!(h.degree() < g)) throw InvalidArgument("t1b: requires deg H < g");
  if (!(g <= k)) throw InvalidArgument("t1b: requires g <= k");
  const auto idx = h.indices();
  for (int i = 1; i <= g; ++i) {
    if (!std::binary_search(idx.begin(), idx.end(), i)) {
      throw InvalidArgument("t1b: H must involve every Z_i with i <= g (missing " +
                            std::to_string(i) + ")");
    }
  }
}

McEstimate t1b_diagnostic(const DistributionSpec& spec, int g, const MonomialSpec& h,
                          const Stream& stream, const FunctionalOptions& opts) {
  validate_t1b(g, h);
  const int k = h.k();
  const int d = spec.dim();
  const MonomialSpec gm = MonomialSpec::closed_chain(k, g);
  const double scale = std::pow(static_cast<double>(d), g);
  return mc_mean(opts.reps, stream, opts.workers, [&](Stream& s) {
    Matrix z(d, k);
    draw_columns(spec, s, z);
    const Matrix e = deviation_of(z);
    return scale * gm.evaluate(e) * h.evaluate(e);
  });
}

double chain_expectation(const MonomialSpec& g, int d, int* closed_length) {
  const int k = g.k();
  for (int j = 1; j <= k; ++j) {
    if (MonomialSpec::closed_chain(k, j) == g) {
      if (closed_length) *closed_length = j;
      return j == 1 ? 0.0 : std::pow(static_cast<double>(d), 1 - j);
    }
  }
  std::vector<int> cur;
  std::vector<std::vector<int>> all;
  enumerate_open(k, 0, cur, all);
  for (const auto& js : all) {
    if (MonomialSpec::open_chain(k, js) == g) {
      if (closed_length) *closed_length = 0;
      return 0.0;
    }
  }
  throw InvalidArgument("prop5: G must be an open chain or a closed chain monomial");
}

ExceptionalCase classify_exceptional(int closed_length, const MonomialSpec& h) {
  const int j = closed_length;
  if (j < 1) return ExceptionalCase::kNone;
  const auto& f = h.factors();
  if (f.size() == 1 && f[0].first == f[0].second && f[0].first < j) return ExceptionalCase::kA;
  if (f.size() == 1 && f[0].first < f[0].second && f[0].second < j) return ExceptionalCase::kB;
  if (f.size() == 2 && f[0] == f[1] && f[0].first < f[0].second && f[0].second < j) {
    return ExceptionalCase::kC;
  }
  return ExceptionalCase::kNone;
}

std::optional<double> exceptional_value(const DistributionSpec& spec, ExceptionalCase c) {
  const auto cm = spec.component_moments();
  if (!cm || c == ExceptionalCase::kNone) return std::nullopt;
  const double d = spec.dim();
  switch (c) {
    case ExceptionalCase::kA: return cm->m4 - 3.0;                      // Var[Z'Z]/d - 2
    case ExceptionalCase::kB: return cm->m3 * cm->m3;                   // E[(Z1'Z2)^3]/d
    case ExceptionalCase::kC: return (cm->m4 * cm->m4 - 9.0) / d;       // Var[(Z1'Z2)^2]/d^2 - 2(1+3/d)
    case ExceptionalCase::kNone: break;
  }
  return std::nullopt;
}

Prop5Result prop5_difference(const DistributionSpec& spec, const MonomialSpec& g,
                             const MonomialSpec& h, const Stream& stream,
                             const FunctionalOptions& opts) {
  if (g.k() != h.k()) throw InvalidArgument("prop5: G and H must have the same order k");
  const int k = g.k();
  if (g.degree() > k || h.degree() > k) throw InvalidArgument("prop5: requires deg G, deg H <= k");
  const int d = spec.dim();
  Prop5Result res;
  res.expected_g = chain_expectation(g, d, &res.closed_length);
  res.exceptional = classify_exceptional(res.closed_length, h);
  res.analytic = exceptional_value(spec, res.exceptional);
  const double scale = std::pow(static_cast<double>(d), g.degree());
  const double eg = res.expected_g;
  const auto gauss = DistributionSpec::gaussian(d);
  res.difference = mc_mean(opts.reps, stream, opts.workers, [&](Stream& s) {
    Stream sz = s.substream(0), sv = s.substream(1);
    Matrix z(d, k), v(d, k);
    draw_columns(spec, sz, z);
    draw_columns(gauss, sv, v);
    const Matrix ez = deviation_of(z), ev = deviation_of(v);
    return scale * ((g.evaluate(ez) - eg) * h.evaluate(ez) - (g.evaluate(ev) - eg) * h.evaluate(ev));
  });
  return res;
}

std::int64_t alternating_sum_j(int k) {
  std::int64_t s = 0;
  for (int j = 1; j <= k; ++j) s += (j % 2 == 0 ? 1 : -1) * binomial(k, j) * j;
  return s;
}

std::int64_t alternating_sum_j_closed(int k) {
  std::int64_t s = 0;
  for (int j = 0; j <= k - 1; ++j) s += (j % 2 == 0 ? 1 : -1) * binomial(k - 1, j);
  return -k * s;
}

std::int64_t alternating_sum_pairs(int k) {
  std::int64_t s = 0;
  for (int j = 1; j <= k; ++j) s += (j % 2 == 0 ? 1 : -1) * binomial(k, j) * binomial(j, 2);
  return s;
}

std::int64_t alternating_sum_pairs_closed(int k) {
  std::int64_t s = 0;
  for (int j = 0; j <= k - 2; ++j) s += (j % 2 == 0 ? 1 : -1) * binomial(k - 2, j);
  return binomial(k, 2) * s;
}

std::string exceptional_case_name(ExceptionalCase c) {
  switch (c) {
    case ExceptionalCase::kA: return "a";
    case ExceptionalCase::kB: return "b";
    case ExceptionalCase::kC: return "c";
    case ExceptionalCase::kNone: break;
  }
  return "none";
}

MonomialSpec parse_chain(int k, const std::string& text) {
  if (text.rfind("closedc", 0) == 0) {
    int j = 0;
    try {
      j = std::stoi(text.substr(7));
    } catch (const std::exception&) {
      throw InvalidArgument("chain: malformed closed chain '" + text + "'");
    }
    return MonomialSpec::closed_chain(k, j);
  }
  if (text.rfind("openc:", 0) == 0) {
    std::vector<int> js;
    std::string rest = text.substr(6);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const std::size_t next = rest.find(';', pos);
      const std::string tok = rest.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
      try {
        js.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw InvalidArgument("chain: malformed open chain '" + text + "'");
      }
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    return MonomialSpec::open_chain(k, js);
  }
  return MonomialSpec::parse(k, text);
}

void MomentsConfig::validate() const {
  const auto spec = DistributionSpec::make(parse_family(family), 2 * k + 1, df, shell_low);
  (void)spec;
  if (d_list.empty()) throw ConfigError("d_list: must be nonempty");
  for (std::size_t i = 0; i < d_list.size(); ++i) {
    if (d_list[i] <= k) throw ConfigError("d_list: dimensions must exceed k");
    if (i > 0 && d_list[i] <= d_list[i - 1]) throw ConfigError("d_list: must be strictly increasing");
  }
  if (k < 1) throw ConfigError("k: must be >= 1");
  if (reps < 2) throw ConfigError("reps: must be >= 2");
  for (const auto& h : t1a) {
    if (h == "norm") continue;
    try {
      MonomialSpec::parse(k, h);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("t1a: ") + e.what());
    }
  }
  for (const auto& h : t1b) {
    try {
      validate_t1b(t1b_g, MonomialSpec::parse(k, h));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("t1b: ") + e.what());
    }
  }
  if (prop5_g.size() != prop5_h.size()) {
    throw ConfigError("prop5_h: must pair one-to-one with prop5_g");
  }
  for (std::size_t i = 0; i < prop5_g.size(); ++i) {
    try {
      const auto g = parse_chain(k, prop5_g[i]);
      chain_expectation(g, d_list.front());
      MonomialSpec::parse(k, prop5_h[i]);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("prop5_g: ") + e.what());
    }
  }
}

std::vector<DiagnosticRow> run_moment_battery(const MomentsConfig& cfg) {
  cfg.validate();
  const FunctionalOptions fo{cfg.reps, cfg.workers > 0 ? cfg.workers : default_workers()};
  const Stream root = Stream(cfg.seed).substream(kMomentsTag);
  const Family fam = parse_family(cfg.family);
  std::vector<DiagnosticRow> rows;
  for (int d : cfg.d_list) {
    const auto spec = DistributionSpec::make(fam, d, cfg.df, cfg.shell_low);
    const Stream sd = root.substream(static_cast<std::uint64_t>(d));
    const std::string name = spec.name();
    for (std::size_t i = 0; i < cfg.t1a.size(); ++i) {
      const Stream s = sd.substream(0).substream(i);
      if (cfg.t1a[i] == "norm") {
        // H = e11 is a placeholder; only the norm moment is reported.
        const auto r = t1a_diagnostic(spec, MonomialSpec::parse(cfg.k, "e11"), s, fo);
        rows.push_back({name, "t1a-norm", "norm^" + std::to_string(2 * cfg.k + 1), d,
                        r.norm_moment.mean, r.norm_moment.se, std::nullopt});
        continue;
      }
      const auto h = MonomialSpec::parse(cfg.k, cfg.t1a[i]);
      const auto r = t1a_diagnostic(spec, h, s, fo);
      rows.push_back({name, "t1a", h.to_string(), d, r.scaled_moment.mean, r.scaled_moment.se,
                      r.analytic});
    }
    for (std::size_t i = 0; i < cfg.t1b.size(); ++i) {
      const auto h = MonomialSpec::parse(cfg.k, cfg.t1b[i]);
      const auto r = t1b_diagnostic(spec, cfg.t1b_g, h, sd.substream(1).substream(i), fo);
      rows.push_back({name, "t1b", "g=" + std::to_string(cfg.t1b_g) + "|" + h.to_string(), d,
                      r.mean, r.se, std::nullopt});
    }
    for (std::size_t i = 0; i < cfg.prop5_g.size(); ++i) {
      const auto g = parse_chain(cfg.k, cfg.prop5_g[i]);
      const auto h = MonomialSpec::parse(cfg.k, cfg.prop5_h[i]);
      const auto r = prop5_difference(spec, g, h, sd.substream(2).substream(i), fo);
      rows.push_back({name, "prop5", g.to_string() + "|" + h.to_string(), d, r.difference.mean,
                      r.difference.se, r.analytic});
    }
  }
  return rows;
}

void write_diagnostics_csv(const std::vector<DiagnosticRow>& rows, const std::string& path) {
  CsvWriter out(path, {"family", "condition", "monomial", "d", "estimate", "se",
                       "analytic_value_if_any"});
  for (const auto& r : rows) {
    out.row(r.family, r.condition, r.monomial, r.d, r.estimate, r.se,
            r.analytic ? format_double(*r.analytic) : std::string());
  }
}

}  // namespace projlab
