#include "cdlab/tools/battery.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include "cdlab/analysis.hpp"
#include "cdlab/atomic_model.hpp"
#include "cdlab/bergman.hpp"
#include "cdlab/geometry.hpp"
#include "cdlab/intertwiner.hpp"
#include "cdlab/parallel.hpp"
#include "cdlab/tools/csv.hpp"

namespace cdlab::tools {

namespace {

using Rng = std::mt19937_64;

double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double symmetric(Rng& rng) { return 2.0 * unit(rng) - 1.0; }
cplx random_complex(Rng& rng) { return {symmetric(rng), symmetric(rng)}; }

// Random m on every position the valency allows, converted to μ.
void randomize_coefficients(ModelSpec& spec, Rng& rng) {
  const BoundednessVerdict verdict = classify_boundedness(spec);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(spec.n, spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t j = i + 1; j < spec.n; ++j) {
      if (!verdict.forced_zero(i, j)) m(i, j) = random_complex(rng);
    }
  }
  spec.mu = m_to_mu(m);
}

std::string kv(const std::string& key, double v) { return key + "=" + format_number(v); }
std::string kv(const std::string& key, std::size_t v) { return key + "=" + format_number(v); }
std::string join(std::initializer_list<std::string> parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

struct Check {
  bool passed = false;
  std::string measured;
};

Check intertwining_identity(std::uint64_t seed) {
  constexpr double kValencies[] = {0.5, 1.0, 2.0, 3.0};
  constexpr std::size_t kSpecs = 20;
  Rng rng(seed);
  std::vector<ModelSpec> specs;
  for (std::size_t s = 0; s < kSpecs; ++s) {
    const std::size_t n = 2 + (s / 4) % 4;
    ModelSpec spec = ModelSpec::make(0.5 + 1.5 * unit(rng), kValencies[s % 4], n, 256);
    randomize_coefficients(spec, rng);
    specs.push_back(spec);
  }
  std::vector<double> residual(kSpecs);
  parallel_for(kSpecs, [&](std::size_t s) { residual[s] = check_intertwining(specs[s]); });
  const double worst = *std::max_element(residual.begin(), residual.end());
  return {worst <= 1e-10, join({kv("specs", kSpecs), kv("max_residual", worst)})};
}

Check coefficient_recursions(std::uint64_t seed) {
  Rng rng(seed + 1);
  double worst = 0.0;
  std::size_t tables = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      Eigen::MatrixXcd mu = Eigen::MatrixXcd::Identity(n, n);
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          mu(i, j) = random_complex(rng);
          m(i, j) = random_complex(rng);
        }
      }
      worst = std::max(worst, (m_to_mu(mu_to_m(mu)) - mu).cwiseAbs().maxCoeff());
      worst = std::max(worst, (mu_to_m(m_to_mu(m)) - m).cwiseAbs().maxCoeff());
      tables += 2;
    }
  }
  double ones = 0.0;
  for (std::size_t n = 2; n <= 8; ++n) {
    Eigen::MatrixXcd mu = Eigen::MatrixXcd::Identity(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) mu(i, j) = 1.0;
    }
    const Eigen::MatrixXcd m = mu_to_m(mu);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) ones = std::max(ones, std::abs(m(i, j) + 1.0));
    }
  }
  return {worst <= 1e-10 && ones <= 1e-10,
          join({kv("tables", tables), kv("max_roundtrip_error", worst), kv("all_ones_max_error", ones)})};
}

struct BoxCell {
  double lambda0;
  double valency;
  std::size_t k;
};

std::vector<BoxCell> parameter_box() {
  std::vector<BoxCell> cells;
  for (double l0 : {1.0, 1.5, 2.0}) {
    for (double v : {1.0, 2.0, 3.0}) {
      for (std::size_t k : {0, 1, 2}) cells.push_back({l0, v, k});
    }
  }
  return cells;
}

// Sup of connector entries over columns l < N - k.
double connector_sup(double li, double lj, std::size_t k, std::size_t N) {
  double sup = 0.0;
  for (std::size_t l = 0; l + k < N; ++l) sup = std::max(sup, connector_entry(li, lj, k, l));
  return sup;
}

Check boundedness_dichotomy(std::uint64_t) {
  constexpr double kStableRatio = 1.05;
  const std::vector<BoxCell> cells = parameter_box();
  std::size_t agree = 0, unstable = 0;
  double max_stable_ratio = 0.0, min_unstable_ratio = INFINITY;
  for (const BoxCell& c : cells) {
    const double lj = c.lambda0 + static_cast<double>(c.k + 1) * c.valency;
    const double ratio = connector_sup(c.lambda0, lj, c.k, 2048) / connector_sup(c.lambda0, lj, c.k, 1024);
    const bool stable = ratio <= kStableRatio;
    const ModelSpec spec = ModelSpec::make(c.lambda0, c.valency, c.k + 2, 16);
    const bool forced = classify_boundedness(spec).forced_zero(0, c.k + 1);
    agree += stable != forced ? 1 : 0;
    if (stable) {
      max_stable_ratio = std::max(max_stable_ratio, ratio);
    } else {
      ++unstable;
      min_unstable_ratio = std::min(min_unstable_ratio, ratio);
    }
  }
  return {agree == cells.size(),
          join({kv("cells", cells.size()), kv("agreeing", agree), kv("unstable_cells", unstable),
                kv("max_stable_ratio", max_stable_ratio), kv("min_unstable_ratio", min_unstable_ratio)})};
}

Check sylvester_closed_form(std::uint64_t) {
  const std::vector<BoxCell> cells = parameter_box();
  std::vector<double> residual(cells.size()), deviation(cells.size());
  parallel_for(cells.size(), [&](std::size_t c) {
    const BoxCell& cell = cells[c];
    const double lk1 = cell.lambda0 + static_cast<double>(cell.k + 1) * cell.valency;
    residual[c] = solve_sylvester_closed(cell.lambda0, lk1, cell.k, 1024).residual;
    const SylvesterSolution fit = solve_sylvester_closed(cell.lambda0, lk1, cell.k, 4096);
    const double expected = (cell.lambda0 - lk1 + 2.0 * static_cast<double>(cell.k) + 2.0) / 2.0;
    deviation[c] = fit.fitted_exponent ? std::abs(*fit.fitted_exponent - expected) : INFINITY;
  });
  const double worst_res = *std::max_element(residual.begin(), residual.end());
  const double worst_dev = *std::max_element(deviation.begin(), deviation.end());
  return {worst_res <= 1e-9 && worst_dev <= 0.15,
          join({kv("cells", cells.size()), kv("max_residual_N1024", worst_res),
                kv("max_exponent_deviation_N4096", worst_dev)})};
}

bool unit_upper_triangular(const TruncatedOperator& Y, std::size_t n) {
  const std::size_t N = Y.block_dim();
  for (std::size_t i = 0; i < n; ++i) {
    if (!Y.block(i, i).identical(TruncatedOperator::identity(N))) return false;
    for (std::size_t j = 0; j < i; ++j) {
      if (!Y.block(i, j).empty()) return false;
    }
  }
  return true;
}

Check similarity_reduction(std::uint64_t seed) {
  struct Cell {
    double valency;
    std::size_t n;
  };
  std::vector<Cell> cells;
  for (double v : {2.0, 2.5, 3.0}) {
    for (std::size_t n : {2, 3, 4}) cells.push_back({v, n});
  }
  Rng rng(seed + 5);
  std::vector<ModelSpec> specs;
  for (const Cell& c : cells) {
    ModelSpec spec = ModelSpec::make(1.0, c.valency, c.n, 512);
    randomize_coefficients(spec, rng);
    specs.push_back(spec);
  }
  std::vector<double> residual(cells.size()), change(cells.size());
  std::vector<char> triangular(cells.size());
  parallel_for(cells.size(), [&](std::size_t c) {
    const ReductionResult r = similarity_reduce(specs[c]);
    ModelSpec doubled = specs[c];
    doubled.trunc = 1024;
    const ReductionResult r2 = similarity_reduce(doubled);
    residual[c] = r.offdiag_residual;
    change[c] = std::abs(r2.cond_Y - r.cond_Y) / r.cond_Y;
    triangular[c] = unit_upper_triangular(r.Y, specs[c].n) && unit_upper_triangular(r2.Y, specs[c].n);
  });
  const double worst_res = *std::max_element(residual.begin(), residual.end());
  const double worst_change = *std::max_element(change.begin(), change.end());
  const bool all_triangular = std::all_of(triangular.begin(), triangular.end(), [](char t) { return t != 0; });
  return {worst_res <= 1e-6 && worst_change < 0.05 && all_triangular,
          join({kv("cells", cells.size()), kv("max_offdiag_residual", worst_res),
                kv("max_cond_change", worst_change), std::string("unit_upper_triangular=") +
                (all_triangular ? "true" : "false")})};
}

Check curvature_and_sff(std::uint64_t) {
  const DiscGrid grid = DiscGrid::default_grid();
  double curvature = 0.0;
  for (double lam : {0.5, 1.0, 2.0, 3.5}) {
    const MetricFunction h = [lam](cplx z) {
      Eigen::MatrixXcd m(1, 1);
      m(0, 0) = std::pow(1.0 - std::norm(z), -lam);
      return m;
    };
    for (const cplx& w : grid.points) {
      const double exact = line_curvature(lam, w);
      curvature = std::max(curvature, std::abs(curvature_from_metric(h, w, grid.step)(0, 0) - exact) / std::abs(exact));
    }
  }

  double routes = 0.0;
  for (double v : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    for (cplx mu : {cplx(1.0, 0.0), cplx(0.3, -0.7), cplx(2.0, 1.0)}) {
      ModelSpec spec = ModelSpec::make(1.2, v, 3, 512);
      spec.mu(0, 1) = mu;
      spec.mu(1, 2) = 0.5 * mu;
      for (std::size_t i = 0; i < 2; ++i) {
        for (const cplx& w : grid.points) {
          routes = std::max(routes, std::abs(sff_adjacent(spec, i, w) - sff_adjacent_from_frame(spec, i, w, grid.step)));
        }
      }
    }
  }

  bool rigid = true;
  double min_distinct = INFINITY, max_equal = 0.0;
  auto compare = [&](const ModelSpec& a, const ModelSpec& b) {
    const SffComparison cmp = sff_distinguishes(a, b, grid);
    rigid = rigid && cmp.distinguishes;
    for (const SffPairDeviation& p : cmp.pairs) {
      if (p.coefficients_equal) {
        max_equal = std::max(max_equal, p.max_deviation);
      } else {
        min_distinct = std::min(min_distinct, p.max_deviation);
      }
    }
  };
  for (double v : {0.5, 1.0, 1.5, 3.0}) {
    ModelSpec a = ModelSpec::make(1.0, v, 2, 512);
    a.mu(0, 1) = cplx(1.0, 0.0);
    ModelSpec scaled = a, rotated = a;
    scaled.mu(0, 1) = cplx(2.0, 0.0);
    rotated.mu(0, 1) = std::polar(1.0, 0.3);
    compare(a, scaled);
    compare(a, rotated);
    compare(a, a);
  }
  for (double v : {1.0, 1.5, 3.0}) {
    ModelSpec a = ModelSpec::make(1.0, v, 3, 512);
    a.mu(0, 1) = 1.0;
    a.mu(1, 2) = 0.5;
    a.mu(0, 2) = 0.2;
    ModelSpec b = a;
    b.mu(0, 2) = 0.7;
    compare(a, b);
  }
  const bool ok = curvature <= 1e-5 && routes <= 1e-7 && rigid && min_distinct > 1e-8 && max_equal <= 1e-10;
  return {ok, join({kv("max_curvature_rel_error", curvature), kv("max_sff_route_gap", routes),
                    kv("min_distinct_deviation", min_distinct), kv("max_equal_deviation", max_equal)})};
}

Check commutant_construction(std::uint64_t seed) {
  struct Cell {
    std::size_t n;
    double valency;
    std::size_t degree;
  };
  std::vector<Cell> cells;
  for (std::size_t n : {2, 3, 4}) {
    for (double v : {0.5, 1.0, 1.5}) {
      for (std::size_t d = 0; d <= 8; ++d) cells.push_back({n, v, d});
    }
  }
  Rng rng(seed + 7);
  std::vector<ModelSpec> specs;
  std::vector<std::vector<cplx>> phis;
  for (const Cell& c : cells) {
    ModelSpec spec = ModelSpec::make(1.0, c.valency, c.n, 512);
    randomize_coefficients(spec, rng);
    specs.push_back(spec);
    std::vector<cplx> phi(c.degree + 1);
    for (cplx& a : phi) a = random_complex(rng);
    phis.push_back(phi);
  }
  std::vector<double> residual(cells.size());
  parallel_for(cells.size(), [&](std::size_t c) { residual[c] = commutant_element(specs[c], phis[c]).residual; });
  const double worst = *std::max_element(residual.begin(), residual.end());
  return {worst <= 1e-7, join({kv("cells", cells.size()), kv("max_residual", worst)})};
}

Check irreducibility_probe(std::uint64_t seed) {
  Rng rng(seed + 8);
  std::size_t connected_ok = 0, connected_total = 0, split_ok = 0, split_total = 0;
  for (std::size_t n = 2; n <= 6; ++n) {
    ModelSpec spec = ModelSpec::make(1.0, 2.0, n, 16);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) spec.mu(i, j) = j == i + 1 ? std::polar(0.5 + unit(rng), 6.0 * unit(rng))
                                                                         : random_complex(rng);
    }
    const IdempotentReport report = idempotent_probe(spec);
    ++connected_total;
    connected_ok += report.only_trivial && report.rule_matches_matrix ? 1 : 0;

    // Cut the chain after the atoms flagged in `cuts`; m vanishes across cuts.
    for (std::uint32_t cuts = 0; cuts < (1u << (n - 1)); ++cuts) {
      std::vector<std::size_t> segment(n, 0);
      for (std::size_t i = 1; i < n; ++i) segment[i] = segment[i - 1] + ((cuts >> (i - 1)) & 1u);
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (segment[i] == segment[j]) m(i, j) = std::polar(0.5 + unit(rng), 6.0 * unit(rng));
        }
      }
      ModelSpec split = spec;
      split.mu = m_to_mu(m);
      const std::size_t c = segment.back() + 1;
      const IdempotentReport r = idempotent_probe(split);
      ++split_total;
      split_ok += r.survivors == (std::size_t{1} << c) && r.components == c && r.rule_matches_matrix ? 1 : 0;
    }
  }
  return {connected_ok == connected_total && split_ok == split_total,
          join({kv("connected_ok", connected_ok), kv("connected_total", connected_total), kv("split_ok", split_ok),
                kv("split_total", split_total)})};
}

Check halmos_dichotomy(std::uint64_t) {
  constexpr std::size_t kPowers = 200;
  constexpr std::size_t kTrunc = 4096;
  ModelSpec contractive = ModelSpec::make(1.5, 2.0, 2, kTrunc);
  contractive.mu(0, 1) = 1.0;
  const ReductionResult reduced = similarity_reduce(contractive);
  PowerTraceOptions opts;
  opts.edge_margin = reduced.margin;
  const PowerTrace bounded = power_trace(reduced.interior_conjugated(), kPowers, opts);
  const double max_norm = *std::max_element(bounded.norms.begin(), bounded.norms.end());

  ModelSpec divergent = ModelSpec::make(1.5, 1.0, 2, kTrunc);
  divergent.mu(0, 1) = 1.0;
  const PowerTrace growing = power_trace(divergent, kPowers, kTrunc);
  const bool ok = max_norm <= 1.0 + 1e-6 && bounded.max_tail_ratio <= kTailTolerance &&
                  growing.classification == PowerClass::kDivergent && std::abs(growing.slope - 0.5) <= 0.15;
  return {ok, join({kv("valency2_max_norm", max_norm), kv("valency2_tail_ratio", bounded.max_tail_ratio),
                    kv("valency1_slope", growing.slope), kv("valency1_r2", growing.r2),
                    "valency1_class=" + to_string(growing.classification)})};
}

struct Definition {
  const char* name;
  const char* threshold;
  double budget;
  std::function<Check(std::uint64_t)> run;
};

const std::vector<Definition>& definitions() {
  static const std::vector<Definition> defs = {
      {"intertwining identity", "max_residual <= 1e-10 at N=256", 10.0, intertwining_identity},
      {"coefficient recursions", "round trips and all-ones case <= 1e-10", 1.0, coefficient_recursions},
      {"boundedness dichotomy", "sup ratio <= 1.05 iff classifier bounded in every cell", 30.0,
       boundedness_dichotomy},
      {"sylvester closed form", "residual <= 1e-9 at N=1024; |exponent error| <= 0.15 at N=4096", 60.0,
       sylvester_closed_form},
      {"similarity reduction", "residual <= 1e-6 at N=512; cond change < 0.05; unit upper-triangular Y", 60.0,
       similarity_reduction},
      {"curvature and sff", "curvature <= 1e-5; routes <= 1e-7; distinct > 1e-8; equal <= 1e-10", 20.0,
       curvature_and_sff},
      {"commutant construction", "max_residual <= 1e-7 at N=512", 30.0, commutant_construction},
      {"strong irreducibility probe", "only {0, I} when connected; 2^c survivors for c components", 1.0,
       irreducibility_probe},
      {"halmos dichotomy", "valency 2: norms <= 1 + 1e-6; valency 1: divergent with slope 0.5 +- 0.15", 120.0,
       halmos_dichotomy},
  };
  return defs;
}

}  // namespace

CriterionResult run_criterion(int id, std::uint64_t seed) {
  if (id < 1 || id > kBatteryCriteria) throw std::out_of_range("criterion id out of range");
  const Definition& def = definitions()[static_cast<std::size_t>(id - 1)];
  CriterionResult out;
  out.id = id;
  out.name = def.name;
  out.threshold = def.threshold;
  out.budget_seconds = def.budget;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Check check = def.run(seed);
    out.passed = check.passed;
    out.measured = check.measured;
  } catch (const std::exception& e) {
    out.passed = false;
    out.measured = std::string("exception: ") + e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<CriterionResult> run_battery(std::uint64_t seed) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kBatteryCriteria; ++id) out.push_back(run_criterion(id, seed));
  return out;
}

}  // namespace cdlab::tools
