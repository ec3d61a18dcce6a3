#include "localdelay/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <variant>

namespace localdelay {

namespace {

constexpr std::int64_t kBlockSize = 2048;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform on (0, 1]: never zero, so r = R u^(1/d) > 0 and -log(u) is finite.
inline double uniform_open0(std::mt19937_64& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

__extension__ using uint128 = unsigned __int128;

// Multiply-high map of 64 random bits onto [0, n).
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<uint128>(rng()) * n) >> 64);
}

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  void merge(const CompensatedSum& o) {
    add(o.sum);
    add(o.comp);
  }
  double value() const { return sum + comp; }
};

// Runs realization indices [0, n) in fixed-size blocks. Each block has its
// own accumulator and blocks are merged in index order afterwards, so the
// result does not depend on the worker count or scheduling.
template <class Block, class MakeWorker>
std::vector<Block> run_blocks(std::int64_t n, int workers, const Block& proto,
                              MakeWorker make_worker) {
  const std::int64_t n_blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<Block> blocks(static_cast<std::size_t>(n_blocks), proto);
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto body = [&] {
    try {
      auto worker = make_worker();
      for (;;) {
        const std::int64_t b = next.fetch_add(1);
        if (b >= n_blocks) break;
        const std::int64_t end = std::min(n, (b + 1) * kBlockSize);
        for (std::int64_t i = b * kBlockSize; i < end; ++i)
          worker(static_cast<std::uint64_t>(i), blocks[static_cast<std::size_t>(b)]);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(n_blocks);
    }
  };

  int w = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  w = static_cast<int>(std::clamp<std::int64_t>(w, 1, std::max<std::int64_t>(1, n_blocks)));
  if (w == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    for (int t = 0; t < w; ++t) pool.emplace_back(body);
  }
  if (error) std::rethrow_exception(error);
  return blocks;
}

void check_options(const McOptions& o) {
  if (o.n_realizations < 1) throw std::invalid_argument("montecarlo: n_realizations >= 1");
  if (!(o.radius > 0.0) || !std::isfinite(o.radius))
    throw std::invalid_argument("montecarlo: radius must be > 0");
}

double expected_count(const NetworkConfig& c, double radius) {
  return c.lambda * unit_ball_volume(c.dim) * std::pow(radius, c.dim);
}

std::int64_t draw_count(double mean, std::mt19937_64& rng) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::int64_t> count(mean);
  return count(rng);
}

// u^k for the exponent k = alpha / d, exact repeated multiplication when k
// is a small integer.
struct PowerMap {
  double exponent = 1.0;
  int integer_exponent = 0;
  explicit PowerMap(double k) : exponent(k) {
    const double r = std::round(k);
    if (r == k && r >= 1.0 && r <= 8.0) integer_exponent = static_cast<int>(r);
  }
  double operator()(double u) const {
    if (integer_exponent == 0) return std::pow(u, exponent);
    double v = u;
    for (int i = 1; i < integer_exponent; ++i) v *= u;
    return v;
  }
};

double root_of_uniform(double u, int dim) {
  switch (dim) {
    case 1: return u;
    case 2: return std::sqrt(u);
    default: return std::cbrt(u);
  }
}

double shifted_gain(const NetworkConfig& c) {
  return c.theta * (std::pow(c.r0, c.alpha) + c.epsilon);
}

// P(C|Phi) = noise_factor * prod_i (q_i + 1 - m) / (1 + q_i), where
// q_i = (r_i^alpha + eps) / (theta (r0^alpha + eps)) and m is the per-slot
// probability that interferer i hits the typical link (1/N or p).
struct CellTerms {
  double hit = 1.0;          // m
  double miss = 0.0;         // 1 - m
  double noise_factor = 1.0; // e^{-theta' W N0 / N} or p e^{-theta' W N0}
};

CellTerms cell_terms(const NetworkConfig& c, const MacScheme& scheme) {
  const double noise = shifted_gain(c) * c.bandwidth * c.noise_psd;
  CellTerms t;
  if (const auto* f = std::get_if<Fhma>(&scheme)) {
    t.hit = 1.0 / f->n_subbands;
    t.miss = static_cast<double>(f->n_subbands - 1) / f->n_subbands;
    t.noise_factor = std::exp(-noise / f->n_subbands);
  } else {
    const double p = std::get<Aloha>(scheme).p;
    t.hit = p;
    t.miss = 1.0 - p;
    t.noise_factor = p * std::exp(-noise);
  }
  return t;
}

// Interferers sharing (theta, epsilon) share q_i; cells are grouped on it.
struct GainGroup {
  double scale = 0.0;  // R^alpha / theta'
  double offset = 0.0; // eps / theta'
  bool operator==(const GainGroup&) const = default;
};

struct BatchPlan {
  double mean_count = 0.0;
  PowerMap power{1.0};
  std::vector<GainGroup> groups;
  std::vector<std::size_t> group_of;
  std::vector<CellTerms> terms;
};

BatchPlan make_plan(std::span<const McCell> cells, double radius) {
  if (cells.empty()) throw std::invalid_argument("montecarlo: no cells");
  const NetworkConfig& ref = cells.front().config;
  BatchPlan plan;
  plan.mean_count = expected_count(ref, radius);
  plan.power = PowerMap(ref.alpha / ref.dim);
  const double r_alpha = std::pow(radius, ref.alpha);
  for (const McCell& cell : cells) {
    cell.config.validate();
    validate(cell.scheme);
    const NetworkConfig& c = cell.config;
    if (c.lambda != ref.lambda || c.dim != ref.dim || c.alpha != ref.alpha || c.r0 != ref.r0)
      throw std::invalid_argument("montecarlo: batch cells must share lambda, dim, alpha, r0");
    const double tg = shifted_gain(c);
    const GainGroup g{r_alpha / tg, c.epsilon / tg};
    auto it = std::find(plan.groups.begin(), plan.groups.end(), g);
    if (it == plan.groups.end()) it = plan.groups.insert(plan.groups.end(), g);
    plan.group_of.push_back(static_cast<std::size_t>(it - plan.groups.begin()));
    plan.terms.push_back(cell_terms(c, cell.scheme));
  }
  return plan;
}

// Computes 1/P(C|Phi) for every cell of the plan on realization `index`.
class ReciprocalWorker {
 public:
  ReciprocalWorker(const BatchPlan& plan, std::uint64_t seed) : plan_(plan), seed_(seed) {
    q_.resize(plan.groups.size());
    s_.resize(plan.groups.size());
    out_.resize(plan.terms.size());
  }

  std::span<const double> operator()(std::uint64_t index) {
    std::mt19937_64 rng = make_stream(seed_, index);
    const auto k = static_cast<std::size_t>(draw_count(plan_.mean_count, rng));
    v_.resize(k);
    for (std::size_t i = 0; i < k; ++i) v_[i] = plan_.power(uniform_open0(rng));

    for (std::size_t g = 0; g < plan_.groups.size(); ++g) {
      q_[g].resize(k);
      s_[g].resize(k);
      const double scale = plan_.groups[g].scale;
      const double offset = plan_.groups[g].offset;
      double* q = q_[g].data();
      double* s = s_[g].data();
      for (std::size_t i = 0; i < k; ++i) {
        q[i] = scale * v_[i] + offset;
        s[i] = 1.0 / (1.0 + q[i]);
      }
    }

    for (std::size_t c = 0; c < plan_.terms.size(); ++c) {
      const double* q = q_[plan_.group_of[c]].data();
      const double* s = s_[plan_.group_of[c]].data();
      const double miss = plan_.terms[c].miss;
      double p0 = 1.0, p1 = 1.0, p2 = 1.0, p3 = 1.0;
      std::size_t i = 0;
      for (; i + 4 <= k; i += 4) {
        p0 *= (q[i] + miss) * s[i];
        p1 *= (q[i + 1] + miss) * s[i + 1];
        p2 *= (q[i + 2] + miss) * s[i + 2];
        p3 *= (q[i + 3] + miss) * s[i + 3];
      }
      for (; i < k; ++i) p0 *= (q[i] + miss) * s[i];
      const double prob = plan_.terms[c].noise_factor * ((p0 * p1) * (p2 * p3));
      out_[c] = 1.0 / prob;
    }
    return out_;
  }

 private:
  const BatchPlan& plan_;
  std::uint64_t seed_;
  std::vector<double> v_;
  std::vector<std::vector<double>> q_, s_;
  std::vector<double> out_;
};

struct PowerSums {
  CompensatedSum s1, s2, s3, s4;
  void add(double a) {
    const double a2 = a * a;
    s1.add(a);
    s2.add(a2);
    s3.add(a2 * a);
    s4.add(a2 * a2);
  }
  void merge(const PowerSums& o) {
    s1.merge(o.s1);
    s2.merge(o.s2);
    s3.merge(o.s3);
    s4.merge(o.s4);
  }
};

bool is_divergent(const NetworkConfig& c, const MacScheme& scheme) {
  if (c.lambda == 0.0 || c.epsilon > 0.0) return false;
  if (const auto* f = std::get_if<Fhma>(&scheme)) return f->n_subbands == 1;
  return std::get<Aloha>(scheme).p == 1.0;
}

double safe_truncation_bias(const NetworkConfig& c, const MacScheme& scheme, double radius) {
  if (!(radius > c.r0)) return std::numeric_limits<double>::infinity();
  return truncation_bias(c, scheme, radius);
}

McEstimate finish_semi_analytic(const PowerSums& sums, std::int64_t n, const McCell& cell,
                                double radius) {
  const double nd = static_cast<double>(n);
  const double m1 = sums.s1.value() / nd;
  const double m2 = sums.s2.value() / nd;
  const double m3 = sums.s3.value() / nd;
  const double m4 = sums.s4.value() / nd;
  const double bessel = n > 1 ? nd / (nd - 1.0) : 0.0;
  // Covariance of (1/P, 1/P^2) across realizations.
  const double c11 = std::max(0.0, (m2 - m1 * m1) * bessel);
  const double c22 = std::max(0.0, (m4 - m2 * m2) * bessel);
  const double c12 = (m3 - m1 * m2) * bessel;

  double mean_scale, second_scale, mean_coef;
  if (const auto* f = std::get_if<Fhma>(&cell.scheme)) {
    const double nn = f->n_subbands;
    mean_scale = nn;              // D = N E[1/P]
    second_scale = nn * (nn + 1); // M2 = N (N+1) E[1/P^2]
    mean_coef = nn;
  } else {
    mean_scale = 1.0;
    second_scale = 2.0;
    mean_coef = 1.0;
  }
  McEstimate e;
  e.n_realizations = n;
  e.mean = mean_scale * m1;
  e.variance = second_scale * m2 - e.mean - e.mean * e.mean;
  e.se_mean = mean_scale * std::sqrt(c11 / nd);
  // Delta method on V(m1, m2) = second_scale m2 - mean_coef m1 - mean_coef^2 m1^2.
  const double g1 = -mean_coef - 2.0 * mean_coef * mean_coef * m1;
  const double g2 = second_scale;
  e.se_variance = std::sqrt(std::max(0.0, g1 * g1 * c11 + 2.0 * g1 * g2 * c12 + g2 * g2 * c22) / nd);
  e.truncation_exponent_error = safe_truncation_bias(cell.config, cell.scheme, radius);
  e.divergent = is_divergent(cell.config, cell.scheme);
  return e;
}

} // namespace

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t domain) {
  std::uint64_t s = splitmix64(seed ^ splitmix64(domain + 0x632BE59BD9B4E019ULL));
  s = splitmix64(s ^ splitmix64(index));
  return std::mt19937_64(s);
}

PppRealization sample_ppp(const NetworkConfig& config, double radius, std::mt19937_64& rng) {
  config.validate();
  if (!(radius > 0.0)) throw std::invalid_argument("sample_ppp: radius must be > 0");
  PppRealization r;
  r.radius = radius;
  const auto k = draw_count(expected_count(config, radius), rng);
  r.distances.resize(static_cast<std::size_t>(k));
  for (auto& d : r.distances) d = radius * root_of_uniform(uniform_open0(rng), config.dim);
  return r;
}

PppRealization sample_ppp(const NetworkConfig& config, double radius, std::uint64_t seed,
                          std::uint64_t index) {
  std::mt19937_64 rng = make_stream(seed, index);
  return sample_ppp(config, radius, rng);
}

double cond_success_prob(const PppRealization& realization, const NetworkConfig& config,
                         const MacScheme& scheme) {
  config.validate();
  validate(scheme);
  const CellTerms t = cell_terms(config, scheme);
  const double tg = shifted_gain(config);
  double prob = t.noise_factor;
  for (const double r : realization.distances) {
    const double q = (std::pow(r, config.alpha) + config.epsilon) / tg;
    prob *= (q + t.miss) / (1.0 + q);
  }
  return prob;
}

std::vector<McEstimate> estimate_delay_stats(std::span<const McCell> cells,
                                             const McOptions& options) {
  check_options(options);
  const BatchPlan plan = make_plan(cells, options.radius);
  const std::vector<PowerSums> proto(cells.size());
  auto blocks = run_blocks(options.n_realizations, options.workers, proto, [&] {
    return [worker = ReciprocalWorker(plan, options.seed)](std::uint64_t i,
                                                           std::vector<PowerSums>& acc) mutable {
      const auto recips = worker(i);
      for (std::size_t c = 0; c < recips.size(); ++c) acc[c].add(recips[c]);
    };
  });
  std::vector<PowerSums> total(cells.size());
  for (const auto& b : blocks)
    for (std::size_t c = 0; c < cells.size(); ++c) total[c].merge(b[c]);

  std::vector<McEstimate> out;
  out.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c)
    out.push_back(finish_semi_analytic(total[c], options.n_realizations, cells[c], options.radius));
  return out;
}

McEstimate estimate_delay_stats(const NetworkConfig& config, const MacScheme& scheme,
                                const McOptions& options) {
  const McCell cell{config, scheme};
  return estimate_delay_stats(std::span<const McCell>(&cell, 1), options).front();
}

SlotSimOutcome simulate_slots(const NetworkConfig& config, const MacScheme& scheme,
                              const PppRealization& realization, std::mt19937_64& rng,
                              std::int64_t cap) {
  config.validate();
  validate(scheme);
  if (cap < 1) throw std::invalid_argument("simulate_slots: cap >= 1");

  auto path_gain = [&](double r) { return 1.0 / (std::pow(r, config.alpha) + config.epsilon); };
  std::vector<double> gains;
  gains.reserve(realization.distances.size());
  for (const double r : realization.distances) gains.push_back(path_gain(r));
  const double signal_gain = path_gain(config.r0);

  const auto* fhma = std::get_if<Fhma>(&scheme);
  const std::uint64_t n_bands = fhma ? static_cast<std::uint64_t>(fhma->n_subbands) : 1;
  const double p = fhma ? 1.0 : std::get<Aloha>(scheme).p;
  const double noise = config.bandwidth * config.noise_psd / static_cast<double>(n_bands);
  const std::int64_t needed = static_cast<std::int64_t>(n_bands);
  auto exp1 = [&rng] { return -std::log(uniform_open0(rng)); };
  auto bernoulli = [&rng](double prob) { return prob >= 1.0 || uniform_open0(rng) <= prob; };

  std::int64_t successes = 0;
  for (std::int64_t slot = 1; slot <= cap; ++slot) {
    bool ok = false;
    if (bernoulli(p)) { // ALOHA: the typical transmitter must be active
      const std::uint64_t band = n_bands > 1 ? uniform_index(rng, n_bands) : 0;
      const double h0 = exp1();
      // SINR > theta  <=>  I < h0 g0 / theta - noise
      const double budget = h0 * signal_gain / config.theta - noise;
      if (budget > 0.0) {
        double interference = 0.0;
        ok = true;
        for (const double g : gains) {
          const bool hits = fhma ? (n_bands == 1 || uniform_index(rng, n_bands) == band)
                                 : bernoulli(p);
          if (!hits) continue;
          interference += exp1() * g;
          if (interference >= budget) {
            ok = false;
            break;
          }
        }
      }
    }
    if (ok && ++successes == needed) return {slot, false};
  }
  return {cap, true};
}

SlotSimOutcome simulate_slots(const NetworkConfig& config, const MacScheme& scheme,
                              const PppRealization& realization, std::uint64_t seed,
                              std::int64_t cap) {
  std::mt19937_64 rng = make_stream(seed, 0, 1);
  return simulate_slots(config, scheme, realization, rng, cap);
}

namespace {

struct SlotSums {
  CompensatedSum s1, s2, s3, s4;
  std::int64_t censored = 0;
  void merge(const SlotSums& o) {
    s1.merge(o.s1);
    s2.merge(o.s2);
    s3.merge(o.s3);
    s4.merge(o.s4);
    censored += o.censored;
  }
};

} // namespace

McEstimate estimate_slot_level(const NetworkConfig& config, const MacScheme& scheme,
                               const McOptions& options, std::int64_t cap) {
  check_options(options);
  config.validate();
  validate(scheme);
  auto blocks = run_blocks(options.n_realizations, options.workers, SlotSums{}, [&] {
    return [&](std::uint64_t i, SlotSums& acc) {
      std::mt19937_64 geometry = make_stream(options.seed, i);
      const PppRealization phi = sample_ppp(config, options.radius, geometry);
      std::mt19937_64 slots = make_stream(options.seed, i, 1);
      const SlotSimOutcome out = simulate_slots(config, scheme, phi, slots, cap);
      const double x = static_cast<double>(out.delay);
      acc.s1.add(x);
      acc.s2.add(x * x);
      acc.s3.add(x * x * x);
      acc.s4.add(x * x * x * x);
      acc.censored += out.censored ? 1 : 0;
    };
  });
  SlotSums total;
  for (const auto& b : blocks) total.merge(b);

  const double n = static_cast<double>(options.n_realizations);
  const double m1 = total.s1.value() / n;
  const double m2 = total.s2.value() / n;
  const double m3 = total.s3.value() / n;
  const double m4 = total.s4.value() / n;
  const double var_pop = std::max(0.0, m2 - m1 * m1);
  const double central4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;

  McEstimate e;
  e.n_realizations = options.n_realizations;
  e.mean = m1;
  e.variance = options.n_realizations > 1 ? var_pop * n / (n - 1.0) : 0.0;
  e.se_mean = std::sqrt(e.variance / n);
  e.se_variance = std::sqrt(std::max(0.0, central4 - var_pop * var_pop) / n);
  e.censored_fraction = static_cast<double>(total.censored) / n;
  e.truncation_exponent_error = safe_truncation_bias(config, scheme, options.radius);
  e.divergent = is_divergent(config, scheme);
  return e;
}

std::vector<CcdfPoint> empirical_ccdf_reciprocal(const NetworkConfig& config,
                                                 std::span<const double> t_grid,
                                                 const McOptions& options) {
  check_options(options);
  for (const double t : t_grid)
    if (!(t > 1.0)) throw std::invalid_argument("empirical_ccdf_reciprocal: every t must exceed 1");
  const McCell cell{config, Fhma{1}};
  const BatchPlan plan = make_plan(std::span<const McCell>(&cell, 1), options.radius);
  const std::vector<double> grid(t_grid.begin(), t_grid.end());
  const std::vector<std::int64_t> proto(grid.size(), 0);
  auto blocks = run_blocks(options.n_realizations, options.workers, proto, [&] {
    return [&grid, worker = ReciprocalWorker(plan, options.seed)](
               std::uint64_t i, std::vector<std::int64_t>& acc) mutable {
      const double recip = worker(i).front();
      for (std::size_t j = 0; j < grid.size(); ++j)
        if (recip > grid[j]) ++acc[j];
    };
  });
  const double n = static_cast<double>(options.n_realizations);
  std::vector<CcdfPoint> out;
  out.reserve(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::int64_t count = 0;
    for (const auto& b : blocks) count += b[j];
    const double f = static_cast<double>(count) / n;
    out.push_back({grid[j], f, std::sqrt(f * (1.0 - f) / n)});
  }
  return out;
}

double truncation_bias(const NetworkConfig& config, const MacScheme& scheme, double radius) {
  config.validate();
  validate(scheme);
  if (!(radius > config.r0)) throw std::domain_error("truncation_bias: radius must exceed r0");
  const double d = config.dim;
  // lambda int_{|x|>R} (1/f(x) - 1) dx with 1/f - 1 <= m theta' |x|^-alpha.
  const double far = config.lambda * unit_ball_volume(config.dim) * d * shifted_gain(config) *
                     std::pow(radius, d - config.alpha) / (config.alpha - d);
  if (const auto* f = std::get_if<Fhma>(&scheme)) return far / f->n_subbands;
  return far * std::get<Aloha>(scheme).p;
}

} // namespace localdelay
