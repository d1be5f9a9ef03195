#include "hkq/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "hkq/error.hpp"
#include "hkq/parallel.hpp"
#include "hkq/spectrum.hpp"

namespace hkq {

namespace {

constexpr double kZ95 = 1.959963984540054;

struct Kahan {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t batch_seed(std::uint64_t master, std::uint64_t batch) {
  return splitmix64(splitmix64(master) + batch);
}

// Flat-model point as 4n reals (re lambda, im lambda, re mu, im mu per point).
struct Model {
  int n = 0;
  int d = 0;
  RVector x;
  std::vector<RVector> images;  // pi(x) for every permutation
  double sphere_area = 0.0;     // |S^{d-1}|
  double factorial = 1.0;
};

Model make_model(const Configuration& q) {
  validate_centered(q);
  Model m;
  m.n = static_cast<int>(q.n());
  if (m.n < 2) throw Error(ErrorCode::invalid_argument, "flat model needs n >= 2");
  m.d = 4 * (m.n - 1);
  m.x = to_real(q.points);
  std::vector<int> perm(static_cast<size_t>(m.n));
  for (int i = 0; i < m.n; ++i) perm[static_cast<size_t>(i)] = i;
  do {
    RVector img(4 * m.n);
    for (int i = 0; i < m.n; ++i) img.segment(4 * i, 4) = m.x.segment(4 * perm[static_cast<size_t>(i)], 4);
    m.images.push_back(img);
  } while (std::next_permutation(perm.begin(), perm.end()));
  m.factorial = static_cast<double>(m.images.size());
  m.sphere_area = 2.0 * std::pow(std::numbers::pi, 0.5 * m.d) / std::tgamma(0.5 * m.d);
  return m;
}

double gap_min(const RVector& y, int n) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) best = std::min(best, (y.segment(4 * i, 4) - y.segment(4 * j, 4)).norm());
  return best;
}

// Uniform direction in the centered subspace.
RVector random_direction(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  RVector g(4 * n);
  for (Index i = 0; i < g.size(); ++i) g(i) = nd(rng);
  for (int c = 0; c < 4; ++c) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += g(4 * i + c);
    mean /= n;
    for (int i = 0; i < n; ++i) g(4 * i + c) -= mean;
  }
  return g / g.norm();
}

// Mixture proposal: with probability alpha a kernel r^(2-d)-adapted ball around a
// uniformly chosen pi(x), otherwise a radial law (r^(d-4) up to L, L/r^2 beyond).
struct Proposal {
  const Model* m;
  double alpha = 0.5;
  double a = 1.0;  // kernel radius
  double L = 1.0;
  double beta = 0.5;  // inner mass of the radial law

  double kernel_radial(double r) const { return r < a ? 2.0 * r / (a * a) : 0.0; }
  double global_radial(double r) const {
    const int d = m->d;
    if (r < L) return beta * (d - 3) * std::pow(r / L, d - 4) / L;
    return (1.0 - beta) * L / (r * r);
  }
  double density(const RVector& y) const {
    const double s = m->sphere_area;
    double k = 0.0;
    for (const auto& img : m->images) {
      const double r = (y - img).norm();
      if (r < a) k += kernel_radial(r) / (s * std::pow(r, m->d - 1));
    }
    k /= m->factorial;
    const double r0 = y.norm();
    const double g = global_radial(r0) / (s * std::pow(r0, m->d - 1));
    return alpha * k + (1.0 - alpha) * g;
  }
  RVector draw(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const RVector dir = random_direction(rng, m->n);
    if (u01(rng) < alpha) {
      std::uniform_int_distribution<size_t> pick(0, m->images.size() - 1);
      const RVector& c = m->images[pick(rng)];
      const double r = a * std::sqrt(u01(rng));
      return c + r * dir;
    }
    double r = 0.0;
    if (u01(rng) < beta) {
      r = L * std::pow(1.0 - u01(rng), 1.0 / (m->d - 3));
    } else {
      r = L / (1.0 - u01(rng));
    }
    return r * dir;
  }
};

struct Moments {
  Kahan s[4];
  Kahan ss[4];
};

RegionValue finish(const Kahan& s, const Kahan& ss, double count) {
  const double mean = s.sum / count;
  const double var = std::max(0.0, ss.sum / count - mean * mean);
  return {mean, kZ95 * std::sqrt(var / count)};
}

}  // namespace

double orbifold_distance(const Configuration& x, const Configuration& y) {
  if (x.n() != y.n()) throw Error(ErrorCode::dimension_mismatch, "configurations differ in size");
  std::vector<int> perm(static_cast<size_t>(x.n()));
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (size_t i = 0; i < perm.size(); ++i) {
      const double dd = distance(x.points[i], y.points[static_cast<size_t>(perm[i])]);
      s += dd * dd;
    }
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best);
}

double weight(const Configuration& y) {
  if (y.n() < 2) throw Error(ErrorCode::invalid_argument, "weight needs n >= 2");
  const double r = rho(y.points);
  if (r == 0.0) return std::numeric_limits<double>::infinity();
  const double s = sigma(y.points);
  return 1.0 / (r * s * s);
}

double ball_volume(int d) { return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

PotentialEstimate estimate_potential(const Configuration& x, const SamplerOptions& options) {
  const Model m = make_model(x);
  const double rho_x = std::sqrt(static_cast<double>(m.n)) * m.x.norm();
  if (rho_x < 10.0) throw Error(ErrorCode::invalid_argument, "estimate_potential needs rho(x) >= 10");
  if (options.samples == 0 || options.batch_size == 0) {
    throw Error(ErrorCode::invalid_argument, "sample and batch counts must be positive");
  }
  Proposal prop{&m};
  prop.a = 0.5 * rho_x;
  prop.L = m.x.norm();
  const double sqrt_n = std::sqrt(static_cast<double>(m.n));

  const std::uint64_t batches = (options.samples + options.batch_size - 1) / options.batch_size;
  std::vector<Moments> per_batch(batches);
  parallel_for(batches, options.jobs, [&](size_t b) {
    std::mt19937_64 rng(batch_seed(options.seed, b));
    const std::uint64_t count =
        std::min<std::uint64_t>(options.batch_size, options.samples - b * options.batch_size);
    Moments& mo = per_batch[b];
    for (std::uint64_t i = 0; i < count; ++i) {
      const RVector y = prop.draw(rng);
      const double ny = y.norm();
      double dist = std::numeric_limits<double>::infinity();
      for (const auto& img : m.images) dist = std::min(dist, (y - img).norm());
      const double sg = gap_min(y, m.n) + 1.0;
      const double f = std::pow(dist, 2 - m.d) / (sqrt_n * ny * sg * sg);
      const double v = f / prop.density(y) / m.factorial;
      int region = 2;
      if (dist < 0.5 * rho_x) {
        region = 1;
      } else if (ny < 2.0 * rho_x) {
        region = 0;
      }
      for (int r = 0; r < 3; ++r) {
        const double vr = r == region ? v : 0.0;
        mo.s[r].add(vr);
        mo.ss[r].add(vr * vr);
      }
      mo.s[3].add(v);
      mo.ss[3].add(v * v);
    }
  });
  Moments total;
  for (const auto& mo : per_batch)
    for (int r = 0; r < 4; ++r) {
      total.s[r].add(mo.s[r].sum);
      total.ss[r].add(mo.ss[r].sum);
    }
  const double count = static_cast<double>(options.samples);
  PotentialEstimate e;
  e.x = x;
  e.samples = options.samples;
  e.d = m.d;
  e.f1 = finish(total.s[0], total.ss[0], count);
  e.f2 = finish(total.s[1], total.ss[1], count);
  e.f3 = finish(total.s[2], total.ss[2], count);
  const RegionValue all = finish(total.s[3], total.ss[3], count);
  e.value = all.value;
  e.ci_halfwidth = all.ci_halfwidth;
  e.non_converged = e.ci_halfwidth > 0.25 * e.value;
  return e;
}

std::vector<VolumeSample> volume_profile(const Configuration& x, std::span<const double> radii,
                                         const SamplerOptions& options) {
  const Model m = make_model(x);
  if (options.samples == 0) throw Error(ErrorCode::invalid_argument, "sample count must be positive");
  for (double tau : radii) {
    if (!(tau > 0.0)) throw Error(ErrorCode::invalid_argument, "radii must be positive");
  }
  std::vector<VolumeSample> out(radii.size());
  const double vol_unit = ball_volume(m.d);
  parallel_for(radii.size(), options.jobs, [&](size_t k) {
    const double tau = radii[k];
    std::mt19937_64 rng(batch_seed(options.seed, k));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Kahan s, ss, s1, s2;
    for (std::uint64_t i = 0; i < options.samples; ++i) {
      const RVector dir = random_direction(rng, m.n);
      const RVector y = m.x + tau * std::pow(u01(rng), 1.0 / m.d) * dir;
      // Orbifold ball = union of the Euclidean balls around pi(x), counted once.
      int cover = 0;
      for (const auto& img : m.images) cover += (y - img).norm() < tau ? 1 : 0;
      const double sg = gap_min(y, m.n) + 1.0;
      const double v = 1.0 / (sg * sg * std::max(cover, 1));
      s.add(v);
      ss.add(v * v);
      (sg < 2.0 ? s1 : s2).add(v);
    }
    const double count = static_cast<double>(options.samples);
    const double vol = vol_unit * std::pow(tau, m.d);
    const RegionValue r = finish(s, ss, count);
    out[k] = {tau, vol * r.value, vol * s1.sum / count, vol * s2.sum / count, vol * r.ci_halfwidth};
  });
  return out;
}

FitResult fit_volume_exponent(std::span<const VolumeSample> profile, bool use_v2) {
  std::vector<DecayRecord> recs;
  for (const auto& p : profile) {
    DecayRecord r;
    r.scale = p.tau;
    r.deviation = use_v2 ? p.V2 : p.V;
    r.chart = "flat";
    recs.push_back(r);
  }
  return fit_power_law(recs);
}

Configuration potential_probe(int n, double rho_value, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "probe needs n >= 2");
  std::mt19937_64 rng(seed);
  const RVector dir = random_direction(rng, n);
  // rho = sqrt(n) |x| for centered configurations.
  return from_real(dir * (rho_value / std::sqrt(static_cast<double>(n))));
}

}  // namespace hkq
