#pragma once

// Clouds of normed increments (ξ(y + ux) − ξ(y)) / (√(2h) u^H) for the local
// and global laws of the iterated logarithm and the Lévy modulus, together
// with the statistics used to monitor them at finite scale.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfbm/error.hpp"
#include "mfbm/field.hpp"
#include "mfbm/kernel.hpp"
#include "mfbm/rkhs.hpp"

namespace mfbm {

enum class Example { local_lil, global_lil, levy };

inline std::string to_string(Example e) {
  switch (e) {
    case Example::local_lil:
      return "local_lil";
    case Example::global_lil:
      return "global_lil";
    default:
      return "levy";
  }
}

inline Example parse_example(std::string_view s) {
  if (s == "local_lil") return Example::local_lil;
  if (s == "global_lil") return Example::global_lil;
  if (s == "levy") return Example::levy;
  throw ConfigError("unknown example '" + std::string(s) + "' (expected local_lil | global_lil | levy)");
}

/// The parameter t of an example at a given scale: 1/u for local_lil and
/// levy, t itself for global_lil.
inline double example_time(Example e, double scale) { return e == Example::global_lil ? scale : 1.0 / scale; }

/// h at a scale: log log u⁻¹, log log t, N log u⁻¹.
inline double example_h(Example e, double scale, int N) {
  switch (e) {
    case Example::local_lil:
      if (!(scale > 0.0 && scale < std::exp(-1.0))) {
        throw DomainError("local_lil: scale must lie in (0, 1/e), got " + std::to_string(scale));
      }
      return std::log(std::log(1.0 / scale));
    case Example::global_lil:
      if (!(scale > std::exp(1.0))) throw DomainError("global_lil: scale must exceed e, got " + std::to_string(scale));
      return std::log(std::log(scale));
    default:
      if (!(scale > 0.0 && scale < 1.0)) throw DomainError("levy: scale must lie in (0,1), got " + std::to_string(scale));
      return N * std::log(1.0 / scale);
  }
}

struct CloudSetup {
  Example example = Example::levy;
  ModelParams params;
  // global_lil only: the sampled unit-ball field stands for ξ(T·)/T^H.
  double horizon = 0.0;
};

struct CloudMember {
  Point y;
  double u = 0.0;
  std::vector<double> values;
};

struct IncrementCloud {
  Example example = Example::levy;
  double scale = 0.0;
  double h = 0.0;
  double denominator = 0.0;  // √(2h) u^H
  std::vector<CloudMember> members;
};

using FieldFn = std::function<double(std::span<const double>)>;

/// Labels y of the Lévy cloud at offset u: the Cartesian lattice of spacing
/// u/2 intersected with {‖y‖ ≤ 1 − u}.
inline std::vector<Point> levy_labels(double u, int N) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("levy_labels: u must lie in (0,1)");
  const double step = 0.5 * u;
  const double radius = 1.0 - u;
  const int kmax = static_cast<int>(std::floor(radius / step + 1e-9));
  std::vector<Point> out;
  std::vector<int> k(static_cast<std::size_t>(N), -kmax);
  while (true) {
    Point y(static_cast<std::size_t>(N));
    double r2 = 0.0;
    for (int d = 0; d < N; ++d) {
      y[static_cast<std::size_t>(d)] = k[static_cast<std::size_t>(d)] * step;
      r2 += y[static_cast<std::size_t>(d)] * y[static_cast<std::size_t>(d)];
    }
    if (std::sqrt(r2) <= radius + 1e-12) out.push_back(std::move(y));
    int d = 0;
    while (d < N && ++k[static_cast<std::size_t>(d)] > kmax) k[static_cast<std::size_t>(d++)] = -kmax;
    if (d == N) break;
  }
  return out;
}

/// Calls visit(y, u, values) for every member of the cloud at `scale`,
/// values being η on `eval_points` (points of the unit ball). Streaming keeps
/// large Lévy clouds out of memory. Returns the normalization record.
template <class Visitor>
IncrementCloud visit_cloud(const CloudSetup& setup, double scale, const FieldFn& field,
                           const std::vector<Point>& eval_points, Visitor&& visit) {
  setup.params.validate();
  const int N = setup.params.N;
  const double H = setup.params.H;
  IncrementCloud rec;
  rec.example = setup.example;
  rec.scale = scale;
  rec.h = example_h(setup.example, scale, N);
  rec.denominator = std::sqrt(2.0 * rec.h) * std::pow(scale, H);

  std::vector<double> values(eval_points.size());
  std::vector<double> z(static_cast<std::size_t>(N));
  auto check_cover = [&](const std::vector<double>& p) {
    if (detail::norm2(p) > 1.0 + 1e-12) {
      throw CoverageError(to_string(setup.example) + ": evaluation point outside the sampled ball at scale " +
                          std::to_string(scale));
    }
  };

  if (setup.example == Example::global_lil) {
    const double T = setup.horizon;
    if (!(T >= scale)) {
      throw CoverageError("global_lil: scale " + std::to_string(scale) + " exceeds the horizon " + std::to_string(T));
    }
    // ξ(t x) = T^H ξ̂(t x / T) in law.
    const double factor = std::pow(T, H) / rec.denominator;
    for (std::size_t i = 0; i < eval_points.size(); ++i) {
      for (int d = 0; d < N; ++d) z[static_cast<std::size_t>(d)] = eval_points[i][static_cast<std::size_t>(d)] * scale / T;
      check_cover(z);
      values[i] = factor * field(z);
    }
    visit(Point(static_cast<std::size_t>(N), 0.0), scale, std::span<const double>(values));
    return rec;
  }

  const std::vector<Point> labels =
      setup.example == Example::levy ? levy_labels(scale, N) : std::vector<Point>{Point(static_cast<std::size_t>(N), 0.0)};
  for (const Point& y : labels) {
    const double base = field(y);
    for (std::size_t i = 0; i < eval_points.size(); ++i) {
      for (int d = 0; d < N; ++d) {
        z[static_cast<std::size_t>(d)] = y[static_cast<std::size_t>(d)] + scale * eval_points[i][static_cast<std::size_t>(d)];
      }
      check_cover(z);
      values[i] = (field(z) - base) / rec.denominator;
    }
    visit(y, scale, std::span<const double>(values));
  }
  return rec;
}

/// Materialized cloud (all members kept).
inline IncrementCloud build_cloud(const CloudSetup& setup, double scale, const FieldFn& field,
                                  const std::vector<Point>& eval_points) {
  std::vector<CloudMember> members;
  IncrementCloud c = visit_cloud(setup, scale, field, eval_points,
                                 [&](const Point& y, double u, std::span<const double> v) {
                                   members.push_back({y, u, std::vector<double>(v.begin(), v.end())});
                                 });
  c.members = std::move(members);
  return c;
}

// ---------------------------------------------------------------------------
// Statistics

struct CloudStats {
  std::size_t members = 0;
  double attract_excess = 0.0;         // sup over members of (‖η‖_S − 1)₊
  double attract_supdist = 0.0;        // sup over members of ‖η − proj_K η‖_∞
  double attract_excess_median = 0.0;
  double attract_supdist_median = 0.0;
  double enter = std::numeric_limits<double>::quiet_NaN();  // inf over members of ‖η − target‖_∞
  double functional_sup = 0.0;         // sup over members of ‖η‖_∞
};

/// Streaming CloudStats over members evaluated on the projector grid.
/// Members are buffered and projected in blocks.
class CloudStatsAccumulator {
 public:
  explicit CloudStatsAccumulator(const RkhsProjector& proj, std::optional<std::vector<double>> target = std::nullopt)
      : proj_(proj), target_(std::move(target)) {
    if (target_ && target_->size() != proj_.grid().size()) {
      throw DomainError("CloudStatsAccumulator: target has the wrong number of grid values");
    }
    buffer_.resize(static_cast<Eigen::Index>(proj_.grid().size()), kBlock);
  }

  void add(std::span<const double> values) {
    if (values.size() != proj_.grid().size()) throw DomainError("CloudStatsAccumulator: member grid mismatch");
    double sup = 0.0;
    double dist = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      sup = std::max(sup, std::abs(values[i]));
      if (target_) dist = std::max(dist, std::abs(values[i] - (*target_)[i]));
    }
    stats_.functional_sup = std::max(stats_.functional_sup, sup);
    if (target_) stats_.enter = std::isnan(stats_.enter) ? dist : std::min(stats_.enter, dist);
    buffer_.col(filled_++) = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    ++stats_.members;
    if (filled_ == kBlock) flush();
  }

  CloudStats finish() {
    flush();
    CloudStats out = stats_;
    if (!excess_.empty()) {
      out.attract_excess = *std::max_element(excess_.begin(), excess_.end());
      out.attract_supdist = *std::max_element(supdist_.begin(), supdist_.end());
      out.attract_excess_median = median(excess_);
      out.attract_supdist_median = median(supdist_);
    }
    return out;
  }

 private:
  static constexpr Eigen::Index kBlock = 1024;

  static double median(std::vector<double> v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
    const double hi = v[n / 2];
    if (n % 2 == 1) return hi;
    return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2)));
  }

  void flush() {
    if (filled_ == 0) return;
    const Eigen::MatrixXd C = proj_.analysis() * buffer_.leftCols(filled_);
    const Eigen::MatrixXd S = proj_.synthesis() * C;
    for (Eigen::Index j = 0; j < filled_; ++j) {
      const double norm = std::sqrt((C.col(j).array().square() * proj_.inverse_lambdas().array()).sum());
      const double excess = std::max(0.0, norm - 1.0);
      const double supdist = norm > 1.0 ? (1.0 - 1.0 / norm) * S.col(j).cwiseAbs().maxCoeff() : 0.0;
      excess_.push_back(excess);
      supdist_.push_back(supdist);
    }
    filled_ = 0;
  }

  const RkhsProjector& proj_;
  std::optional<std::vector<double>> target_;
  Eigen::MatrixXd buffer_;
  Eigen::Index filled_ = 0;
  std::vector<double> excess_;
  std::vector<double> supdist_;
  CloudStats stats_;
};

struct AttractStat {
  double excess = 0.0;
  double supdist = 0.0;
  double excess_median = 0.0;
  double supdist_median = 0.0;
};

/// Sup (and median) over members of the two surrogates for the sup-norm
/// distance to Strassen's ball. Members must live on the projector grid.
inline AttractStat attract_stat(const IncrementCloud& cloud, const RkhsProjector& proj) {
  CloudStatsAccumulator acc(proj);
  for (const CloudMember& m : cloud.members) acc.add(m.values);
  const CloudStats s = acc.finish();
  return {s.attract_excess, s.attract_supdist, s.attract_excess_median, s.attract_supdist_median};
}

/// Grid values of an entry target, which must lie strictly inside the ball.
inline std::vector<double> target_values(const RkhsProjector& proj, const RkhsFunction& target) {
  const double n = strassen_norm(target);
  if (n >= 1.0) throw DomainError("enter_stat: target must satisfy ||f||_S < 1, got " + std::to_string(n));
  return synthesize(proj, target);
}

/// inf over members of max_grid |η − target|.
inline double enter_stat(const IncrementCloud& cloud, const RkhsProjector& proj, const RkhsFunction& target) {
  const std::vector<double> t = target_values(proj, target);
  double best = std::numeric_limits<double>::infinity();
  for (const CloudMember& m : cloud.members) {
    double d = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) d = std::max(d, std::abs(m.values[i] - t[i]));
    best = std::min(best, d);
  }
  return best;
}

inline double functional_sup(const IncrementCloud& cloud) {
  double s = 0.0;
  for (const CloudMember& m : cloud.members) {
    for (double v : m.values) s = std::max(s, std::abs(v));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Lévy modulus statistic

/// sup over lattice pairs x, x + y inside the unit ball with ‖y‖ = u of
/// |f(x + y) − f(x)| / (√(2N log u⁻¹) u^H). Only offsets that are exact
/// lattice vectors are used.
inline double modulus_statistic(const LatticeField& field, double u, const ModelParams& params) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("modulus_statistic: u must lie in (0,1)");
  const CartesianGrid& g = field.grid;
  const double h = g.spacing();
  const int kmax = static_cast<int>(std::ceil(u / h)) + 1;
  std::vector<std::pair<int, int>> offsets;
  for (int a = 0; a <= kmax; ++a) {
    for (int b = -kmax; b <= kmax; ++b) {
      if (a == 0 && b <= 0) continue;  // keep one of ±k
      if (std::abs(std::hypot(a, b) * h - u) <= 1e-9 * u) offsets.emplace_back(a, b);
    }
  }
  if (offsets.empty()) {
    throw ResolutionError("modulus_statistic: no lattice offsets of length " + std::to_string(u) +
                          " at spacing " + std::to_string(h));
  }
  const double denom = std::sqrt(2.0 * params.N * std::log(1.0 / u)) * std::pow(u, params.H);
  auto inside = [&](int i, int j) { return std::hypot(g.coord(i), g.coord(j)) <= 1.0 + 1e-12; };
  double best = 0.0;
  bool any = false;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      if (!inside(i, j)) continue;
      for (const auto& [a, b] : offsets) {
        const int i2 = i + a;
        const int j2 = j + b;
        if (i2 < 0 || i2 >= g.n || j2 < 0 || j2 >= g.n || !inside(i2, j2)) continue;
        best = std::max(best, std::abs(field.at(i2, j2) - field.at(i, j)));
        any = true;
      }
    }
  }
  if (!any) throw ResolutionError("modulus_statistic: no lattice pair inside the ball at offset " + std::to_string(u));
  return best / denom;
}

// ---------------------------------------------------------------------------
// Conditions of the limit theorem for the three examples

/// h(t) = h_log·log t + h_loglog·log log t and dF₁(t) ≍ t^α (log t)^β dt.
struct ExampleAsymptotics {
  double h_log = 0.0;
  double h_loglog = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

inline ExampleAsymptotics example_asymptotics(Example e, int N) {
  switch (e) {
    case Example::local_lil:
    case Example::global_lil:
      // dF₁ ≍ du/u = dt/t, h = log log t
      return {0.0, 1.0, -1.0, 0.0};
    default:
      // F₁ ≍ t^N, h = N log t
      return {static_cast<double>(N), 0.0, N - 1.0, 0.0};
  }
}

/// The exponent a* at which ∫ e^{−a h(t)} dF₁(t) switches from divergent to
/// convergent: ∫ t^{α − a·h_log} (log t)^{β − a·h_loglog} dt.
inline double critical_exponent(const ExampleAsymptotics& s) {
  if (s.h_log > 0.0) return (s.alpha + 1.0) / s.h_log;
  if (s.alpha == -1.0 && s.h_loglog > 0.0) return (s.beta + 1.0) / s.h_loglog;
  return std::numeric_limits<double>::quiet_NaN();
}

/// h is strictly increasing in t along the schedule.
inline bool h_increasing(Example e, const std::vector<double>& scales, int N) {
  std::vector<std::pair<double, double>> th;
  for (double s : scales) th.emplace_back(example_time(e, s), example_h(e, s, N));
  std::sort(th.begin(), th.end());
  for (std::size_t i = 1; i < th.size(); ++i) {
    if (!(th[i].second > th[i - 1].second)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Campaigns

struct CampaignRow {
  Example example = Example::levy;
  double scale = 0.0;
  double h = 0.0;
  CloudStats stats;
  double enter_running_min = std::numeric_limits<double>::quiet_NaN();
};

/// Statistics for every scale of a schedule, rows in schedule order.
inline std::vector<CampaignRow> run_campaign(const CloudSetup& setup, const std::vector<double>& schedule,
                                             const FieldFn& field, const RkhsProjector& proj,
                                             const std::optional<RkhsFunction>& target = std::nullopt) {
  std::optional<std::vector<double>> tv;
  if (target) tv = target_values(proj, *target);
  std::vector<CampaignRow> rows;
  double running = std::numeric_limits<double>::infinity();
  for (double scale : schedule) {
    CloudStatsAccumulator acc(proj, tv);
    const IncrementCloud rec = visit_cloud(setup, scale, field, proj.grid().points,
                                           [&](const Point&, double, std::span<const double> v) { acc.add(v); });
    CampaignRow row;
    row.example = setup.example;
    row.scale = scale;
    row.h = rec.h;
    row.stats = acc.finish();
    if (tv) {
      running = std::min(running, row.stats.enter);
      row.enter_running_min = running;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mfbm
