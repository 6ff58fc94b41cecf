#include "hjlab/counterexample.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hjlab/format.hpp"

namespace hjlab {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
using Gauss = boost::math::quadrature::gauss<double, 15>;

constexpr std::size_t kMaxPanels = 4000;

double e_fun(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

struct Piece {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

// Globally adaptive bisection over Gauss-Kronrod panels: the panel with the
// largest error estimate is split until the summed estimate drops below
// rel_tol |I| or a small multiple of the round-off level of the sum of |f|.
// Panels deeper than max_depth are left as they are.
template <class F>
Piece integrate_adaptive(F&& fn, double a, double b, double rel_tol, unsigned max_depth) {
  struct Panel {
    double a, b, value, error, l1;
    unsigned depth;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  // One 15/31-point Gauss-Kronrod panel from the library's nodes and weights;
  // the error estimate is |K - G| scaled to the panel.
  auto make = [&](double lo, double hi, unsigned depth) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    const auto& x = Kronrod::abscissa();
    const auto& wk = Kronrod::weights();
    const auto& wg = Gauss::weights();
    double f0 = fn(c);
    double kron = f0 * wk[0], gauss = f0 * wg[0], l1 = std::abs(f0) * wk[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
      const double fp = fn(c + h * x[i]), fm = fn(c - h * x[i]);
      kron += (fp + fm) * wk[i];
      l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
      if (i % 2 == 0) gauss += (fp + fm) * wg[i / 2];
    }
    return Panel{lo, hi, h * kron, h * std::abs(kron - gauss), h * l1, depth};
  };
  Piece total;
  if (!(b > a)) return total;
  std::priority_queue<Panel> open;
  std::vector<Panel> closed;
  open.push(make(a, b, 0));
  auto sums = [&] {
    Piece s;
    auto add = [&](const Panel& p) {
      s.value += p.value;
      s.error += p.error;
      s.l1 += p.l1;
    };
    for (const auto& p : closed) add(p);
    auto copy = open;
    while (!copy.empty()) {
      add(copy.top());
      copy.pop();
    }
    return s;
  };
  total = sums();
  const double floor_factor = 64.0 * std::numeric_limits<double>::epsilon();
  std::size_t panels = 1;
  while (!open.empty() && panels < kMaxPanels &&
         total.error > std::max(rel_tol * std::abs(total.value), floor_factor * total.l1)) {
    const Panel p = open.top();
    open.pop();
    if (p.depth >= max_depth) {
      closed.push_back(p);
    } else {
      const double mid = 0.5 * (p.a + p.b);
      const Panel left = make(p.a, mid, p.depth + 1), right = make(mid, p.b, p.depth + 1);
      total.value += left.value + right.value - p.value;
      total.error += left.error + right.error - p.error;
      total.l1 += left.l1 + right.l1 - p.l1;
      open.push(left);
      open.push(right);
      ++panels;
    }
  }
  return sums();
}

// Additionally cuts [a, b] into panels of ratio at most 2 so integrands like
// s^-a stay well scaled.
template <class F>
Piece integrate_geometric(F&& fn, double a, double b, double rel_tol, unsigned depth) {
  Piece total;
  double lo = a;
  while (lo < b) {
    const double hi = std::min(b, 2.0 * lo);
    const Piece p = integrate_adaptive(fn, lo, hi, rel_tol, depth);
    total.value += p.value;
    total.error += p.error;
    total.l1 += p.l1;
    lo = hi;
  }
  return total;
}

double achieved_of(const Piece& p) {
  const double scale = std::max(std::abs(p.value), 64.0 * std::numeric_limits<double>::epsilon() * p.l1);
  return scale > 0.0 ? p.error / scale : 0.0;
}

void check_piece(const Piece& p, double rel_tol, const char* what) {
  const double achieved = p.l1 > 0.0 ? p.error / std::max(std::abs(p.value), 1e-300) : 0.0;
  if (!(p.error <= std::max(rel_tol * std::abs(p.value), 64.0 * std::numeric_limits<double>::epsilon() * p.l1)) ||
      !std::isfinite(p.value)) {
    throw PrecisionError(std::string("quadrature of ") + what + " missed its tolerance", achieved);
  }
}

}  // namespace

double CutoffProfile::psi(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = e_fun(s), b = e_fun(1.0 - s);
  return a / (a + b);
}

double CutoffProfile::psi_prime(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double a = e_fun(s), b = e_fun(1.0 - s);
  const double da = a / (s * s), db = b / ((1.0 - s) * (1.0 - s));
  const double den = a + b;
  return (da * b + a * db) / (den * den);
}

double CutoffProfile::chi(double t) const {
  if (kind_ == Kind::sharp) return t >= 1.0 ? 1.0 : 0.0;
  if (t <= 1.0) return 0.0;
  if (t >= 2.0) return 1.0;
  return psi(t - 1.0);
}

double CutoffProfile::chi_prime(double t) const {
  if (kind_ == Kind::sharp) throw DomainError("the sharp cutoff has no derivative");
  if (t <= 1.0 || t >= 2.0) return 0.0;
  return psi_prime(t - 1.0);
}

double c_constant(double gamma, int d) {
  const double bound = static_cast<double>(d) / (d - 1);
  if (d < 2 || !(gamma > bound)) {
    throw DomainError("the radial example is meaningful only if gamma > d/(d-1) = " + format_double(bound) +
                      ", got gamma = " + format_double(gamma));
  }
  const double a = 1.0 / (gamma - 1.0);
  return -std::pow(d - 1.0 - a, a);
}

double critical_q(double gamma, int d) {
  if (!(gamma > 1.0)) throw DomainError("gamma must exceed 1");
  return d * (gamma - 1.0) / gamma;
}

double sphere_area(int d) {
  switch (d) {
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    case 4: return 2.0 * std::numbers::pi * std::numbers::pi;
    default: throw DomainError("radial profiles support d in {2, 3, 4}, got " + std::to_string(d));
  }
}

RadialProfile make_profile(double gamma, int d, double eps, CutoffProfile::Kind kind) {
  sphere_area(d);
  if (!(eps > 0.0 && eps <= 0.25)) throw DomainError("eps must lie in (0, 1/4], got " + format_double(eps));
  return RadialProfile{gamma, d, eps, c_constant(gamma, d), CutoffProfile(kind)};
}

ProfileValues profile_eval(const RadialProfile& prof, double r) {
  if (!(r > 0.0 && r <= 0.5)) throw DomainError("profile radius must lie in (0, 1/2], got " + format_double(r));
  const double a = 1.0 / (prof.gamma - 1.0);
  const double t = r / prof.eps;
  const double chi = prof.cutoff.chi(t);
  const double pw = std::pow(r, -a);

  ProfileValues out{};
  out.v1 = -prof.c * pw * chi;
  if (prof.cutoff.kind() == CutoffProfile::Kind::smooth) {
    const double dchi = prof.cutoff.chi_prime(t);
    out.v2 = prof.c * a * pw / r * chi - prof.c / prof.eps * pw * dchi;
    out.f = prof.c / prof.eps * pw * dchi +
            std::pow(std::abs(prof.c), prof.gamma) * (std::pow(chi, prof.gamma) - chi) * std::pow(r, -prof.gamma * a);
  } else {
    out.v2 = prof.c * a * pw / r * chi;
    out.f = std::numeric_limits<double>::quiet_NaN();
  }

  const double tol = 1e-11;
  auto integrand = [&](double s) { return std::pow(s, -a) * prof.cutoff.chi(s / prof.eps); };
  const double lo = std::max(r, prof.eps);
  const double mid = std::clamp(2.0 * prof.eps, lo, 0.5);
  const Piece shell = integrate_adaptive(integrand, lo, mid, tol, 30);
  const Piece outer = integrate_geometric(integrand, mid, 0.5, tol, 30);
  check_piece(shell, tol, "v on the cutoff shell");
  check_piece(outer, tol, "v");
  out.v = prof.c * (shell.value + outer.value);
  return out;
}

double radial_residual(const RadialProfile& prof, std::span<const double> r_samples) {
  double worst = 0.0;
  for (double r : r_samples) {
    if (!(r > 0.0 && r < 0.5)) throw DomainError("residual samples must lie in (0, 1/2)");
    const ProfileValues pv = profile_eval(prof, r);
    const double t_lap = pv.v2;
    const double t_first = (prof.d - 1) * pv.v1 / r;
    const double t_pow = std::pow(std::abs(pv.v1), prof.gamma);
    const double res = -(t_lap + t_first) + t_pow - pv.f;
    const double scale = std::max({std::abs(t_lap), std::abs(t_first), t_pow, std::abs(pv.f)});
    worst = std::max(worst, std::abs(res) / (1.0 + scale));
  }
  return worst;
}

BallNorms ball_norms(const RadialProfile& prof, double q, const QuadratureOptions& opts) {
  if (!(q >= 1.0) || !std::isfinite(q)) throw DomainError("q must be >= 1, got " + format_double(q));
  const double a = 1.0 / (prof.gamma - 1.0);
  const double sigma = sphere_area(prof.d);
  const double abs_c = std::abs(prof.c);
  const double eps = prof.eps;

  // |Dv|^(gamma q) r^(d-1) = |c|^(gamma q) chi^(gamma q) r^(-a gamma q + d - 1)
  const double gq = prof.gamma * q;
  auto grad_integrand = [&](double r) {
    const double chi = prof.cutoff.chi(r / eps);
    return chi > 0.0 ? std::pow(abs_c * chi, gq) * std::pow(r, -a * gq + prof.d - 1.0) : 0.0;
  };
  Piece g_shell, g_outer;
  if (prof.cutoff.kind() == CutoffProfile::Kind::smooth) {
    g_shell = integrate_adaptive(grad_integrand, eps, 2.0 * eps, opts.rel_tol, opts.max_depth);
    g_outer = integrate_geometric(grad_integrand, 2.0 * eps, 0.5, opts.rel_tol, opts.max_depth);
  } else {
    g_outer = integrate_geometric(grad_integrand, eps, 0.5, opts.rel_tol, opts.max_depth);
  }
  check_piece(g_shell, opts.rel_tol, "|Dv|^gamma");
  check_piece(g_outer, opts.rel_tol, "|Dv|^gamma");

  BallNorms out{};
  out.norm_grad_pow = std::pow(sigma * (g_shell.value + g_outer.value), 1.0 / q);
  out.achieved_tol = std::max(achieved_of(g_shell), achieved_of(g_outer));

  if (prof.cutoff.kind() == CutoffProfile::Kind::sharp) {
    out.norm_f = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  // f vanishes outside (eps, 2 eps).
  auto f_integrand = [&](double r) {
    const double t = r / eps;
    const double chi = prof.cutoff.chi(t);
    const double f = prof.c / eps * std::pow(r, -a) * prof.cutoff.chi_prime(t) +
                     std::pow(abs_c, prof.gamma) * (std::pow(chi, prof.gamma) - chi) * std::pow(r, -prof.gamma * a);
    return std::pow(std::abs(f), q) * std::pow(r, prof.d - 1.0);
  };
  const Piece f_shell = integrate_adaptive(f_integrand, eps, 2.0 * eps, opts.rel_tol, opts.max_depth);
  check_piece(f_shell, opts.rel_tol, "f");
  out.norm_f = std::pow(sigma * f_shell.value, 1.0 / q);
  out.achieved_tol = std::max(out.achieved_tol, achieved_of(f_shell));
  return out;
}

NormTable norm_table(double gamma, int d, double q, std::span<const double> eps_list,
                     const QuadratureOptions& opts, unsigned threads) {
  std::vector<double> eps(eps_list.begin(), eps_list.end());
  std::sort(eps.begin(), eps.end(), std::greater<>());
  std::vector<RadialProfile> profiles;
  for (double e : eps) profiles.push_back(make_profile(gamma, d, e));

  NormTable table;
  table.rows.resize(eps.size());
  std::vector<std::exception_ptr> errors(eps.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < eps.size(); i = next++) {
      try {
        const BallNorms bn = ball_norms(profiles[i], q, opts);
        table.rows[i] = NormRow{eps[i], q, bn.norm_f, bn.norm_grad_pow, opts.rel_tol};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(eps.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return table;
}

DivergenceFit divergence_fit(const NormTable& table) {
  std::vector<double> eps;
  for (const auto& row : table.rows) eps.push_back(row.eps);
  std::sort(eps.begin(), eps.end());
  if (std::unique(eps.begin(), eps.end()) - eps.begin() < 4) {
    throw DomainError("divergence fit needs at least 4 distinct eps");
  }
  const double q = table.rows.front().q;
  for (const auto& row : table.rows) {
    if (row.q != q) throw DomainError("divergence fit needs a table at a single q");
  }

  const std::size_t n = table.rows.size();
  std::vector<double> x(n), y(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(1.0 / table.rows[i].eps);
    y[i] = std::pow(table.rows[i].norm_grad_pow, q);
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  DivergenceFit fit{};
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::abs(y[i] - (fit.slope * x[i] + fit.intercept)) / std::abs(y[i]);
    fit.max_relative_residual = std::max(fit.max_relative_residual, r);
  }
  return fit;
}

std::string norm_table_csv(const NormTable& table, const DivergenceFit* fit, double radial_residual_max) {
  std::ostringstream os;
  os << "eps,q,norm_f,norm_grad_pow,quad_tol\n";
  for (const auto& row : table.rows) {
    os << format_double(row.eps) << ',' << format_double(row.q) << ',' << format_double(row.norm_f) << ','
       << format_double(row.norm_grad_pow) << ',' << format_double(row.quad_tol) << '\n';
  }
  if (fit) {
    os << "# slope=" << format_double(fit->slope) << '\n'
       << "# intercept=" << format_double(fit->intercept) << '\n'
       << "# fit_residual=" << format_double(fit->max_relative_residual) << '\n';
  }
  os << "# radial_residual_max=" << format_double(radial_residual_max) << '\n';
  return os.str();
}

}  // namespace hjlab
