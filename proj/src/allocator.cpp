#include "wsnalloc/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "wsnalloc/error.hpp"
#include "wsnalloc/estimator.hpp"
#include "wsnalloc/numeric.hpp"

namespace wsnalloc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Root of x / (1 - x)^3 = c kept as the pair (x, u = 1 - x); whichever of
// the two is small is the one computed directly.
struct CubicRoot {
    double x;
    double u;
};

CubicRoot bisect_cubic(double c) {
    if (c <= 1.0) {
        // x - c (1 - x)^3 is increasing, negative at 0, nonnegative at c.
        double lo = 0.0;
        double hi = c;
        for (int it = 0; it < 400 && hi - lo > 2.0 * kEps * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double w = 1.0 - mid;
            if (mid - c * w * w * w < 0.0) lo = mid; else hi = mid;
        }
        const double x = 0.5 * (lo + hi);
        return {x, 1.0 - x};
    }
    // c u^3 + u - 1 is increasing, negative at 0, nonnegative at cbrt(1/c).
    double lo = 0.0;
    double hi = std::min(1.0, std::cbrt(1.0 / c));
    for (int it = 0; it < 400 && hi - lo > 2.0 * kEps * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (c * mid * mid * mid + mid - 1.0 < 0.0) lo = mid; else hi = mid;
    }
    const double u = 0.5 * (lo + hi);
    return {1.0 - u, u};
}

double residual_from_pair(double x, double u, double c) {
    // x / (c u^3) - 1
    return x / (c * u * u * u) - 1.0;
}

struct ClosedForm {
    double x;
    double u;
    // x was formed as 1 - u (u small); otherwise from u^3 / (2p)
    bool from_u;
};

// Closed form for the root of u^3 + 2 p u - 2 p = 0, p = beta delta^2 / lambda0,
// with b = beta (1 - u):
//     u = cbrt(p T) (1 - 2/3 cbrt(p / T^2)),  T = 1 + sqrt(1 + 8 p / 27).
// Evaluated as s1 - s2 with s1 = cbrt(p T), s2 = cbrt(p (T - 2)), rewritten as
// (s1^3 - s2^3) / (s1^2 + s1 s2 + s2^2) = 2p / (...) so nothing cancels. When
// u is near 1, x = 1 - u comes from the identity u^3 = 2 p x instead.
ClosedForm closed_form(double beta, double delta, double lambda0) {
    const double p = beta * delta * delta / lambda0;
    if (p > 1e150) {
        // x = (1 - x)^3 / (2p) and x < eps here
        const double x = 0.5 / p;
        return {x, 1.0 - x, false};
    }
    const double q = 8.0 * p / 27.0;
    const double r = std::sqrt(1.0 + q);
    const double s1 = std::cbrt(p * (1.0 + r));
    const double s2 = std::cbrt(p * (q / (1.0 + r)));
    const double u = 2.0 * p / (s1 * s1 + s1 * s2 + s2 * s2);
    if (u <= 0.5) return {1.0 - u, u, true};
    return {u * u * u / (2.0 * p), u, false};
}

void check_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(name) + " must be positive and finite, got " + std::to_string(v));
    }
}

double sum_b(std::span<const ActiveSensor> active, double lambda0, const SolverConfig& cfg) {
    CompensatedSum s;
    for (const auto& a : active) s += b_given_lambda(a.beta, a.delta, lambda0, cfg).b;
    return s.value();
}

}  // namespace

void SolverConfig::validate() const {
    if (!(lambda_tol > 0.0) || !(residual_tol > 0.0) || max_bracket_doublings <= 0) {
        throw Error(ErrorCode::InvalidArgument, "solver tolerances must be positive");
    }
}

double stationarity_residual(double beta, double delta, double b, double lambda0) {
    const double x = b / beta;
    const double u = (beta - b) / beta;
    const double c = lambda0 / (2.0 * beta * delta * delta);
    return residual_from_pair(x, u, c);
}

BRoot b_given_lambda(double beta, double delta, double lambda0, const SolverConfig& cfg) {
    check_positive(beta, "beta");
    check_positive(delta, "delta");
    check_positive(lambda0, "lambda0");

    const auto cf = closed_form(beta, delta, lambda0);
    // [.]^+ ; only reachable through underflow of x
    if (!(cf.x > 0.0)) return {0.0, true, false};

    // Check the pair against the cubic through the half not used to form it.
    const double c = lambda0 / (2.0 * beta * delta * delta);
    const double check = cf.from_u ? residual_from_pair(cf.x, cf.u, c)
                                   : residual_from_pair(cf.x, 1.0 - cf.x, c);
    if (std::abs(check) <= cfg.residual_tol) return {beta * cf.x, false, false};

    const auto root = bisect_cubic(c);
    return {beta * root.x, false, true};
}

double lambda_residual(std::span<const ActiveSensor> active, double lambda0, double rhs) {
    check_positive(lambda0, "lambda0");
    CompensatedSum lhs;
    for (const auto& a : active) lhs += a.beta * closed_form(a.beta, a.delta, lambda0).u;
    return lhs.value() - rhs;
}

double solve_lambda0(std::span<const ActiveSensor> active, double target_sum_b,
                     const SolverConfig& cfg) {
    cfg.validate();
    if (active.empty()) throw Error(ErrorCode::InvalidArgument, "empty active set");
    check_positive(target_sum_b, "target sum of b");
    CompensatedSum beta_sum;
    for (const auto& a : active) beta_sum += a.beta;
    if (target_sum_b >= beta_sum.value() * (1.0 - kFeasibilityMargin)) {
        throw Error(ErrorCode::Infeasible, "target sum " + std::to_string(target_sum_b) +
                                               " is not below sum(beta) " +
                                               std::to_string(beta_sum.value()));
    }

    double lo = 1.0;
    double hi = 1.0;
    double s_lo = sum_b(active, lo, cfg);
    double s_hi = s_lo;
    int doublings = 0;
    auto bracket_failure = [&] {
        throw Error(ErrorCode::BracketFailure,
                    "lambda0 bracket not found after " + std::to_string(doublings) + " doublings");
    };
    if (s_lo < target_sum_b) {
        while (s_hi < target_sum_b) {
            if (++doublings > cfg.max_bracket_doublings) bracket_failure();
            lo = hi;
            s_lo = s_hi;
            hi *= 2.0;
            s_hi = sum_b(active, hi, cfg);
        }
    } else {
        while (s_lo >= target_sum_b) {
            if (++doublings > cfg.max_bracket_doublings) bracket_failure();
            hi = lo;
            s_hi = s_lo;
            lo *= 0.5;
            s_lo = sum_b(active, lo, cfg);
        }
    }

    for (int it = 0; it < 400 && hi / lo - 1.0 > cfg.lambda_tol; ++it) {
        const double mid = std::sqrt(lo) * std::sqrt(hi);
        if (mid <= lo || mid >= hi) break;
        const double s_mid = sum_b(active, mid, cfg);
        if (s_mid < s_lo || s_mid > s_hi) {
            throw Error(ErrorCode::NonMonotoneCoupling,
                        "sum of b is not monotone in lambda0 near " + std::to_string(mid));
        }
        if (s_mid < target_sum_b) {
            lo = mid;
            s_lo = s_mid;
        } else {
            hi = mid;
            s_hi = s_mid;
        }
    }
    return std::sqrt(lo) * std::sqrt(hi);
}

AllocationResult waterfill(const NetworkRealization& net, const SolverConfig& cfg) {
    net.validate();
    cfg.validate();
    const auto views = derive_views(net);
    const std::size_t k = views.size();
    const double target = net.sigma_theta2 / net.d0_target;

    std::vector<std::size_t> order;
    CompensatedSum beta_sum;
    for (std::size_t i = 0; i < k; ++i) {
        if (views[i].degenerate) continue;
        order.push_back(i);
        beta_sum += views[i].beta;
    }
    const double min_variance = order.empty() ? std::numeric_limits<double>::infinity()
                                              : net.sigma_theta2 / beta_sum.value();
    if (order.empty() || target >= beta_sum.value() * (1.0 - kFeasibilityMargin)) {
        throw InfeasibleError(min_variance,
                              "variance target " + std::to_string(net.d0_target) +
                                  " is below the minimum achievable variance sigma_theta2/sum(beta) = " +
                                  std::to_string(min_variance));
    }

    // The clamped root depends on the sensor only through beta * delta^2, so
    // sorting on it makes the active set a prefix.
    std::vector<ActiveSensor> sorted;
    std::vector<double> key(k, 0.0);
    for (std::size_t i : order) {
        const double d = delta(views[i].beta, views[i].gamma);
        key[i] = views[i].beta * d * d;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    for (std::size_t i : order) sorted.push_back({views[i].beta, delta(views[i].beta, views[i].gamma)});

    AllocationResult res;
    res.b.assign(k, 0.0);
    bool accepted = false;
    for (std::size_t k1 = sorted.size(); k1 >= 1 && !accepted; --k1) {
        const std::span<const ActiveSensor> prefix(sorted.data(), k1);
        const double lambda0 = solve_lambda0(prefix, target, cfg);
        std::vector<BRoot> roots;
        roots.reserve(k1);
        bool all_positive = true;
        for (const auto& s : prefix) {
            roots.push_back(b_given_lambda(s.beta, s.delta, lambda0, cfg));
            if (!(roots.back().b > 0.0)) {
                all_positive = false;
                break;
            }
        }
        if (!all_positive) continue;
        for (std::size_t j = 0; j < k1; ++j) {
            res.b[order[j]] = roots[j].b;
            if (roots[j].fallback) ++res.fallback_count;
        }
        res.lambda0 = lambda0;
        res.k1 = k1;
        accepted = true;
    }
    if (!accepted) {
        throw Error(ErrorCode::BracketFailure, "no active set with all-positive allocations");
    }

    res.a2 = gains_from_b(views, res.b);
    res.power = powers_from_gains(views, res.a2);
    res.cost_j = cost_j(res.power);
    res.variance = blue_variance_from_gains(views, net.sigma_theta2, res.a2);
    return res;
}

std::vector<double> gains_from_b(std::span<const SensorView> views, std::span<const double> b) {
    if (b.size() != views.size()) {
        throw Error(ErrorCode::DimensionMismatch, "b has length " + std::to_string(b.size()) +
                                                      ", expected " +
                                                      std::to_string(views.size()));
    }
    std::vector<double> a2(b.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] == 0.0) continue;
        const auto& v = views[i];
        if (!(b[i] > 0.0) || !(b[i] < v.beta) || v.degenerate) {
            throw Error(ErrorCode::BOutOfRange, "b[" + std::to_string(i) + "] = " +
                                                    std::to_string(b[i]) + " outside [0, " +
                                                    std::to_string(v.beta) + ")");
        }
        a2[i] = b[i] / (v.gamma * v.sigma_o2 * (v.beta - b[i]));
    }
    return a2;
}

std::vector<double> gains_from_b(const NetworkRealization& net, std::span<const double> b) {
    return gains_from_b(derive_views(net), b);
}

std::vector<double> b_from_gains(std::span<const SensorView> views, std::span<const double> a2) {
    std::vector<double> b(a2.size(), 0.0);
    for (std::size_t i = 0; i < a2.size(); ++i) {
        const auto& v = views[i];
        if (v.degenerate || a2[i] == 0.0) continue;
        const double snr = v.gamma * a2[i] * v.sigma_o2;
        b[i] = v.beta * snr / (1.0 + snr);
    }
    return b;
}

std::vector<double> powers_from_gains(std::span<const SensorView> views,
                                      std::span<const double> a2) {
    if (a2.size() != views.size()) {
        throw Error(ErrorCode::DimensionMismatch, "gain vector has length " +
                                                      std::to_string(a2.size()) + ", expected " +
                                                      std::to_string(views.size()));
    }
    std::vector<double> p(a2.size());
    for (std::size_t i = 0; i < a2.size(); ++i) {
        p[i] = a2[i] * views[i].sigma_o2 * (1.0 + views[i].beta);
    }
    return p;
}

std::vector<double> powers_from_gains(const NetworkRealization& net, std::span<const double> a2) {
    return powers_from_gains(derive_views(net), a2);
}

double cost_j(std::span<const double> power) {
    CompensatedSum s;
    for (double p : power) s += p * p;
    return std::sqrt(s.value());
}

// ---------------------------------------------------------------------------
// Oracle

namespace {

struct OracleProblem {
    std::vector<double> beta;
    std::vector<double> coef;   // (1 + beta) / gamma
    std::vector<double> upper;  // strict interior bound below beta
    double target = 0.0;

    double objective(std::span<const double> b) const {
        CompensatedSum s;
        for (std::size_t i = 0; i < b.size(); ++i) {
            const double r = coef[i] * b[i] / (beta[i] - b[i]);
            s += r * r;
        }
        return s.value();
    }

    void gradient(std::span<const double> b, std::span<double> g) const {
        for (std::size_t i = 0; i < b.size(); ++i) {
            const double d = beta[i] - b[i];
            g[i] = 2.0 * coef[i] * coef[i] * b[i] * beta[i] / (d * d * d);
        }
    }

    // Euclidean projection onto {sum b = target, 0 <= b <= upper}. The map
    // tau -> sum clip(v - tau, 0, upper) is piecewise linear and
    // nonincreasing, so the crossing is found exactly between breakpoints.
    void project(std::span<const double> v, std::span<double> out) const {
        const std::size_t n = v.size();
        std::vector<double> knots;
        knots.reserve(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            knots.push_back(v[i] - upper[i]);
            knots.push_back(v[i]);
        }
        std::sort(knots.begin(), knots.end());
        auto mass = [&](double tau) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += std::clamp(v[i] - tau, 0.0, upper[i]);
            return s;
        };
        // mass(knots.front()) = sum(upper) > target, mass(knots.back()) = 0.
        std::size_t hi = knots.size() - 1;
        std::size_t lo = 0;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (mass(knots[mid]) > target) lo = mid; else hi = mid;
        }
        const double m_lo = mass(knots[lo]);
        const double m_hi = mass(knots[hi]);
        double tau = knots[lo];
        if (m_lo != m_hi) tau = knots[lo] + (m_lo - target) * (knots[hi] - knots[lo]) / (m_lo - m_hi);
        for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp(v[i] - tau, 0.0, upper[i]);
    }
};

std::vector<double> spectral_projected_gradient(const OracleProblem& prob, std::vector<double> x,
                                                const OracleConfig& cfg) {
    const std::size_t n = x.size();
    std::vector<double> g(n), g_new(n), trial(n), d(n), x_new(n);
    prob.project(std::vector<double>(x), x);
    prob.gradient(x, g);
    double f = prob.objective(x);
    double alpha = 1.0;
    {
        double gmax = 0.0;
        for (double gi : g) gmax = std::max(gmax, std::abs(gi));
        if (gmax > 0.0) alpha = prob.target / gmax;
    }
    const double scale = std::max(prob.target, 1e-300);
    for (int it = 0; it < cfg.max_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] - alpha * g[i];
        prob.project(trial, d);
        double dmax = 0.0;
        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d[i] -= x[i];
            dmax = std::max(dmax, std::abs(d[i]));
            slope += g[i] * d[i];
        }
        if (dmax <= cfg.step_tol * scale || slope >= 0.0) break;
        double step = 1.0;
        double f_new = 0.0;
        for (int ls = 0; ls < 80; ++ls) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * d[i];
            f_new = prob.objective(x_new);
            if (f_new <= f + 1e-4 * step * slope) break;
            step *= 0.5;
        }
        if (!(f_new <= f)) break;
        prob.gradient(x_new, g_new);
        double ss = 0.0;
        double sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = x_new[i] - x[i];
            const double y = g_new[i] - g[i];
            ss += s * s;
            sy += s * y;
        }
        alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-30, 1e30) : alpha * 10.0;
        x.swap(x_new);
        g.swap(g_new);
        f = f_new;
    }
    return x;
}

// Maximal-violating-pair descent: move mass from the coordinate with the
// largest gradient to the one with the smallest, with an exact line search.
// Unaffected by how badly the coefficients are scaled, which is where the
// gradient iteration above stalls.
void pairwise_polish(const OracleProblem& prob, std::vector<double>& x, const OracleConfig& cfg) {
    const std::size_t n = x.size();
    if (n < 2) return;
    auto grad1 = [&](std::size_t i, double b) {
        const double d = prob.beta[i] - b;
        return 2.0 * prob.coef[i] * prob.coef[i] * b * prob.beta[i] / (d * d * d);
    };
    for (int it = 0; it < cfg.max_iterations; ++it) {
        std::size_t hi = n, lo = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] > 0.0 && (hi == n || grad1(i, x[i]) > grad1(hi, x[hi]))) hi = i;
            if (x[i] < prob.upper[i] && (lo == n || grad1(i, x[i]) < grad1(lo, x[lo]))) lo = i;
        }
        if (hi == n || lo == n || hi == lo) break;
        const double g_hi = grad1(hi, x[hi]);
        const double g_lo = grad1(lo, x[lo]);
        if (g_hi - g_lo <= 1e-13 * g_hi) break;
        double a = 0.0;
        double c = std::min(x[hi], prob.upper[lo] - x[lo]);
        for (int k = 0; k < 200; ++k) {
            const double t = 0.5 * (a + c);
            if (t == a || t == c) break;
            (grad1(hi, x[hi] - t) > grad1(lo, x[lo] + t) ? a : c) = t;
        }
        const double t = 0.5 * (a + c);
        if (!(t > 0.0)) break;
        x[hi] = std::max(0.0, x[hi] - t);
        x[lo] += t;
    }
}

}  // namespace

AllocationResult brute_force_oracle(const NetworkRealization& net, const OracleConfig& cfg) {
    net.validate();
    if (net.size() > 6) {
        throw Error(ErrorCode::InvalidArgument, "brute-force oracle supports at most 6 sensors");
    }
    const auto views = derive_views(net);
    const double target = net.sigma_theta2 / net.d0_target;

    OracleProblem prob;
    prob.target = target;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < views.size(); ++i) {
        if (views[i].degenerate) continue;
        idx.push_back(i);
        prob.beta.push_back(views[i].beta);
        prob.coef.push_back((1.0 + views[i].beta) / views[i].gamma);
        prob.upper.push_back(views[i].beta * (1.0 - 1e-12));
    }
    const double beta_sum = std::accumulate(prob.beta.begin(), prob.beta.end(), 0.0);
    const double min_variance =
        idx.empty() ? std::numeric_limits<double>::infinity() : net.sigma_theta2 / beta_sum;
    if (idx.empty() || target >= beta_sum * (1.0 - kFeasibilityMargin)) {
        throw InfeasibleError(min_variance, "variance target below minimum achievable variance " +
                                                std::to_string(min_variance));
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    std::vector<double> best;
    double best_f = std::numeric_limits<double>::infinity();
    for (int s = 0; s < std::max(1, cfg.starts); ++s) {
        // Random point on the constraint plane, pulled toward the proportional
        // split until it sits well inside the box. Starting near b = beta
        // leaves the descent stuck on the steep wall.
        const double frac = target / beta_sum;
        std::vector<double> x0(idx.size());
        double w_sum = 0.0;
        for (std::size_t j = 0; j < x0.size(); ++j) w_sum += (x0[j] = unit(rng) * prob.beta[j]);
        for (auto& w : x0) w *= target / w_sum;
        for (double theta = 1.0;; theta *= 0.5) {
            bool inside = true;
            std::vector<double> mix(x0.size());
            for (std::size_t j = 0; j < x0.size(); ++j) {
                mix[j] = theta * x0[j] + (1.0 - theta) * frac * prob.beta[j];
                inside = inside && mix[j] <= 0.5 * (1.0 + frac) * prob.beta[j];
            }
            if (inside || theta < 1e-3) {
                x0 = std::move(mix);
                break;
            }
        }
        auto x = spectral_projected_gradient(prob, std::move(x0), cfg);
        pairwise_polish(prob, x, cfg);
        const double f = prob.objective(x);
        if (f < best_f) {
            best_f = f;
            best = std::move(x);
        }
    }

    AllocationResult res;
    res.b.assign(views.size(), 0.0);
    std::vector<double> grad(best.size());
    prob.gradient(best, grad);
    CompensatedSum lam;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        res.b[idx[j]] = best[j];
        if (best[j] > 0.0) {
            ++res.k1;
            lam += grad[j];
        }
    }
    res.lambda0 = res.k1 ? lam.value() / static_cast<double>(res.k1) : 0.0;
    res.a2 = gains_from_b(views, res.b);
    res.power = powers_from_gains(views, res.a2);
    res.cost_j = cost_j(res.power);
    res.variance = blue_variance_from_gains(views, net.sigma_theta2, res.a2);
    return res;
}

}  // namespace wsnalloc
