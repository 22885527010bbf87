#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "dmalab/errors.hpp"
#include "dmalab/radial.hpp"

namespace dmalab {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>;  // u, w = (u')^n

struct Shot {
    std::vector<double> r;
    std::vector<double> u;
    std::vector<double> du;
    double end_value = 0.0;
};

class Shooter {
public:
    Shooter(int n, double R, const RadialRhs& F, double floor, const RadialOptions& opt)
        : n_(n), R_(R), F_(F), floor_(floor), opt_(opt) {
        const double r_end = R * (1.0 - opt.cutoff);
        const std::size_t m = std::max<std::size_t>(opt.uniform_points, 3);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            const double r = R * static_cast<double>(i) / static_cast<double>(m - 1);
            if (r < r_end) grid_.push_back(r);
        }
        // Geometric cluster towards the sphere.
        for (double d = 0.25 * R; d > opt.cutoff * R; d /= std::pow(10.0, 0.01)) {
            grid_.push_back(R - d);
        }
        grid_.push_back(r_end);
        std::sort(grid_.begin(), grid_.end());
        grid_.erase(std::unique(grid_.begin(), grid_.end()), grid_.end());
    }

    double rhs(double r, double u) const { return F_(r, std::min(u, -floor_)); }

    Shot shoot(double c, bool record) const {
        auto system = [this](const State& s, State& ds, double r) {
            const double w = std::max(s[1], 0.0);
            ds[0] = std::pow(w, 1.0 / n_);
            ds[1] = n_ * std::pow(r, n_ - 1) * rhs(r, s[0]);
        };
        Shot shot;
        State s{c, 0.0};
        auto stepper = odeint::make_dense_output(opt_.ode_tol, opt_.ode_tol, odeint::runge_kutta_dopri5<State>());
        const double h0 = grid_[1] - grid_[0];
        odeint::integrate_times(stepper, system, s, grid_.begin(), grid_.end(), 0.25 * h0,
                                [&](const State& x, double r) {
                                    if (!record) return;
                                    shot.r.push_back(r);
                                    shot.u.push_back(x[0]);
                                    shot.du.push_back(std::pow(std::max(x[1], 0.0), 1.0 / n_));
                                });
        // Close the last gap with u' ~ d^-q, q read off from w'/w.
        const double r_end = grid_.back();
        const double d = R_ - r_end;
        const double w = std::max(s[1], 0.0);
        const double dw = n_ * std::pow(r_end, n_ - 1) * rhs(r_end, s[0]);
        const double q = w > 0.0 ? std::clamp(d * dw / (w * n_), 0.0, 0.99) : 0.0;
        const double tail = std::pow(w, 1.0 / n_) * d / (1.0 - q);
        shot.end_value = s[0] + tail;
        if (record) {
            shot.r.push_back(R_);
            shot.u.push_back(shot.end_value);
            shot.du.push_back(std::pow(w, 1.0 / n_));
        }
        return shot;
    }

    Shot solve() const {
        auto g = [this](double c) { return shoot(c, false).end_value; };
        double hi = 0.0;
        double g_hi = g(hi);
        double lo = -R_ * R_;
        double g_lo = g(lo);
        int expansions = 0;
        while (g_lo > 0.0) {
            hi = lo;
            g_hi = g_lo;
            lo *= 2.0;
            g_lo = g(lo);
            if (++expansions > 200 || !std::isfinite(g_lo)) {
                std::ostringstream os;
                os << "radial_solve: no shooting bracket in [" << lo << ", 0]";
                throw ConvergenceError(os.str(), {g_lo});
            }
        }
        if (g_hi < 0.0) {
            std::ostringstream os;
            os << "radial_solve: no shooting bracket, u(R) < 0 already at u(0) = " << hi;
            throw ConvergenceError(os.str(), {g_hi});
        }
        double c = 0.0;
        if (std::abs(g_lo) < opt_.tol) {
            c = lo;
        } else if (std::abs(g_hi) < opt_.tol) {
            c = hi;
        } else {
            const double tol = opt_.tol;
            auto stop = [&](double a, double b) {
                return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
            };
            std::uintmax_t iters = 200;
            double best = lo;
            double best_g = g_lo;
            auto tracked = [&](double x) {
                const double v = g(x);
                if (std::abs(v) < std::abs(best_g)) {
                    best = x;
                    best_g = v;
                }
                return std::abs(v) < tol ? 0.0 : v;
            };
            auto bracket = boost::math::tools::toms748_solve(tracked, lo, hi, g_lo, g_hi, stop, iters);
            c = std::abs(best_g) < tol ? best : 0.5 * (bracket.first + bracket.second);
        }
        Shot shot = shoot(c, true);
        if (!(std::abs(shot.end_value) < opt_.tol)) {
            throw ConvergenceError("radial_solve: shooting did not reach |u(R)| < tol", {shot.end_value});
        }
        shot.u.back() = 0.0;
        return shot;
    }

private:
    int n_;
    double R_;
    const RadialRhs& F_;
    double floor_;
    const RadialOptions& opt_;
    std::vector<double> grid_;
};

}  // namespace

double RadialProfile::value_at(double radius) const {
    if (r.empty()) throw ParameterError("RadialProfile: empty profile");
    const double x = std::clamp(std::abs(radius), 0.0, R);
    auto it = std::upper_bound(r.begin(), r.end(), x);
    if (it == r.end()) return u.back();
    if (it == r.begin()) return u.front();
    const std::size_t i = static_cast<std::size_t>(it - r.begin()) - 1;
    const double h = r[i + 1] - r[i];
    const double t = (x - r[i]) / h;
    if (i + 2 == r.size()) return u[i] + t * (u[i + 1] - u[i]);
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * u[i] + (t3 - 2 * t2 + t) * h * du[i] + (-2 * t3 + 3 * t2) * u[i + 1] +
           (t3 - t2) * h * du[i + 1];
}

double RadialProfile::derivative_at(double radius) const {
    if (r.empty()) throw ParameterError("RadialProfile: empty profile");
    const double x = std::clamp(std::abs(radius), 0.0, R);
    auto it = std::upper_bound(r.begin(), r.end(), x);
    if (it == r.end()) return du.back();
    if (it == r.begin()) return du.front();
    const std::size_t i = static_cast<std::size_t>(it - r.begin()) - 1;
    const double h = r[i + 1] - r[i];
    const double t = (x - r[i]) / h;
    if (i + 2 == r.size()) return (u[i + 1] - u[i]) / h;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * u[i] + (-6 * t2 + 6 * t) * u[i + 1]) / h + (3 * t2 - 4 * t + 1) * du[i] +
           (3 * t2 - 2 * t) * du[i + 1];
}

nlohmann::json RadialProfile::metadata() const {
    return {{"n", n},
            {"R", R},
            {"points", r.size()},
            {"tolerance", tolerance},
            {"center_value", center_value},
            {"floors", floors},
            {"center_by_floor", center_by_floor}};
}

RadialProfile radial_solve(int n, double R, const RadialRhs& F, const RadialOptions& options) {
    if (n < 1) throw ParameterError("radial_solve: n >= 1");
    if (!(R > 0.0)) throw ParameterError("radial_solve: R > 0");
    if (!F) throw ParameterError("radial_solve: empty right-hand side");
    if (!(options.tol > 0.0) || !(options.cutoff > 0.0 && options.cutoff < 1e-2)) {
        throw ParameterError("radial_solve: bad tolerances");
    }
    std::vector<double> floors = options.floors;
    if (floors.empty() || !options.depends_on_u) floors = {floors.empty() ? 1e-8 : floors.back()};
    for (double f : floors) {
        if (!(f > 0.0)) throw ParameterError("radial_solve: floors must be positive");
    }

    std::vector<Shot> shots;
    for (double f : floors) shots.push_back(Shooter(n, R, F, f, options).solve());

    RadialProfile p;
    p.n = n;
    p.R = R;
    p.tolerance = options.tol;
    p.floors = floors;
    for (const Shot& s : shots) p.center_by_floor.push_back(s.u.front());
    p.r = shots.back().r;
    p.u = shots.back().u;
    p.du = shots.back().du;

    // Pointwise Aitken extrapolation over the last three floors.
    if (shots.size() >= 3) {
        const Shot& s0 = shots[shots.size() - 3];
        const Shot& s1 = shots[shots.size() - 2];
        const Shot& s2 = shots.back();
        for (std::size_t i = 0; i < p.u.size(); ++i) {
            for (auto [field, a, b, c] : {std::tuple{&p.u, s0.u[i], s1.u[i], s2.u[i]},
                                          std::tuple{&p.du, s0.du[i], s1.du[i], s2.du[i]}}) {
                const double d1 = b - a;
                const double d2 = c - b;
                if (d1 != 0.0) {
                    const double rho = d2 / d1;
                    if (rho > 0.0 && rho < 0.9) (*field)[i] = c + d2 * rho / (1.0 - rho);
                }
            }
        }
    }
    p.center_value = p.u.front();
    return p;
}

RadialProfile radial_solve(const PowerLawRHS& F, double R, RadialOptions options) {
    options.depends_on_u = F.alpha() != 0.0;
    const PowerLawRHS G = F;
    RadialRhs f = [G, R](double r, double u) { return G.at_distance(std::max(R - r, 0.0), u); };
    return radial_solve(F.dimension(), R, f, options);
}

}  // namespace dmalab
