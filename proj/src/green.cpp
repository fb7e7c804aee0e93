#include "skembed/green.hpp"

#include "skembed/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace skembed {

std::string_view to_string(GreenMethod method) noexcept {
    return method == GreenMethod::MatrixPower ? "MatrixPower" : "LatticeConvolution";
}

GreenMethod green_method(const ChainSpec& spec) noexcept {
    return spec.is_finite() ? GreenMethod::MatrixPower : GreenMethod::LatticeConvolution;
}

namespace {

constexpr double kMassTolerance = 1e-12;

void check_mass(double kept, double dropped) {
    if (std::abs(kept + dropped - 1.0) > kMassTolerance) {
        throw std::logic_error("Green recursion lost probability mass");
    }
}

std::int64_t lattice_radius(std::int64_t n_max) {
    return static_cast<std::int64_t>(std::ceil(7.9 * std::sqrt(static_cast<double>(n_max)))) + 2;
}

// Calls visit(n, a_ij(n)) for n = 0..n_max.
template <class Visit>
void run_finite(const ChainSpec& spec, State i, State j, std::int64_t n_max, Visit&& visit) {
    const std::size_t s = spec.num_states();
    std::vector<std::vector<double>> p(s, std::vector<double>(s));
    for (std::size_t a = 0; a < s; ++a) {
        for (std::size_t b = 0; b < s; ++b) p[a][b] = to_double(spec.matrix()[a][b]);
    }
    const double inv_mj = 1.0 / to_double(spec.stationary(j));
    std::vector<double> mu(s, 0.0), next(s);
    mu[static_cast<std::size_t>(i)] = 1.0;
    double a = 0.0;
    for (std::int64_t n = 0;; ++n) {
        a += mu[static_cast<std::size_t>(j)] * inv_mj;
        visit(n, a);
        if (n == n_max) break;
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t x = 0; x < s; ++x) {
            if (mu[x] == 0.0) continue;
            for (std::size_t y = 0; y < s; ++y) next[y] += mu[x] * p[x][y];
        }
        mu.swap(next);
        double kept = 0.0;
        for (const double v : mu) kept += v;
        check_mass(kept, 0.0);
    }
}

template <class Visit>
void run_z(State i, State j, std::int64_t n_max, Visit&& visit) {
    const std::int64_t r = lattice_radius(n_max);
    const std::int64_t width = 2 * r + 1;
    std::vector<double> cur(static_cast<std::size_t>(width), 0.0), next(cur.size(), 0.0);
    cur[static_cast<std::size_t>(r)] = 1.0;
    const std::int64_t target = j - i + r;
    const bool inside = target >= 0 && target < width;
    double dropped = 0.0;
    double a = 0.0;
    std::int64_t h = 0;
    for (std::int64_t n = 0;; ++n) {
        if (inside) a += cur[static_cast<std::size_t>(target)];
        visit(n, a);
        if (n == n_max) break;
        const std::int64_t lo = r - h, hi = r + h;
        double kept = 0.0;
        for (std::int64_t x = lo; x <= hi; ++x) {
            const double v = 0.5 * cur[static_cast<std::size_t>(x)];
            if (v == 0.0) continue;
            if (x - 1 >= 0) {
                next[static_cast<std::size_t>(x - 1)] += v;
            } else {
                dropped += v;
            }
            if (x + 1 < width) {
                next[static_cast<std::size_t>(x + 1)] += v;
            } else {
                dropped += v;
            }
            cur[static_cast<std::size_t>(x)] = 0.0;
        }
        h = std::min(h + 1, r);
        for (std::int64_t x = r - h; x <= r + h; ++x) kept += next[static_cast<std::size_t>(x)];
        cur.swap(next);
        check_mass(kept, dropped);
    }
    if (dropped > kMassTolerance) throw std::logic_error("lattice truncation dropped too much mass");
}

template <class Visit>
void run_z2(State i, State j, std::int64_t n_max, Visit&& visit) {
    const std::int64_t r = lattice_radius(n_max);
    const std::int64_t width = 2 * r + 1;
    auto idx = [width](std::int64_t x, std::int64_t y) { return static_cast<std::size_t>(x * width + y); };
    std::vector<double> cur(static_cast<std::size_t>(width * width), 0.0), next(cur.size(), 0.0);
    cur[idx(r, r)] = 1.0;
    const std::int64_t tx = static_cast<std::int64_t>(z2_x(j)) - z2_x(i) + r;
    const std::int64_t ty = static_cast<std::int64_t>(z2_y(j)) - z2_y(i) + r;
    const bool inside = tx >= 0 && tx < width && ty >= 0 && ty < width;
    double dropped = 0.0;
    double a = 0.0;
    std::int64_t h = 0;
    for (std::int64_t n = 0;; ++n) {
        if (inside) a += cur[idx(tx, ty)];
        visit(n, a);
        if (n == n_max) break;
        auto push = [&](std::int64_t x, std::int64_t y, double v) {
            if (x >= 0 && x < width && y >= 0 && y < width) {
                next[idx(x, y)] += v;
            } else {
                dropped += v;
            }
        };
        for (std::int64_t x = r - h; x <= r + h; ++x) {
            for (std::int64_t y = r - h; y <= r + h; ++y) {
                const double v = 0.25 * cur[idx(x, y)];
                if (v == 0.0) continue;
                push(x - 1, y, v);
                push(x + 1, y, v);
                push(x, y - 1, v);
                push(x, y + 1, v);
                cur[idx(x, y)] = 0.0;
            }
        }
        h = std::min(h + 1, r);
        double kept = 0.0;
        for (std::int64_t x = r - h; x <= r + h; ++x) {
            for (std::int64_t y = r - h; y <= r + h; ++y) kept += next[idx(x, y)];
        }
        cur.swap(next);
        check_mass(kept, dropped);
    }
    if (dropped > kMassTolerance) throw std::logic_error("lattice truncation dropped too much mass");
}

template <class Visit>
void run(const ChainSpec& spec, State i, State j, std::int64_t n_max, const GreenOptions& options, Visit&& visit) {
    if (n_max < 0) throw Error(ErrorCode::InvalidArgument, "n must be non-negative");
    if (!spec.contains(i) || !spec.contains(j)) throw Error(ErrorCode::UnknownState, "Green function state not in chain");
    switch (spec.kind()) {
    case ChainKind::FiniteMatrix:
    case ChainKind::IidCategorical: run_finite(spec, i, j, n_max, visit); return;
    case ChainKind::SrwZ:
        if (n_max > options.srw_z_budget) {
            throw Error(ErrorCode::BudgetExceeded, "n = " + std::to_string(n_max) + " beyond the Z convolution budget " +
                                                       std::to_string(options.srw_z_budget));
        }
        run_z(i, j, n_max, visit);
        return;
    case ChainKind::SrwZ2:
        if (n_max > options.srw_z2_budget) {
            throw Error(ErrorCode::BudgetExceeded, "n = " + std::to_string(n_max) + " beyond the Z^2 convolution budget " +
                                                       std::to_string(options.srw_z2_budget));
        }
        run_z2(i, j, n_max, visit);
        return;
    }
}

} // namespace

std::vector<double> green_curve(const ChainSpec& spec, State i, State j, std::int64_t n_max,
                                const GreenOptions& options) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n_max, 0)) + 1);
    run(spec, i, j, n_max, options, [&](std::int64_t, double a) { out.push_back(a); });
    return out;
}

double green_truncated(const ChainSpec& spec, State i, State j, std::int64_t n, const GreenOptions& options) {
    double last = 0.0;
    run(spec, i, j, n, options, [&](std::int64_t, double a) { last = a; });
    return last;
}

double orey_ratio(const ChainSpec& spec, State i, State j, State k, State l, std::int64_t n,
                  const GreenOptions& options) {
    const double den = green_truncated(spec, k, l, n, options);
    if (den == 0.0) {
        throw Error(ErrorCode::NotYetVisitable, spec.label(l) + " cannot be reached from " + spec.label(k) +
                                                    " within " + std::to_string(n) + " steps");
    }
    if (i == k && j == l) return 1.0;
    return green_truncated(spec, i, j, n, options) / den;
}

GreenCurve::GreenCurve(const ChainSpec& spec, State i, State j, std::int64_t n_max, const GreenOptions& options,
                       std::int64_t dense, int per_decade)
    : n_max_(n_max) {
    for (std::int64_t n = 0; n <= std::min(dense, n_max); ++n) grid_.push_back(n);
    if (n_max > dense) {
        const double ratio = std::pow(10.0, 1.0 / per_decade);
        double x = static_cast<double>(dense);
        for (;;) {
            x *= ratio;
            const auto n = static_cast<std::int64_t>(std::llround(x));
            if (n >= n_max) break;
            if (n > grid_.back()) grid_.push_back(n);
        }
        grid_.push_back(n_max);
    }
    values_.reserve(grid_.size());
    std::size_t next = 0;
    run(spec, i, j, n_max, options, [&](std::int64_t n, double a) {
        if (next < grid_.size() && grid_[next] == n) {
            values_.push_back(a);
            ++next;
        }
    });
}

double GreenCurve::operator()(std::int64_t n) const {
    if (n < 0) return 0.0;
    if (n > n_max_) throw Error(ErrorCode::BudgetExceeded, "Green curve evaluated beyond its range");
    const auto it = std::lower_bound(grid_.begin(), grid_.end(), n);
    const auto k = static_cast<std::size_t>(it - grid_.begin());
    if (*it == n) return values_[k];
    const double t = static_cast<double>(n - grid_[k - 1]) / static_cast<double>(grid_[k] - grid_[k - 1]);
    return values_[k - 1] + t * (values_[k] - values_[k - 1]);
}

} // namespace skembed
