#include "skembed/stats.hpp"

#include "skembed/error.hpp"
#include "skembed/rng.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

namespace skembed {

double chi_square_sf(double statistic, double dof) {
    if (dof <= 0) return 1.0;
    if (statistic <= 0) return 1.0;
    return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

ChiSquareResult& ChiSquareResult::operator+=(const ChiSquareResult& other) {
    statistic += other.statistic;
    dof += other.dof;
    impossible_cell = impossible_cell || other.impossible_cell;
    finalize();
    return *this;
}

void ChiSquareResult::finalize() {
    p_value = impossible_cell ? 0.0 : chi_square_sf(statistic, static_cast<double>(dof));
}

ChiSquareResult chi_square_gof(const std::map<std::int64_t, std::int64_t>& counts,
                               const std::map<std::int64_t, double>& probabilities) {
    ChiSquareResult out;
    std::int64_t total = 0;
    for (const auto& [cell, c] : counts) total += c;
    if (total == 0) return out;
    std::int64_t cells = 0;
    for (const auto& [cell, p] : probabilities) {
        if (p <= 0) continue;
        ++cells;
        const auto it = counts.find(cell);
        const double observed = it == counts.end() ? 0.0 : static_cast<double>(it->second);
        const double expected = p * static_cast<double>(total);
        out.statistic += (observed - expected) * (observed - expected) / expected;
    }
    for (const auto& [cell, c] : counts) {
        const auto it = probabilities.find(cell);
        if (c > 0 && (it == probabilities.end() || it->second <= 0)) out.impossible_cell = true;
    }
    out.dof = std::max<std::int64_t>(cells - 1, 0);
    out.finalize();
    return out;
}

std::vector<double> block_bootstrap(std::size_t blocks, std::size_t resamples, std::uint64_t seed,
                                    const std::function<double(const std::vector<std::size_t>&)>& statistic) {
    if (blocks == 0) throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least one block");
    CounterRng rng(seed, 0, Substream::Bootstrap);
    std::vector<double> out;
    out.reserve(resamples);
    std::vector<std::size_t> chosen(blocks);
    for (std::size_t r = 0; r < resamples; ++r) {
        for (auto& b : chosen) b = static_cast<std::size_t>(rng.below(blocks));
        out.push_back(statistic(chosen));
    }
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

LineFit weighted_least_squares(const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& w) {
    if (x.size() != y.size() || x.size() != w.size()) throw Error(ErrorCode::InvalidArgument, "fit inputs differ in size");
    if (x.size() < 2) throw Error(ErrorCode::InvalidArgument, "line fit needs at least two points");
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sw += w[k];
        sx += w[k] * x[k];
        sy += w[k] * y[k];
    }
    const double mx = sx / sw;
    const double my = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += w[k] * (x[k] - mx) * (x[k] - mx);
        sxy += w[k] * (x[k] - mx) * (y[k] - my);
    }
    LineFit fit;
    fit.points = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    // inverse-variance weights: Var(slope) = 1 / sxx
    fit.slope_se = std::sqrt(1.0 / sxx);
    return fit;
}

double stable_sum(const std::vector<double>& values) {
    double sum = 0.0, comp = 0.0;
    for (const double v : values) {
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return sum + comp;
}

} // namespace skembed
