#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace skembed {

/// Upper tail P(chi2_dof > statistic).
double chi_square_sf(double statistic, double dof);

struct ChiSquareResult {
    double statistic = 0.0;
    std::int64_t dof = 0;
    double p_value = 1.0;
    /// A count fell in a cell of expected probability zero.
    bool impossible_cell = false;

    ChiSquareResult& operator+=(const ChiSquareResult& other);
    /// Recomputes p_value from statistic and dof (or 0 for impossible cells).
    void finalize();
};

/// Goodness of fit of counts[cell] against probabilities[cell]. Cells with
/// zero probability must be empty; they carry no degrees of freedom.
ChiSquareResult chi_square_gof(const std::map<std::int64_t, std::int64_t>& counts,
                               const std::map<std::int64_t, double>& probabilities);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Percentile interval of `statistic` over `resamples` block-bootstrap
/// resamples of the replica-indexed data: the replicas are cut into `blocks`
/// contiguous blocks and whole blocks are drawn with replacement. The
/// statistic receives the list of chosen block indices.
std::vector<double> block_bootstrap(std::size_t blocks, std::size_t resamples, std::uint64_t seed,
                                    const std::function<double(const std::vector<std::size_t>&)>& statistic);

double quantile(std::vector<double> values, double q);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    std::size_t points = 0;
};

/// Weighted least squares fit of y = a + b x.
LineFit weighted_least_squares(const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& w);

/// Sum with exact summation order independent of how the data were produced.
double stable_sum(const std::vector<double>& values);

} // namespace skembed
