#pragma once

#include "skembed/chain.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace skembed {

enum class GreenMethod { MatrixPower, LatticeConvolution };
std::string_view to_string(GreenMethod method) noexcept;
GreenMethod green_method(const ChainSpec& spec) noexcept;

struct GreenOptions {
    /// Largest n accepted for the convolution on Z (cost ~ n^1.5, so keep this modest).
    std::int64_t srw_z_budget = 100'000;
    /// Largest n accepted on Z^2 (cost ~ n^2).
    std::int64_t srw_z2_budget = 600;
};

/// a_ij(n) = E_i L^j([0, n]) for n = 0..n_max, by the recursion
/// mu_{k+1} = mu_k P. Lattice walks keep a window of radius ~7.9 sqrt(n_max)
/// around the start, so the discarded mass stays below 1e-12.
/// Throws BudgetExceeded above the lattice budgets.
std::vector<double> green_curve(const ChainSpec& spec, State i, State j, std::int64_t n_max,
                                const GreenOptions& options = {});

double green_truncated(const ChainSpec& spec, State i, State j, std::int64_t n, const GreenOptions& options = {});

/// a_ij(n) / a_kl(n); throws NotYetVisitable when a_kl(n) = 0.
double orey_ratio(const ChainSpec& spec, State i, State j, State k, State l, std::int64_t n,
                  const GreenOptions& options = {});

/// a_ij on [0, n_max], stored exactly on every n up to `dense` and on a
/// geometric grid beyond, linearly interpolated in between. Used as the
/// a(n) representative for moment functionals a(T)^beta.
class GreenCurve {
public:
    GreenCurve(const ChainSpec& spec, State i, State j, std::int64_t n_max, const GreenOptions& options = {},
               std::int64_t dense = 4096, int per_decade = 200);

    double operator()(std::int64_t n) const;
    std::int64_t n_max() const noexcept { return n_max_; }

private:
    std::int64_t n_max_;
    std::vector<std::int64_t> grid_;
    std::vector<double> values_;
};

} // namespace skembed
