#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <type_traits>
#include <vector>

#include <omp.h>

namespace skembed {

/// Number of worker threads used when the caller passes 0.
inline int default_threads() { return omp_get_max_threads(); }

/// Serial reference: results[r] = f(r) for r in [0, n), in order.
template <class F>
auto map_replicas_serial(std::uint64_t n, F&& f) -> std::vector<std::invoke_result_t<F&, std::uint64_t>> {
    std::vector<std::invoke_result_t<F&, std::uint64_t>> out;
    out.reserve(n);
    for (std::uint64_t r = 0; r < n; ++r) out.push_back(f(r));
    return out;
}

/// Replica fan-out over an OpenMP team. Each result lands at its replica
/// index, so the output does not depend on the thread count or schedule and
/// equals map_replicas_serial whenever f(r) depends only on r. If replicas
/// throw, the exception of the lowest failing index is rethrown.
template <class F>
auto map_replicas(std::uint64_t n, F&& f, int threads = 0) -> std::vector<std::invoke_result_t<F&, std::uint64_t>> {
    using R = std::invoke_result_t<F&, std::uint64_t>;
    if (threads <= 0) threads = default_threads();
    if (threads == 1 || n < 2) return map_replicas_serial(n, f);

    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (std::int64_t r = 0; r < count; ++r) {
        try {
            slots[static_cast<std::size_t>(r)].emplace(f(static_cast<std::uint64_t>(r)));
        } catch (...) {
            errors[static_cast<std::size_t>(r)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

} // namespace skembed
