#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace ssipt {

/// Applies fn to every element on a small pool of threads. Output order
/// matches input order; the first exception (by index) is rethrown.
template <typename T, typename Fn>
auto parallel_map(const std::vector<T>& items, Fn fn) -> std::vector<std::invoke_result_t<Fn, const T&>> {
    using R = std::invoke_result_t<Fn, const T&>;
    const std::size_t n = items.size();
    std::vector<R> out(n);
    std::vector<std::exception_ptr> errors(n);
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));

    auto run = [&](std::size_t w) {
        for (std::size_t i = w; i < n; i += workers) {
            try {
                out[i] = fn(items[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    if (workers <= 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace ssipt
