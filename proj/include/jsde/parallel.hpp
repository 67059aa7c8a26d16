#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace jsde {

inline std::size_t default_jobs() {
    const auto n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

/// Runs produce(i) for i in [0, count) on up to `jobs` threads and hands the
/// results to consume(i, result) strictly in index order on the calling
/// thread. Work is done in chunks so at most `chunk` results are held at once.
/// If any produce call throws, the exception of the lowest failing index is
/// rethrown after its chunk finishes; earlier results have been consumed.
template <class Produce, class Consume>
void ordered_parallel(std::size_t count, std::size_t jobs, Produce&& produce, Consume&& consume,
                      std::size_t chunk = 0) {
    using Result = decltype(produce(std::size_t{0}));
    jobs = std::max<std::size_t>(jobs, 1);
    if (chunk == 0) {
        chunk = std::max<std::size_t>(jobs * 8, 64);
    }
    std::vector<std::optional<Result>> slots;
    std::vector<std::exception_ptr> errors;
    for (std::size_t begin = 0; begin < count; begin += chunk) {
        const std::size_t end = std::min(count, begin + chunk);
        const std::size_t n = end - begin;
        slots.assign(n, std::nullopt);
        errors.assign(n, nullptr);
        auto work = [&](std::atomic<std::size_t>& next) {
            for (std::size_t j = next++; j < n; j = next++) {
                try {
                    slots[j].emplace(produce(begin + j));
                } catch (...) {
                    errors[j] = std::current_exception();
                }
            }
        };
        std::atomic<std::size_t> next{0};
        const std::size_t workers = std::min(jobs, n);
        if (workers <= 1) {
            work(next);
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(workers - 1);
            for (std::size_t w = 1; w < workers; ++w) {
                pool.emplace_back([&] { work(next); });
            }
            work(next);
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (errors[j]) {
                std::rethrow_exception(errors[j]);
            }
            consume(begin + j, std::move(*slots[j]));
        }
    }
}

}  // namespace jsde
