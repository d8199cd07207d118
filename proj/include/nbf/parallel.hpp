#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace nbf {

/// Worker count to use: `requested`, or the hardware concurrency when 0.
[[nodiscard]] inline std::size_t resolve_workers(std::size_t requested) {
    if (requested > 0) {
        return requested;
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Computes produce(i) for i in [0, n) on `workers` threads and hands each result
/// to consume(i, result) strictly in index order. Results are buffered in fixed
/// batches, so the consumption order (and any reduction done in it) does not
/// depend on the worker count.
template <typename Produce, typename Consume>
void ordered_parallel_for(std::size_t n, std::size_t workers, Produce&& produce, Consume&& consume,
                          std::size_t batch = 32) {
    using Result = decltype(produce(std::size_t{0}));
    workers = std::max<std::size_t>(1, workers);
    std::vector<std::optional<Result>> slots(batch);
    for (std::size_t begin = 0; begin < n; begin += batch) {
        const std::size_t end = std::min(n, begin + batch);
        std::atomic<std::size_t> next{begin};
        std::vector<std::exception_ptr> errors(workers);
        auto work = [&](std::size_t w) {
            try {
                for (std::size_t i = next++; i < end; i = next++) {
                    slots[i - begin].emplace(produce(i));
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        };
        const std::size_t spawn = std::min(workers, end - begin);
        if (spawn <= 1) {
            work(0);
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(spawn);
            for (std::size_t w = 0; w < spawn; ++w) {
                pool.emplace_back(work, w);
            }
        }
        for (const auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
        for (std::size_t i = begin; i < end; ++i) {
            consume(i, std::move(*slots[i - begin]));
            slots[i - begin].reset();
        }
    }
}

}  // namespace nbf
