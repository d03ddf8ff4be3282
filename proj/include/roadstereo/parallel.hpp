#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace roadstereo {

/// 0 means "use the hardware concurrency".
inline unsigned resolve_threads(unsigned requested) noexcept
{
    if (requested != 0)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for every i in [begin, end), split into contiguous chunks over
/// `threads` workers. Each index is processed by exactly one call, so results
/// written per index do not depend on the worker count.
template <typename Fn>
void parallel_for(int begin, int end, unsigned threads, Fn&& fn)
{
    if (end <= begin)
        return;
    const int count = end - begin;
    const int workers = std::min(static_cast<int>(resolve_threads(threads)), count);
    if (workers <= 1) {
        for (int i = begin; i < end; ++i)
            fn(i);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + static_cast<int>(static_cast<long long>(count) * w / workers);
        const int hi = begin + static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
        pool.emplace_back([&, lo, hi] {
            try {
                for (int i = lo; i < hi; ++i)
                    fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        });
    }
    pool.clear();
    if (failure)
        std::rethrow_exception(failure);
}

}  // namespace roadstereo
