// SPDX-License-Identifier: Apache-2.0
#include "cbt/parallel.hh"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace cbt
{
namespace
{
std::atomic<int> g_threads{1};
constexpr std::size_t reduction_blocks = 256;
}  // namespace

void set_thread_count(int n)
{
    g_threads = std::max(1, n);
}

int thread_count()
{
    return g_threads;
}

void parallel_for(std::size_t n,
                  std::function<void(std::size_t, std::size_t)> const& body)
{
    if (n == 0)
        return;
    std::size_t const nthreads
        = std::min<std::size_t>(static_cast<std::size_t>(g_threads), n);
    if (nthreads <= 1)
    {
        body(0, n);
        return;
    }

    // Dynamic chunking so uneven per-item cost (ray lengths) balances out.
    std::size_t const chunk = std::max<std::size_t>(1, n / (nthreads * 8));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        try
        {
            for (;;)
            {
                std::size_t const begin = next.fetch_add(chunk);
                if (begin >= n)
                    break;
                body(begin, std::min(n, begin + chunk));
            }
        }
        catch (...)
        {
            std::lock_guard lock(failure_mutex);
            if (!failure)
                failure = std::current_exception();
            next = n;
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(nthreads - 1);
    for (std::size_t t = 1; t < nthreads; ++t)
        pool.emplace_back(worker);
    worker();
    pool.clear();
    if (failure)
        std::rethrow_exception(failure);
}

double parallel_sum(std::size_t n, std::function<double(std::size_t)> const& term)
{
    std::size_t const nblocks = std::min(n, reduction_blocks);
    if (nblocks == 0)
        return 0.0;
    std::vector<CompensatedSum> partial(nblocks);
    parallel_for(nblocks, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b)
        {
            std::size_t const lo = n * b / nblocks;
            std::size_t const hi = n * (b + 1) / nblocks;
            for (std::size_t i = lo; i < hi; ++i)
                partial[b].add(term(i));
        }
    });
    CompensatedSum total;
    for (auto const& p : partial)
        total.add(p.value());
    return total.value();
}

double parallel_max(std::size_t n, std::function<double(std::size_t)> const& term)
{
    std::size_t const nblocks = std::min(n, reduction_blocks);
    if (nblocks == 0)
        return 0.0;
    std::vector<double> partial(nblocks, -INFINITY);
    parallel_for(nblocks, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b)
        {
            std::size_t const lo = n * b / nblocks;
            std::size_t const hi = n * (b + 1) / nblocks;
            for (std::size_t i = lo; i < hi; ++i)
                partial[b] = std::max(partial[b], term(i));
        }
    });
    return *std::max_element(partial.begin(), partial.end());
}

}  // namespace cbt
