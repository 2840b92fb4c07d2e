#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rbill {

template <typename Fn>
void run_batches(long long n_mc, const McOptions& opts, Fn&& fn) {
    const int batches = opts.batches;
    auto range = [&](int b) {
        return std::pair<long long, long long>{n_mc * b / batches, n_mc * (b + 1) / batches};
    };
    const int threads = std::max(1, std::min(opts.threads, batches));
    if (threads == 1) {
        for (int b = 0; b < batches; ++b) {
            auto [lo, hi] = range(b);
            fn(b, lo, hi);
        }
        return;
    }
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int b = t; b < batches; b += threads) {
                    auto [lo, hi] = range(b);
                    fn(b, lo, hi);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!error) error = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace rbill
