#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace corpuskit {

inline size_t default_thread_count() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

// Applies fn to every element, in parallel, writing results at the input
// index so output order never depends on scheduling. fn must be safe to
// call concurrently on distinct elements.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& items, Fn fn, size_t threads)
    -> std::vector<decltype(fn(items[0]))> {
    using Out = decltype(fn(items[0]));
    std::vector<Out> results(items.size());
    if (items.empty()) return results;
    if (threads <= 1 || items.size() == 1) {
        for (size_t i = 0; i < items.size(); ++i) results[i] = fn(items[i]);
        return results;
    }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= items.size()) break;
            results[i] = fn(items[i]);
        }
    };
    std::vector<std::thread> pool;
    size_t n = std::min(threads, items.size());
    pool.reserve(n);
    for (size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return results;
}

// In-place variant for mutating transforms over an owned vector.
template <typename T, typename Fn>
void parallel_for_each(std::vector<T>& items, Fn fn, size_t threads) {
    if (items.empty()) return;
    if (threads <= 1 || items.size() == 1) {
        for (auto& item : items) fn(item);
        return;
    }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= items.size()) break;
            fn(items[i]);
        }
    };
    std::vector<std::thread> pool;
    size_t n = std::min(threads, items.size());
    pool.reserve(n);
    for (size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace corpuskit
