// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/parallel.hpp"

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace wgs {
namespace {

int default_workers() {
    if (const char* env = std::getenv("WGS_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct ArenaHolder {
    std::mutex mutex;
    int workers = 0;
    std::unique_ptr<tbb::global_control> control;
    std::unique_ptr<tbb::task_arena> arena;

    tbb::task_arena& get() {
        std::lock_guard lock(mutex);
        if (!arena) {
            if (workers <= 0) workers = default_workers();
            control = std::make_unique<tbb::global_control>(
                tbb::global_control::max_allowed_parallelism, workers);
            arena = std::make_unique<tbb::task_arena>(workers);
        }
        return *arena;
    }
};

ArenaHolder& holder() {
    static ArenaHolder h;
    return h;
}

}  // namespace

int worker_count() {
    auto& h = holder();
    std::lock_guard lock(h.mutex);
    if (h.workers <= 0) h.workers = default_workers();
    return h.workers;
}

void set_worker_count(int n) {
    auto& h = holder();
    std::lock_guard lock(h.mutex);
    h.workers = n > 0 ? n : default_workers();
    h.arena.reset();
    h.control.reset();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (n == 1 || worker_count() == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    holder().get().execute([&] {
        tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, 1),
                          [&](const tbb::blocked_range<std::size_t>& r) {
                              for (std::size_t i = r.begin(); i != r.end(); ++i) fn(i);
                          });
    });
}

}  // namespace wgs
