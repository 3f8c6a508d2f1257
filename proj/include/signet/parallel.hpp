#pragma once

#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace signet {

// Minimal persistent worker pool for data-parallel loops. Work is split into
// fixed contiguous ranges, one per worker, so every output element is written
// by exactly one thread in the same order as the sequential loop; results are
// bit-identical for any thread count.
class ThreadPool {
public:
    static ThreadPool& instance() {
        static ThreadPool pool;
        return pool;
    }

    int size() const { return static_cast<int>(workers_.size()) + 1; }

    // Runs fn(begin, end) over [0, n) split into size() contiguous chunks.
    // The calling thread executes the first chunk.
    void run(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn) {
        if (n <= 0) return;
        const int parts = static_cast<int>(std::min<std::int64_t>(size(), n));
        if (parts == 1) {
            fn(0, n);
            return;
        }
        {
            std::unique_lock lock(mutex_);
            task_ = &fn;
            task_n_ = n;
            task_parts_ = parts;
            next_part_ = 1;
            pending_ = parts - 1;
            ++generation_;
        }
        cv_.notify_all();
        run_part(fn, 0, n, parts);
        std::unique_lock lock(mutex_);
        done_cv_.wait(lock, [this] { return pending_ == 0; });
        task_ = nullptr;
    }

    ~ThreadPool() {
        {
            std::unique_lock lock(mutex_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& t : workers_) t.join();
    }

private:
    ThreadPool() {
        int n = static_cast<int>(std::thread::hardware_concurrency());
        if (const char* env = std::getenv("SIGNET_THREADS")) {
            int v = std::atoi(env);
            if (v >= 1) n = v;
        }
        if (n < 1) n = 1;
        if (n > 16) n = 16;
        for (int i = 1; i < n; ++i) {
            workers_.emplace_back([this] { worker_loop(); });
        }
    }

    static void run_part(const std::function<void(std::int64_t, std::int64_t)>& fn,
                         int part, std::int64_t n, int parts) {
        const std::int64_t chunk = (n + parts - 1) / parts;
        const std::int64_t begin = part * chunk;
        const std::int64_t end = std::min<std::int64_t>(n, begin + chunk);
        if (begin < end) fn(begin, end);
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(std::int64_t, std::int64_t)>* task = nullptr;
            std::int64_t n = 0;
            int parts = 0;
            int part = 0;
            {
                std::unique_lock lock(mutex_);
                cv_.wait(lock, [&] { return stop_ || (task_ != nullptr && generation_ != seen && next_part_ < task_parts_); });
                if (stop_) return;
                task = task_;
                n = task_n_;
                parts = task_parts_;
                part = next_part_++;
                if (next_part_ >= task_parts_) seen = generation_;
            }
            run_part(*task, part, n, parts);
            {
                std::unique_lock lock(mutex_);
                if (--pending_ == 0) done_cv_.notify_all();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::int64_t, std::int64_t)>* task_ = nullptr;
    std::int64_t task_n_ = 0;
    int task_parts_ = 0;
    int next_part_ = 0;
    int pending_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

inline void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn) {
    ThreadPool::instance().run(n, fn);
}

}  // namespace signet
