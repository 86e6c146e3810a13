#include "trusmap/threading.hpp"

#include <atomic>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace trusmap {
namespace {

int resolve(int n) {
    if (n > 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

class Pool {
public:
    explicit Pool(int workers) {
        threads_.reserve(workers);
        for (int i = 0; i < workers; ++i)
            threads_.emplace_back([this] { worker_loop(); });
    }

    ~Pool() {
        {
            std::lock_guard lk(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    void run(int n, const std::function<void(int)>& fn) {
        if (n <= 0) return;
        {
            std::lock_guard lk(mu_);
            fn_ = &fn;
            total_ = n;
            next_.store(0, std::memory_order_relaxed);
            pending_ = n;
            error_ = nullptr;
            ++generation_;
        }
        cv_.notify_all();
        drain();  // the calling thread participates
        std::unique_lock lk(mu_);
        done_cv_.wait(lk, [this] { return pending_ == 0; });
        fn_ = nullptr;
        if (error_) std::rethrow_exception(error_);
    }

private:
    void worker_loop() {
        std::uint64_t seen = 0;
        for (;;) {
            {
                std::unique_lock lk(mu_);
                cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
            }
            drain();
        }
    }

    void drain() {
        for (;;) {
            const int i = next_.fetch_add(1, std::memory_order_relaxed);
            if (i >= total_) return;
            try {
                (*fn_)(i);
            } catch (...) {
                std::lock_guard lk(mu_);
                if (!error_) error_ = std::current_exception();
            }
            std::lock_guard lk(mu_);
            if (--pending_ == 0) done_cv_.notify_all();
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(int)>* fn_ = nullptr;
    std::atomic<int> next_{0};
    int total_ = 0;
    int pending_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
};

std::mutex g_mu;
std::mutex g_run_mu;
int g_threads = 0;  // resolved lazily
Pool* g_pool = nullptr;

}  // namespace

void set_thread_count(int n) {
    std::lock_guard lk(g_mu);
    const int resolved = resolve(n);
    if (resolved == g_threads && g_pool) return;
    delete g_pool;
    g_pool = nullptr;
    g_threads = resolved;
}

int thread_count() {
    std::lock_guard lk(g_mu);
    if (g_threads == 0) g_threads = resolve(0);
    return g_threads;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
    Pool* pool;
    {
        std::lock_guard lk(g_mu);
        if (g_threads == 0) g_threads = resolve(0);
        if (g_threads == 1) {
            pool = nullptr;
        } else {
            if (!g_pool) g_pool = new Pool(g_threads - 1);
            pool = g_pool;
        }
    }
    // Concurrent or nested parallel sections fall back to the calling thread;
    // results do not depend on the execution strategy.
    std::unique_lock run_lk(g_run_mu, std::try_to_lock);
    if (!pool || !run_lk.owns_lock()) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    pool->run(n, fn);
}

}  // namespace trusmap
