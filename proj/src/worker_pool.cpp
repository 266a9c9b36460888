#include "are/worker_pool.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <memory>
#include <stdexcept>

namespace are {

WorkerPool::WorkerPool(std::size_t threads) {
    if (threads == 0) {
        throw std::invalid_argument("worker pool needs at least one thread");
    }
    threads_.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) {
        threads_.emplace_back([this, i](std::stop_token st) { worker_loop(st, i); });
    }
}

WorkerPool::~WorkerPool() {
    for (auto& t : threads_) {
        t.request_stop();
    }
    ready_.notify_all();
}

void WorkerPool::worker_loop(std::stop_token stop, std::size_t index) {
    while (true) {
        std::function<void(std::size_t)> task;
        {
            std::unique_lock lock(mutex_);
            if (!ready_.wait(lock, stop, [this] { return !queue_.empty(); })) {
                return;
            }
            task = std::move(queue_.front());
            queue_.pop_front();
        }
        task(index);
    }
}

namespace {

struct Job {
    std::size_t count = 0;
    std::size_t batch = 1;
    const WorkerPool::RangeBody* body = nullptr;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex mutex;
    std::condition_variable done;
    std::size_t pending = 0;
};

}  // namespace

void WorkerPool::parallel_for(std::size_t count, std::size_t batch, const RangeBody& body) {
    if (count == 0) {
        return;
    }
    batch = std::max<std::size_t>(batch, 1);
    const std::size_t batches = (count + batch - 1) / batch;
    const std::size_t runners = std::min(batches, size());

    auto job = std::make_shared<Job>();
    job->count = count;
    job->batch = batch;
    job->body = &body;
    job->pending = runners;

    auto runner = [job](std::size_t worker) {
        while (!job->failed.load(std::memory_order_relaxed)) {
            const std::size_t begin = job->next.fetch_add(job->batch, std::memory_order_relaxed);
            if (begin >= job->count) {
                break;
            }
            const std::size_t end = std::min(begin + job->batch, job->count);
            try {
                (*job->body)(begin, end, worker);
            } catch (...) {
                std::lock_guard lock(job->mutex);
                if (!job->error) {
                    job->error = std::current_exception();
                }
                job->failed = true;
            }
        }
        std::lock_guard lock(job->mutex);
        if (--job->pending == 0) {
            job->done.notify_all();
        }
    };

    {
        std::lock_guard lock(mutex_);
        for (std::size_t i = 0; i < runners; ++i) {
            queue_.emplace_back(runner);
        }
    }
    ready_.notify_all();

    std::unique_lock lock(job->mutex);
    job->done.wait(lock, [&] { return job->pending == 0; });
    if (job->error) {
        std::rethrow_exception(job->error);
    }
}

}  // namespace are
