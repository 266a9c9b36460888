#ifndef ARE_WORKER_POOL_HPP
#define ARE_WORKER_POOL_HPP

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <stop_token>
#include <thread>
#include <vector>

namespace are {

// Fixed-size thread pool. Several callers may submit work concurrently; the
// total number of busy engine threads never exceeds size().
class WorkerPool {
public:
    // body(begin, end, worker_index); worker_index < size().
    using RangeBody = std::function<void(std::size_t, std::size_t, std::size_t)>;

    explicit WorkerPool(std::size_t threads);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    std::size_t size() const { return threads_.size(); }

    // Splits [0, count) into batches of `batch` items, runs them on the pool
    // and blocks until all have finished. The first exception thrown by any
    // batch is rethrown here; remaining unclaimed batches are skipped.
    // Must not be called from inside a pool thread.
    void parallel_for(std::size_t count, std::size_t batch, const RangeBody& body);

private:
    void worker_loop(std::stop_token stop, std::size_t index);

    std::mutex mutex_;
    std::condition_variable_any ready_;
    std::deque<std::function<void(std::size_t)>> queue_;
    std::vector<std::jthread> threads_;
};

}  // namespace are

#endif  // ARE_WORKER_POOL_HPP
