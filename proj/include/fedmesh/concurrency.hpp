#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace fedmesh {

/// Fixed-size worker pool. Tasks run in submission order across the workers;
/// results travel through futures, so exceptions propagate to the caller.
class ThreadPool {
public:
    explicit ThreadPool(std::size_t threads) {
        if (threads == 0) threads = 1;
        workers_.reserve(threads);
        for (std::size_t i = 0; i < threads; ++i) {
            workers_.emplace_back([this] { run(); });
        }
    }

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            stopping_ = true;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    std::size_t size() const { return workers_.size(); }

    template <typename F>
    auto submit(F&& fn) -> std::future<std::invoke_result_t<std::decay_t<F>>> {
        using R = std::invoke_result_t<std::decay_t<F>>;
        auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(fn));
        std::future<R> result = task->get_future();
        {
            std::lock_guard<std::mutex> lock(mu_);
            queue_.emplace_back([task] { (*task)(); });
        }
        cv_.notify_one();
        return result;
    }

private:
    void run() {
        for (;;) {
            std::function<void()> task;
            {
                std::unique_lock<std::mutex> lock(mu_);
                cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
                if (queue_.empty()) return;
                task = std::move(queue_.front());
                queue_.pop_front();
            }
            task();
        }
    }

    std::vector<std::thread> workers_;
    std::deque<std::function<void()>> queue_;
    std::mutex mu_;
    std::condition_variable cv_;
    bool stopping_ = false;
};

/// Admission gate that lets at most `capacity` callers through at a time and
/// admits waiters strictly in arrival order. Tickets are dense, so a ticket
/// may proceed once enough predecessors have left: ticket < left + capacity.
class FifoGate {
public:
    explicit FifoGate(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

    void enter() {
        std::unique_lock<std::mutex> lock(mu_);
        const std::uint64_t ticket = next_ticket_++;
        cv_.wait(lock, [&] { return ticket < left_ + capacity_; });
    }

    void leave() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            ++left_;
        }
        cv_.notify_all();
    }

    std::size_t capacity() const { return capacity_; }

    /// Scoped pass through the gate.
    class Pass {
    public:
        explicit Pass(FifoGate& gate) : gate_(&gate) { gate_->enter(); }
        ~Pass() {
            if (gate_) gate_->leave();
        }
        Pass(const Pass&) = delete;
        Pass& operator=(const Pass&) = delete;

    private:
        FifoGate* gate_;
    };

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::size_t capacity_;
    std::uint64_t next_ticket_ = 0;
    std::uint64_t left_ = 0;
};

}  // namespace fedmesh
