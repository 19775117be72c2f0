#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <deque>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace mixtrain::verify {

// Runs a tree-shaped workload on `workers` threads. Each worker owns a
// lock-protected deque: it pushes children to the back and pops from the back
// (depth first). An idle worker steals the front half of the fullest deque,
// i.e. the shallowest pending nodes, which root the largest unexplored
// subtrees.
//
// `process(task, children)` handles one node and appends any child tasks.
template <typename Task>
class WorkStealingPool {
 public:
  explicit WorkStealingPool(std::size_t workers) : queues_(std::max<std::size_t>(workers, 1)) {}

  [[nodiscard]] std::size_t workers() const noexcept { return queues_.size(); }

  // Roots are dealt round-robin. Returns the number of successful steals.
  template <typename Process>
  std::size_t run(std::vector<Task> roots, Process&& process) {
    pending_.store(roots.size());
    steals_.store(0);
    for (std::size_t i = 0; i < roots.size(); ++i) {
      queues_[i % queues_.size()].items.push_back(std::move(roots[i]));
    }
    if (queues_.size() == 1) {
      worker_loop(0, process);
    } else {
      std::vector<std::jthread> threads;
      threads.reserve(queues_.size());
      for (std::size_t w = 0; w < queues_.size(); ++w) {
        threads.emplace_back([this, w, &process] { worker_loop(w, process); });
      }
    }
    return steals_.load();
  }

 private:
  struct Queue {
    std::mutex mu;
    std::deque<Task> items;
  };

  bool pop_own(std::size_t w, Task& out) {
    auto& q = queues_[w];
    std::lock_guard lock(q.mu);
    if (q.items.empty()) return false;
    out = std::move(q.items.back());
    q.items.pop_back();
    return true;
  }

  bool steal(std::size_t thief) {
    std::size_t victim = thief;
    std::size_t best = 0;
    for (std::size_t v = 0; v < queues_.size(); ++v) {
      if (v == thief) continue;
      std::lock_guard lock(queues_[v].mu);
      if (queues_[v].items.size() > best) {
        best = queues_[v].items.size();
        victim = v;
      }
    }
    if (victim == thief) return false;
    std::vector<Task> loot;
    {
      std::lock_guard lock(queues_[victim].mu);
      auto& items = queues_[victim].items;
      const std::size_t take = (items.size() + 1) / 2;
      for (std::size_t i = 0; i < take && !items.empty(); ++i) {
        loot.push_back(std::move(items.front()));
        items.pop_front();
      }
    }
    if (loot.empty()) return false;
    {
      std::lock_guard lock(queues_[thief].mu);
      // Keep the stolen shallow nodes at the front so the thief also works
      // depth first from the back.
      for (auto it = loot.rbegin(); it != loot.rend(); ++it) {
        queues_[thief].items.push_front(std::move(*it));
      }
    }
    steals_.fetch_add(1);
    return true;
  }

  template <typename Process>
  void worker_loop(std::size_t w, Process& process) {
    std::vector<Task> children;
    Task task;
    while (true) {
      if (pop_own(w, task)) {
        children.clear();
        process(task, children);
        if (!children.empty()) {
          pending_.fetch_add(children.size());
          std::lock_guard lock(queues_[w].mu);
          for (auto& c : children) queues_[w].items.push_back(std::move(c));
        }
        pending_.fetch_sub(1);
        continue;
      }
      if (pending_.load() == 0) return;
      if (!steal(w)) std::this_thread::sleep_for(std::chrono::microseconds(50));
    }
  }

  std::vector<Queue> queues_;
  std::atomic<std::size_t> pending_{0};
  std::atomic<std::size_t> steals_{0};
};

}  // namespace mixtrain::verify
