#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "pdmp/types.hpp"

namespace pdmp {

/// Thread-safe cache of per-start-state integrals. Starts are compared bit
/// for bit, so hits only occur for identical post-jump states (always the
/// case in one dimension, where every jump resets to 0).
template <typename Value>
class StartMemo {
 public:
  std::optional<Value> find(int index, const State& y) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = table_.find(key(index, y));
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }
  void store(int index, const State& y, const Value& v) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (table_.size() < kCapacity) table_.emplace(key(index, y), v);
  }

 private:
  static constexpr std::size_t kCapacity = 4096;
  static std::vector<double> key(int index, const State& y) {
    std::vector<double> k(y.data(), y.data() + y.size());
    k.push_back(static_cast<double>(index));
    return k;
  }
  mutable std::mutex mutex_;
  std::map<std::vector<double>, Value> table_;
};

}  // namespace pdmp
