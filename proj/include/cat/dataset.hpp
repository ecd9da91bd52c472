#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cat/stl.hpp"

namespace cat {

enum class Split { Train, Tune, Calibrate, Test };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Tune:
      return "tune";
    case Split::Calibrate:
      return "calibrate";
    case Split::Test:
      return "test";
  }
  return "?";
}

// K trajectories of uniform length T+1 and dimension n, tagged with the split
// they were sampled for. Optional agent partition: disjoint covering index
// ranges [lo, hi) over the n dimensions.
class TrajectoryDataset {
 public:
  TrajectoryDataset(Split split, std::vector<Trace> trajectories,
                    std::vector<std::pair<std::size_t, std::size_t>> agents = {})
      : split_(split), trajectories_(std::move(trajectories)), agents_(std::move(agents)) {
    if (trajectories_.empty()) throw std::invalid_argument("TrajectoryDataset: empty");
    std::size_t len = trajectories_.front().length();
    std::size_t dim = trajectories_.front().dim();
    for (const auto& z : trajectories_) {
      if (z.length() != len || z.dim() != dim)
        throw std::invalid_argument("TrajectoryDataset: non-uniform shape");
    }
    if (!agents_.empty()) {
      std::size_t covered = 0;
      std::size_t prev_end = 0;
      for (const auto& [lo, hi] : agents_) {
        if (lo != prev_end || hi <= lo || hi > dim)
          throw std::invalid_argument("TrajectoryDataset: agent ranges must be disjoint and covering");
        covered += hi - lo;
        prev_end = hi;
      }
      if (covered != dim) throw std::invalid_argument("TrajectoryDataset: agent ranges must cover all dims");
    }
  }

  Split split() const { return split_; }
  std::size_t size() const { return trajectories_.size(); }
  std::size_t length() const { return trajectories_.front().length(); }  // T+1
  std::size_t horizon() const { return length() - 1; }                   // T
  std::size_t dim() const { return trajectories_.front().dim(); }
  const Trace& trajectory(std::size_t i) const { return trajectories_.at(i); }
  const std::vector<Trace>& trajectories() const { return trajectories_; }

  std::size_t agent_count() const { return agents_.empty() ? 1 : agents_.size(); }
  std::pair<std::size_t, std::size_t> agent_range(std::size_t a) const {
    if (agents_.empty()) {
      if (a != 0) throw std::out_of_range("agent_range");
      return {0, dim()};
    }
    return agents_.at(a);
  }
  bool partitioned() const { return !agents_.empty(); }

 private:
  Split split_;
  std::vector<Trace> trajectories_;
  std::vector<std::pair<std::size_t, std::size_t>> agents_;
};

}  // namespace cat
