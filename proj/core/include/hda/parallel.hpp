#pragma once

#include <cstddef>
#include <functional>

namespace hda {

// Number of worker threads used by the embarrassingly parallel stages
// (rendering, truth clouds, Monte Carlo). 0 selects hardware concurrency.
struct ParallelOptions {
  unsigned threads = 0;

  unsigned resolved() const;
};

// Runs body(i) for i in [0, count). Work items are claimed dynamically, so
// callers must write results to index-addressed storage only.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  const ParallelOptions& options = {});

}  // namespace hda
