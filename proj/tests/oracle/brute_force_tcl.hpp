#pragma once

#include <vector>

#include "semap/dataset.hpp"
#include "semap/tcl.hpp"

namespace semap::oracle {

// Reference labeler written directly from the voting rule, with no shared code
// beyond the dataset containers: for every point, every frame in the window and
// every class it re-projects and re-sums from scratch.
std::vector<std::vector<PointLabel>> bruteForceLabels(const SequenceDataset& ds, int window, bool stereo,
                                                      double dist_min);

}  // namespace semap::oracle
