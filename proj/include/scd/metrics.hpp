#pragma once

#include <cstdint>
#include <string>

#include "scd/mask.hpp"

namespace scd {

// Change-class confusion counts. Accumulating across a dataset and computing
// metrics once micro-averages them.
struct Confusion {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  void add(const LabelMap& pred, const LabelMap& gt);
  Confusion& merge(const Confusion& other);
};

struct MetricReport {
  double f1_change = 0;
  double iou_static = 0;
  double iou_change = 0;
  double miou = 0;
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Empty denominators (nothing predicted, nothing to find) count as perfect.
MetricReport compute_metrics(const Confusion& c);

MetricReport evaluate(const LabelMap& pred, const LabelMap& gt);

std::string metrics_to_json(const MetricReport& r);

}  // namespace scd
