#include "scd/metrics.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace scd {

void Confusion::add(const LabelMap& pred, const LabelMap& gt) {
  if (pred.h != gt.h || pred.w != gt.w)
    throw std::invalid_argument("evaluate: prediction " + std::to_string(pred.h) + "x" +
                                std::to_string(pred.w) + " does not match ground truth " +
                                std::to_string(gt.h) + "x" + std::to_string(gt.w));
  for (std::size_t i = 0; i < gt.v.size(); ++i) {
    const bool p = pred.v[i] != 0, g = gt.v[i] != 0;
    if (p && g)
      ++tp;
    else if (p && !g)
      ++fp;
    else if (!p && g)
      ++fn;
    else
      ++tn;
  }
}

Confusion& Confusion::merge(const Confusion& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  tn += other.tn;
  return *this;
}

namespace {

double safe_ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricReport compute_metrics(const Confusion& c) {
  MetricReport r;
  r.tp = c.tp;
  r.fp = c.fp;
  r.fn = c.fn;
  r.tn = c.tn;
  r.f1_change = safe_ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  r.iou_change = safe_ratio(c.tp, c.tp + c.fp + c.fn);
  r.iou_static = safe_ratio(c.tn, c.tn + c.fn + c.fp);
  r.miou = (r.iou_static + r.iou_change) / 2.0;
  return r;
}

MetricReport evaluate(const LabelMap& pred, const LabelMap& gt) {
  Confusion c;
  c.add(pred, gt);
  return compute_metrics(c);
}

std::string metrics_to_json(const MetricReport& r) {
  nlohmann::json j{{"f1_change", r.f1_change}, {"iou_static", r.iou_static},
                   {"iou_change", r.iou_change}, {"miou", r.miou},
                   {"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn}, {"tn", r.tn}};
  return j.dump(2);
}

}  // namespace scd
