#include "stlgail/train/mcr.hpp"

#include "stlgail/error.hpp"
#include "stlgail/stl/robustness.hpp"

namespace stlgail::train {

ClassCounts confusion(const stl::Formula& f, const stl::SignalSet& data) {
  ClassCounts c;
  for (const auto& ls : data) {
    const bool sat = stl::satisfies(ls.signal, f);
    if (ls.label > 0) {
      ++c.positives;
      if (!sat) ++c.false_negatives;
    } else {
      ++c.negatives;
      if (sat) ++c.false_positives;
    }
  }
  return c;
}

double mcr(const stl::Formula& f, const stl::SignalSet& data) {
  if (data.empty()) throw EmptyDataset("mcr of an empty dataset");
  const auto c = confusion(f, data);
  return static_cast<double>(c.false_negatives + c.false_positives) /
         static_cast<double>(data.size());
}

double mcr(const infer::InferenceModel& model, const stl::SignalSet& data,
           std::optional<double> tau) {
  if (data.empty()) throw EmptyDataset("mcr of an empty dataset");
  const double t = tau.value_or(model.shape.tau);
  const infer::Evaluator<double> net(model.shape, model.params.flat(), t);
  std::optional<stl::Formula> rule_n;
  if (model.known_rule) rule_n = infer::normalize_formula(*model.known_rule, model.normalizer);
  std::size_t errors = 0;
  for (const auto& ls : data) {
    if (ls.signal.last_time() < model.shape.horizon) {
      throw HorizonExceeded("signal shorter than the network horizon");
    }
    const auto x = model.normalizer.apply(ls.signal);
    const double r =
        infer::evaluate_normalized<double>(model, net, rule_n, std::span<const double>(x));
    const bool sat = r >= 0.0;
    if (sat != (ls.label > 0)) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(data.size());
}

}  // namespace stlgail::train
