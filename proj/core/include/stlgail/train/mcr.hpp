#pragma once

#include <optional>

#include "stlgail/infer/network.hpp"
#include "stlgail/stl/formula.hpp"
#include "stlgail/stl/signal.hpp"

namespace stlgail::train {

/// Misclassification rate with exact semantics: a sample counts as an error
/// when (satisfied and label -1) or (violated and label +1).
/// Throws EmptyDataset.
double mcr(const stl::Formula& f, const stl::SignalSet& data);

/// Same, with satisfaction given by the sign of the network's smooth
/// robustness at temperature `tau` (the shape's when omitted).
double mcr(const infer::InferenceModel& model, const stl::SignalSet& data,
           std::optional<double> tau = std::nullopt);

struct ClassCounts {
  int positives = 0;
  int negatives = 0;
  int false_negatives = 0;  ///< label +1, violated
  int false_positives = 0;  ///< label -1, satisfied
};

ClassCounts confusion(const stl::Formula& f, const stl::SignalSet& data);

}  // namespace stlgail::train
