#pragma once

#include "stlgail/ad/param_vector.hpp"
#include "stlgail/infer/network.hpp"
#include "stlgail/stl/formula.hpp"
#include "stlgail/stl/signal.hpp"

namespace stlgail::infer {

/// Discrete window [t1, t2] that atom endpoints (s, e) round to.
stl::TimeInterval rounded_window(double s, double e, int horizon);

/// Discretizes the network into a Formula over the raw (de-normalized)
/// signal. A conjunction is kept iff sig(h_c) > gate_threshold and an atom
/// iff sig(g_cj) > gate_threshold. With `canonical`, single-variable
/// predicates print as `x >= c` / `x < c`; otherwise a.x >= b is emitted
/// with the network's own scaling. Empty selections (no atoms in a kept
/// conjunction, or no kept conjunction) give TRUE.
stl::Formula extract_formula(const InferenceModel& model, double gate_threshold = 0.5,
                             bool canonical = true);

/// Snaps windows to their rounded integers and gates to +/-kGateSaturation
/// according to `gate_threshold`, so that the network and the extracted
/// formula describe the same classifier.
void harden(ad::ParamVector& params, const NetworkShape& shape,
            double gate_threshold = 0.5);

/// Greedy deletion of conjuncts/disjuncts (pre-order, first acceptable
/// deletion wins) while the exact MCR on `data` does not increase.
stl::Formula simplify(const stl::Formula& f, const stl::SignalSet& data);

}  // namespace stlgail::infer
