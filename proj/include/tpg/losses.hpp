#pragma once

#include <vector>

#include "tpg/autodiff.hpp"

namespace tpg {

// log(clamp(v, lo, 1)) — the saturation-safe log used by every GAN loss term
Var safe_log(const Var& v, double lo = 1e-12);

// mean over the batch of max(0, 1 - label*score). scores: one scalar per
// sample ([batch] or [batch,1]); labels in {-1,+1}.
Var hinge_loss(const Var& scores, const std::vector<int>& labels);

// mean negative log softmax probability of the true class; logits
// [batch, classes]
Var cross_entropy_loss(const Var& logits, const std::vector<int>& labels);

}  // namespace tpg
