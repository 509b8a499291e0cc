#pragma once

#include <string>
#include <vector>

#include "ntc/train.hpp"

namespace ntc {

// Self-contained SVG line chart of loss vs. step with a tick at each epoch
// boundary. Pure function of its input: identical traces render to
// byte-identical SVG.
std::string render_loss_svg(const std::vector<StepRecord>& steps);

}  // namespace ntc
