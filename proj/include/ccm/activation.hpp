// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace ccm::nnet {

enum class Activation { Tanh, Silu };

}  // namespace ccm::nnet
