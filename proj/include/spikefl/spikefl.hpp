// Copyright 2026 The spikefl Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPIKEFL_SPIKEFL_HPP
#define SPIKEFL_SPIKEFL_HPP

#include "spikefl/errors.hpp"
#include "spikefl/tensor.hpp"
#include "spikefl/random.hpp"
#include "spikefl/snn/lif.hpp"
#include "spikefl/snn/encoding.hpp"
#include "spikefl/snn/network.hpp"
#include "spikefl/snn/sgd.hpp"
#include "spikefl/fl/param_vector.hpp"
#include "spikefl/compression/sparse.hpp"
#include "spikefl/compression/schedule.hpp"
#include "spikefl/compression/wire.hpp"
#include "spikefl/compression/ledger.hpp"
#include "spikefl/channel/channel.hpp"
#include "spikefl/data/dataset.hpp"
#include "spikefl/data/loaders.hpp"
#include "spikefl/fl/engine.hpp"

#endif  // SPIKEFL_SPIKEFL_HPP
