/*
 Copyright 2026 The dlqg Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Umbrella header for the numerical library. JSON scenario support lives in
// dlqg/io.hpp and dlqg/scenarios.hpp, which additionally need json.hpp.

#pragma once

#include "dlqg/core.hpp"
#include "dlqg/plant.hpp"
#include "dlqg/infostructure.hpp"
#include "dlqg/coordination.hpp"
#include "dlqg/solver.hpp"
#include "dlqg/estimator.hpp"
#include "dlqg/sim.hpp"
#include "dlqg/tune.hpp"
