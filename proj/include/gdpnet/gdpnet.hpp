// Copyright 2026 The Authors.
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

#pragma once

#include "gdpnet/checkpoint.hpp"
#include "gdpnet/graph.hpp"
#include "gdpnet/graph_io.hpp"
#include "gdpnet/matrix.hpp"
#include "gdpnet/mlp.hpp"
#include "gdpnet/optimizer.hpp"
#include "gdpnet/policy.hpp"
#include "gdpnet/representation.hpp"
#include "gdpnet/selection_env.hpp"
#include "gdpnet/submodular.hpp"
#include "gdpnet/synthetic.hpp"
#include "gdpnet/trainer.hpp"
