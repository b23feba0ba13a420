// Copyright 2026 The mmnpp Authors
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

#ifndef MMNPP_MMNPP_HPP
#define MMNPP_MMNPP_HPP

#include "mmnpp/calibrate.hpp"
#include "mmnpp/decode.hpp"
#include "mmnpp/diagnostics.hpp"
#include "mmnpp/error.hpp"
#include "mmnpp/events.hpp"
#include "mmnpp/expm.hpp"
#include "mmnpp/exposure.hpp"
#include "mmnpp/io.hpp"
#include "mmnpp/matrix.hpp"
#include "mmnpp/model.hpp"
#include "mmnpp/rng.hpp"
#include "mmnpp/simulate.hpp"

#endif  // MMNPP_MMNPP_HPP
