/*
 * Copyright (c) 2026, The Mixing Levels Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Everything except the network server (mixlevels/server.hpp), which pulls
// in Boost.Beast.

#include "mixlevels/engine.hpp"
#include "mixlevels/errors.hpp"
#include "mixlevels/gainmap.hpp"
#include "mixlevels/levels.hpp"
#include "mixlevels/orientation.hpp"
#include "mixlevels/service.hpp"
#include "mixlevels/settings.hpp"
#include "mixlevels/spectrum.hpp"
#include "mixlevels/stem_store.hpp"
#include "mixlevels/stems.hpp"
#include "mixlevels/trajectory.hpp"
#include "mixlevels/wav.hpp"
