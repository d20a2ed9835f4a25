// SPDX-License-Identifier: Apache-2.0
//
// beamtrack: beam-pair allocation and tracking for time-varying mmWave MIMO links
// Copyright (C) 2026 The beamtrack authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#ifndef BEAMTRACK_HPP
#define BEAMTRACK_HPP

#include "specfun.hpp"
#include "random.hpp"
#include "channel.hpp"
#include "astp.hpp"
#include "allocate.hpp"
#include "track.hpp"
#include "campaign.hpp"

#endif
