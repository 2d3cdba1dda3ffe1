// Copyright 2026 The navsup Authors
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

#include "navsup/bev.hpp"
#include "navsup/camera.hpp"
#include "navsup/common.hpp"
#include "navsup/config.hpp"
#include "navsup/costmap.hpp"
#include "navsup/distance_transform.hpp"
#include "navsup/fmm.hpp"
#include "navsup/homography.hpp"
#include "navsup/io.hpp"
#include "navsup/metrics.hpp"
#include "navsup/pipeline.hpp"
#include "navsup/plane.hpp"
#include "navsup/supervision.hpp"
#include "navsup/synth.hpp"
#include "navsup/trajectory.hpp"
