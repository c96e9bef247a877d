// Copyright 2026 The Angsep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "angsep/bench.hpp"
#include "angsep/config.hpp"
#include "angsep/dataset.hpp"
#include "angsep/errors.hpp"
#include "angsep/evaluate.hpp"
#include "angsep/fft.hpp"
#include "angsep/fractional_delay.hpp"
#include "angsep/geometry.hpp"
#include "angsep/metrics.hpp"
#include "angsep/parallel.hpp"
#include "angsep/random.hpp"
#include "angsep/report.hpp"
#include "angsep/rir.hpp"
#include "angsep/scene.hpp"
#include "angsep/separator.hpp"
#include "angsep/signals.hpp"
#include "angsep/stft.hpp"
#include "angsep/stream.hpp"
#include "angsep/types.hpp"
#include "angsep/wav.hpp"
