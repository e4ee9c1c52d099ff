// Copyright 2026 The qsdc-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QSDC_QSDC_HPP
#define QSDC_QSDC_HPP

#include "qsdc/qcore.hpp"
#include "qsdc/random.hpp"
#include "qsdc/parallel.hpp"
#include "qsdc/photonics.hpp"
#include "qsdc/belltest.hpp"
#include "qsdc/gaussian_fit.hpp"
#include "qsdc/bsm.hpp"
#include "qsdc/linkbudget.hpp"
#include "qsdc/protocol.hpp"

#endif // QSDC_QSDC_HPP
