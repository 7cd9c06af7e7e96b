// lsdwfst/lsdwfst.hpp

// Copyright 2026  lsdwfst authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "lsdwfst/bench.hpp"
#include "lsdwfst/decoder.hpp"
#include "lsdwfst/fixtures.hpp"
#include "lsdwfst/lattice.hpp"
#include "lsdwfst/parallel.hpp"
#include "lsdwfst/posterior.hpp"
#include "lsdwfst/search.hpp"
#include "lsdwfst/symbol_table.hpp"
#include "lsdwfst/weight.hpp"
#include "lsdwfst/wfst.hpp"
#include "lsdwfst/wfst_text.hpp"
